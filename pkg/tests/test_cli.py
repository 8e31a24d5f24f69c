import csv
import io
import json

import numpy as np
import pytest

from app.commands.verify import compare_oracles
from app.main import main
from app.schemas.circuit import format_bitstring, index_to_bitstring
from app.services.benchmark_service import exact_sampler
from app.services.circuit_service import generate_random_circuit
from app.services.simulator_service import statevector_oracle
from tests.conftest import CLIFFORD_CIRCUIT, WORKED_EXAMPLE


@pytest.fixture
def worked_example_file(tmp_path):
    path = tmp_path / "worked.txt"
    path.write_text(WORKED_EXAMPLE)
    return str(path)


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_generate_writes_circuit_and_metadata(tmp_path):
    target = tmp_path / "c.txt"
    assert main(["generate", "--rows", "2", "--cols", "2", "--depth", "1", "-o", str(target)]) == 0
    lines = target.read_text().splitlines()
    assert lines[0].split()[0] == "4"
    assert [line.split()[1] for line in lines[1:]] == ["h"] * 4

    metadata = json.loads((tmp_path / "c.txt.meta.json").read_text())
    assert metadata["command"] == "generate"
    assert metadata["master_seed"] == 0
    assert metadata["seed_split"]["circuit"] == 0


def test_generate_is_byte_reproducible(tmp_path):
    args = ["generate", "--rows", "3", "--cols", "3", "--depth", "12", "--seed", "5"]
    assert main(args + ["-o", str(tmp_path / "a.txt")]) == 0
    assert main(args + ["-o", str(tmp_path / "b.txt")]) == 0
    assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()
    assert (tmp_path / "a.txt.meta.json").read_text().replace("a.txt", "b.txt") == \
        (tmp_path / "b.txt.meta.json").read_text()


def test_invalid_depth_is_a_usage_error():
    with pytest.raises(SystemExit) as error:
        main(["generate", "--rows", "2", "--cols", "2", "--depth", "0"])
    assert error.value.code == 2


def test_amplitude_of_worked_example(worked_example_file, capsys):
    assert main(["amplitude", "--circuit", worked_example_file, "-x", "00", "-x", "11"]) == 0
    rows = read_csv(capsys.readouterr().out)
    assert [r["bitstring"] for r in rows] == ["00", "11"]
    assert float(rows[0]["prob"]) == pytest.approx(0.25)
    assert float(rows[1]["re"]) == pytest.approx(-0.5)
    assert rows[0]["width"] == "1"
    assert rows[0]["seconds"] == ""


def test_orderings_give_the_same_amplitudes(capsys):
    outputs = []
    for ordering in ("vertical", "minfill", "min_degree"):
        code = main(["amplitude", "--rows", "2", "--cols", "3", "--depth", "9", "--seed", "2",
                     "--random", "6", "--ordering", ordering])
        assert code == 0
        outputs.append(read_csv(capsys.readouterr().out))
    for rows in outputs[1:]:
        assert [r["bitstring"] for r in rows] == [r["bitstring"] for r in outputs[0]]
        for a, b in zip(rows, outputs[0]):
            assert float(a["prob"]) == pytest.approx(float(b["prob"]), abs=1e-12)


def test_amplitude_all_matches_statevector(capsys):
    assert main(["amplitude", "--rows", "2", "--cols", "2", "--depth", "7", "--seed", "3",
                 "--all", "--format", "jsonl"]) == 0
    records = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    state = statevector_oracle(generate_random_circuit(2, 2, 7, 3))
    assert [r["bitstring"] for r in records] == [format_bitstring(index_to_bitstring(i, 4)) for i in range(16)]
    np.testing.assert_allclose([r["probability"] for r in records], np.abs(state) ** 2, atol=1e-12)


def test_ordering_export_and_import(worked_example_file, tmp_path, capsys):
    exported = tmp_path / "order.txt"
    assert main(["amplitude", "--circuit", worked_example_file, "-x", "10",
                 "--ordering", "vertical", "--export-ordering", str(exported)]) == 0
    first = capsys.readouterr().out
    assert exported.read_text() == "0:1\n1:1\n"
    assert main(["amplitude", "--circuit", worked_example_file, "-x", "10",
                 "--ordering-file", str(exported)]) == 0
    assert capsys.readouterr().out == first


def test_memory_budget_returns_resource_code(worked_example_file, capsys):
    code = main(["amplitude", "--circuit", worked_example_file, "-x", "00", "--memory-budget", "16"])
    assert code == 3
    rows = read_csv(capsys.readouterr().out)
    assert rows[0]["prob"] == ""


def test_missing_circuit_source_returns_usage_code(capsys):
    assert main(["amplitude", "-x", "00"]) == 2
    assert "error:" in capsys.readouterr().err


def test_malformed_circuit_returns_usage_code(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("2\n0 h 0\n0 h 5\n")
    assert main(["amplitude", "--circuit", str(path), "-x", "00"]) == 2


def test_width_with_line_graph(worked_example_file, capsys):
    assert main(["width", "--circuit", worked_example_file, "--line-graph"]) == 0
    (row,) = read_csv(capsys.readouterr().out)
    assert row["ordering"] == "vertical"
    assert row["max_clique"] == "2"
    assert row["width"] == "1"
    assert row["line_graph_max_clique"] == "4"
    assert row["line_graph_width"] == "3"


def test_width_versus_depth_table(tmp_path, capsys):
    edges = tmp_path / "edges.txt"
    assert main(["width", "--rows", "3", "--cols", "3", "--depths", "4", "8", "12",
                 "--ordering", "all", "--format", "json", "--edge-list", str(edges)]) == 0
    records = json.loads(capsys.readouterr().out)
    assert len(records) == 9
    vertical = [r["width"] for r in records if r["provenance"] == "vertical"]
    assert vertical == sorted(vertical)
    assert edges.read_text()
    assert (tmp_path / "edges.txt.meta.json").exists()


def test_sample_writes_probabilities_and_samples(tmp_path):
    prefix = tmp_path / "run"
    assert main(["sample", "--rows", "2", "--cols", "3", "--depth", "8", "--t", "20", "--m", "7",
                 "-o", str(prefix)]) == 0
    table = read_csv((tmp_path / "run.probabilities.csv").read_text())
    samples = (tmp_path / "run.samples.txt").read_text().split()
    summary = json.loads((tmp_path / "run.summary.json").read_text())
    assert len(table) == 20
    assert len(samples) == 7
    assert set(samples) <= {r["bitstring"] for r in table}
    assert summary["t"] == 20 and summary["m"] == 7
    assert (tmp_path / "run.samples.txt.meta.json").exists()


def test_sample_rejects_more_samples_than_set():
    assert main(["sample", "--rows", "2", "--cols", "2", "--depth", "5", "--t", "4", "--m", "9"]) == 2


def test_xeb_on_exact_samples(tmp_path, capsys):
    circuit = generate_random_circuit(3, 3, 16, seed=21, pool="xyt")
    probabilities = np.abs(statevector_oracle(circuit)) ** 2
    picks = exact_sampler(probabilities, 20_000, np.random.default_rng(0))
    samples = tmp_path / "measured.txt"
    samples.write_text("".join(format_bitstring(index_to_bitstring(int(i), 9)) + "\n" for i in picks))

    assert main(["xeb", "--rows", "3", "--cols", "3", "--depth", "16", "--seed", "21",
                 "--pool", "xyt", "--samples", str(samples)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["entropy_source"] == "exact"
    assert report["m"] == 20_000
    assert report["alpha"] == pytest.approx(1.0, abs=max(0.15, 5 * report["stderr"]))


def test_xeb_with_elimination_probabilities(tmp_path, capsys):
    circuit = generate_random_circuit(2, 2, 10, seed=0, pool="xyt")
    probabilities = np.abs(statevector_oracle(circuit)) ** 2
    picks = exact_sampler(probabilities, 50, np.random.default_rng(1))
    samples = tmp_path / "measured.txt"
    samples.write_text("".join(format_bitstring(index_to_bitstring(int(i), 4)) + "\n" for i in picks))

    assert main(["xeb", "--rows", "2", "--cols", "2", "--depth", "10", "--pool", "xyt",
                 "--samples", str(samples), "--entropies", "porter-thomas"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["entropy_source"] == "porter-thomas"
    assert report["m"] == 50
    assert report["cross_entropy"] == pytest.approx(-np.mean(np.log(probabilities[picks])))
    assert report["h_pu"] == pytest.approx(report["h_pt"])


def test_pt_full_writes_histogram(tmp_path):
    prefix = tmp_path / "pt"
    assert main(["pt", "--rows", "2", "--cols", "3", "--depth", "10", "--pool", "xyt", "--full",
                 "--bins", "12", "--resamples", "100", "-o", str(prefix)]) == 0
    histogram = read_csv((tmp_path / "pt.histogram.csv").read_text())
    stats = json.loads((tmp_path / "pt.stats.json").read_text())
    assert len(histogram) == 12
    assert sum(int(b["count"]) for b in histogram) == 64
    assert stats["t"] == 64
    assert stats["porter_thomas"] is None
    assert "histogram" not in stats


def test_pt_on_a_random_subset(capsys):
    assert main(["pt", "--rows", "2", "--cols", "3", "--depth", "8", "--t", "40",
                 "--resamples", "100"]) == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["t"] == 40


def test_verify_passes_on_generated_circuit(tmp_path, capsys):
    couplings = tmp_path / "couplings.json"
    assert main(["verify", "--rows", "2", "--cols", "2", "--depth", "8", "--bitstrings", "6",
                 "--couplings", str(couplings)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is True
    assert report["oracles"]["statevector"]["max_relative_deviation"] <= 1e-10
    assert report["oracles"]["ising"]["max_relative_deviation"] <= 1e-10
    assert len(report["bitstrings"]) == 6
    assert json.loads(couplings.read_text())


def test_verify_reports_even_phases_for_clifford_circuit(tmp_path, capsys):
    path = tmp_path / "clifford.txt"
    path.write_text(CLIFFORD_CIRCUIT)
    assert main(["verify", "--circuit", str(path), "--bitstrings", "4"]) == 0
    profile = json.loads(capsys.readouterr().out)["phase_profile"]
    assert profile["t_free"] is True
    assert profile["even_only"] is True


def test_verify_budget_abort(worked_example_file):
    assert main(["verify", "--circuit", worked_example_file, "--memory-budget", "16"]) == 3


def test_metrics_file(worked_example_file, tmp_path, capsys):
    metrics = tmp_path / "metrics.prom"
    assert main(["--metrics-file", str(metrics), "amplitude", "--circuit", worked_example_file,
                 "-x", "01"]) == 0
    assert "bucketsim_amplitude_evaluations_total" in metrics.read_text()


@pytest.mark.slow
def test_verify_on_three_by_three_depth_twelve(capsys):
    assert main(["verify", "--rows", "3", "--cols", "3", "--depth", "12", "--seed", "1"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is True
    assert report["oracles"]["statevector"]["max_relative_deviation"] < 1e-10
    assert report["oracles"]["elimination"]["seconds"] >= 0


def test_oracle_deviation_is_relative_to_elimination():
    reference = np.array([1.0, 0.0])
    deviations = compare_oracles(reference, {"statevector": np.array([0.0, 0.0])}, n=2)
    # |0 - 1| / |1|, no |0 - 1| / 2^{-1}
    assert deviations == {"statevector": pytest.approx(1.0)}
