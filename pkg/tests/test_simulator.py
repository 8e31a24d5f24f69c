import time

import numpy as np
import pytest

from app.commands.verify import relative_deviation
from app.core.config import settings
from app.core.errors import BucketSimError, StatevectorCapExceeded
from app.schemas.circuit import bitstring_to_index, format_bitstring, index_to_bitstring
from app.services.circuit_service import generate_random_circuit
from app.services.simulator_service import (
    SimulatorError,
    amplitude,
    amplitude_tensor,
    batch_probabilities,
    draw_distinct,
    plan_ordering,
    sample_outputs,
    statevector_oracle,
)


def test_worked_example_amplitude(worked_example):
    result = amplitude(worked_example, (0, 0))
    assert result.re == pytest.approx(0.5, abs=1e-12)
    assert result.im == pytest.approx(0.0, abs=1e-12)
    assert result.probability == pytest.approx(0.25, abs=1e-12)
    assert result.bitstring == "00"
    assert result.width == 1
    assert result.ok


def test_worked_example_other_outputs(worked_example):
    # CZ entre dos capas de H: ⟨x|C|00⟩ = (1/2, 1/2, 1/2, -1/2)
    expected = [0.5, 0.5, 0.5, -0.5]
    for index, value in enumerate(expected):
        result = amplitude(worked_example, index_to_bitstring(index, 2))
        assert result.amplitude == pytest.approx(value, abs=1e-12)


def test_statevector_is_normalized(small_circuits):
    for circuit in small_circuits:
        state = statevector_oracle(circuit)
        assert state.shape == (2 ** circuit.n,)
        assert np.sum(np.abs(state) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_statevector_cap():
    circuit = generate_random_circuit(2, 2, 4, seed=0)
    with pytest.raises(StatevectorCapExceeded):
        statevector_oracle(circuit, max_qubits=3)


def test_elimination_matches_statevector(small_circuits):
    for circuit in small_circuits:
        state = statevector_oracle(circuit)
        xs = [index_to_bitstring(i, circuit.n) for i in range(2 ** circuit.n)]
        results = batch_probabilities(circuit, xs, workers=1)
        values = np.array([r.amplitude for r in results])
        assert relative_deviation(values, state, circuit.n) <= 1e-10


def test_single_precision_matches_within_tolerance(small_circuits):
    for circuit in small_circuits[:3]:
        state = statevector_oracle(circuit)
        xs = [index_to_bitstring(i, circuit.n) for i in range(2 ** circuit.n)]
        results = batch_probabilities(circuit, xs, workers=1, precision="single")
        values = np.array([r.amplitude for r in results])
        assert relative_deviation(values, state, circuit.n) <= 1e-5


def test_batch_preserves_order_for_any_worker_count():
    circuit = generate_random_circuit(3, 3, 8, seed=9)
    rng = np.random.default_rng(0)
    xs = [tuple(int(b) for b in row) for row in rng.integers(0, 2, size=(40, circuit.n))]
    serial = batch_probabilities(circuit, xs, workers=1)
    parallel = batch_probabilities(circuit, xs, workers=2, chunksize=3)
    assert [r.bitstring for r in serial] == [format_bitstring(x) for x in xs]
    assert [r.bitstring for r in parallel] == [r.bitstring for r in serial]
    assert [r.probability for r in parallel] == [r.probability for r in serial]


def test_batch_keeps_going_after_budget_errors(worked_example):
    results = batch_probabilities(worked_example, [(0, 0), (1, 1)], memory_budget=16)
    assert [r.ok for r in results] == [False, False]
    assert {r.error_code for r in results} == {"memory_budget_exceeded"}
    assert all(r.probability is None for r in results)


def test_amplitude_rejects_wrong_length(worked_example):
    with pytest.raises(SimulatorError):
        amplitude(worked_example, (0, 1, 0))


def test_amplitude_tensor_with_all_outputs_free():
    circuit = generate_random_circuit(2, 3, 7, seed=4)
    tensor = amplitude_tensor(circuit, [None] * circuit.n)
    assert tensor.shape == (2,) * circuit.n
    np.testing.assert_allclose(tensor.reshape(-1), statevector_oracle(circuit), atol=1e-12)


def test_amplitude_tensor_with_some_outputs_fixed():
    circuit = generate_random_circuit(2, 2, 9, seed=5)
    state = statevector_oracle(circuit).reshape(2, 2, 2, 2)
    tensor = amplitude_tensor(circuit, [1, None, 0, None])
    np.testing.assert_allclose(tensor, state[1, :, 0, :], atol=1e-12)


@pytest.mark.parametrize("strategy", ["vertical", "min_fill", "min_degree"])
def test_strategies_agree(strategy):
    circuit = generate_random_circuit(3, 3, 10, seed=1)
    x = (0, 1, 1, 0, 1, 0, 0, 1, 1)
    reference = amplitude(circuit, x, strategy="vertical").amplitude
    assert amplitude(circuit, x, strategy=strategy).amplitude == pytest.approx(reference, abs=1e-12)


def test_auto_strategy_uses_vertical_on_shallow_circuits():
    circuit = generate_random_circuit(2, 2, 5, seed=0)
    _, report = plan_ordering(circuit, "auto")
    assert report.provenance == "vertical"


def test_auto_strategy_picks_the_cheaper_plan():
    circuit = generate_random_circuit(4, 4, 14, seed=0)
    _, auto = plan_ordering(circuit, "auto")
    _, vertical = plan_ordering(circuit, "vertical")
    _, min_fill = plan_ordering(circuit, "min_fill")
    assert auto.cost_key == min(vertical.cost_key, min_fill.cost_key)


def test_unknown_strategy_is_rejected(worked_example):
    with pytest.raises(SimulatorError):
        plan_ordering(worked_example, "random")


def test_draw_distinct_takes_full_cube_in_order():
    rng = np.random.default_rng(0)
    assert draw_distinct(rng, 3, 8) == [index_to_bitstring(i, 3) for i in range(8)]
    drawn = draw_distinct(rng, 10, 100)
    assert len(set(drawn)) == 100
    with pytest.raises(SimulatorError):
        draw_distinct(rng, 2, 5)


def test_sampling_is_deterministic_per_seed():
    circuit = generate_random_circuit(2, 3, 8, seed=2)
    first = sample_outputs(circuit, t=20, m=10, seed=5)
    second = sample_outputs(circuit, t=20, m=10, seed=5)
    other = sample_outputs(circuit, t=20, m=10, seed=6)
    assert first == second
    assert (first.bitstrings, first.samples) != (other.bitstrings, other.samples)


def test_sampling_draws_from_the_computed_set():
    circuit = generate_random_circuit(3, 3, 9, seed=3)
    sample_set = sample_outputs(circuit, t=200, m=50, seed=1)
    assert set(sample_set.samples) <= set(sample_set.bitstrings)
    assert sum(sample_set.normalized) == pytest.approx(1.0)
    assert sample_set.total_probability == pytest.approx(sum(sample_set.probabilities))


def test_exact_sampling_mode_uses_the_whole_distribution():
    circuit = generate_random_circuit(2, 2, 10, seed=7)
    sample_set = sample_outputs(circuit, t=16, m=16, seed=0, method="statevector")
    assert sample_set.total_probability == pytest.approx(1.0, abs=1e-12)
    probabilities = np.abs(statevector_oracle(circuit)) ** 2
    for x, p in zip(sample_set.bitstrings, sample_set.probabilities):
        assert p == pytest.approx(probabilities[bitstring_to_index([int(c) for c in x])])


def test_elimination_and_statevector_sampling_agree():
    circuit = generate_random_circuit(2, 3, 8, seed=4)
    by_elimination = sample_outputs(circuit, t=30, m=15, seed=3)
    by_statevector = sample_outputs(circuit, t=30, m=15, seed=3, method="statevector")
    assert by_elimination.bitstrings == by_statevector.bitstrings
    np.testing.assert_allclose(by_elimination.probabilities, by_statevector.probabilities, atol=1e-12)


def test_sampling_validates_sizes(worked_example):
    with pytest.raises(SimulatorError):
        sample_outputs(worked_example, t=2, m=3, seed=0)
    with pytest.raises(SimulatorError):
        sample_outputs(worked_example, t=4, m=1, seed=0, method="tensor")


@pytest.mark.slow
def test_oracle_equivalence_on_fifty_circuits():
    grids = [(2, 2), (2, 3), (3, 3), (3, 4), (4, 4), (4, 5)]
    rng = np.random.default_rng(2024)
    count = 0
    for seed in range(9):
        for rows, cols in grids:
            depth = 5 + (seed * 7 + rows + cols) % 16
            circuit = generate_random_circuit(rows, cols, depth, seed)
            state = statevector_oracle(circuit)
            xs = [tuple(int(b) for b in row) for row in rng.integers(0, 2, size=(8, circuit.n))]
            expected = [state[bitstring_to_index(x)] for x in xs]
            double = [r.amplitude for r in batch_probabilities(circuit, xs, workers=1)]
            single = [r.amplitude for r in batch_probabilities(circuit, xs, workers=1, precision="single")]
            assert relative_deviation(double, expected, circuit.n) <= 1e-10
            assert relative_deviation(single, expected, circuit.n) <= 1e-5
            count += 1
    assert count >= 50


@pytest.mark.slow
def test_sampled_entropy_matches_full_distribution():
    circuit = generate_random_circuit(4, 4, 25, seed=1, pool="xyt")
    probabilities = np.abs(statevector_oracle(circuit)) ** 2
    terms = -(2 ** circuit.n) * probabilities * np.log(np.where(probabilities > 0, probabilities, 1.0))
    t = 2000
    sample_set = sample_outputs(circuit, t=t, m=100, seed=0)
    # El estimador sobre T es un promedio de t términos del conjunto completo
    sigma = float(np.std(terms)) / np.sqrt(t)
    assert abs(sample_set.entropy_estimate - float(np.mean(terms))) < 5 * sigma


@pytest.mark.slow
def test_six_by_six_amplitude_within_budget():
    circuit = generate_random_circuit(6, 6, 25, seed=0)
    start = time.perf_counter()
    try:
        result = amplitude(circuit, (0,) * circuit.n, strategy="auto")
    except BucketSimError as e:
        # Solo se admite el aborto estructurado por presupuesto
        assert e.error_code == "memory_budget_exceeded"
        assert e.to_dict()["budget_bytes"] == settings.MEMORY_BUDGET_BYTES
    else:
        assert result.ok
        assert 0 <= result.probability <= 1
        assert result.peak_memory_bytes <= settings.MEMORY_BUDGET_BYTES
    assert time.perf_counter() - start < 300
