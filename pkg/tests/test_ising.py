import numpy as np
import pytest

from app.core.errors import FreeSpinCapExceeded
from app.schemas.circuit import index_to_bitstring
from app.services.circuit_service import generate_random_circuit, worldline_lengths
from app.services.ising_service import (
    IsingError,
    build_ising,
    clifford_phase_profile,
    coupling_list,
    partition_amplitude,
    path_phase,
)
from app.services.simulator_service import statevector_oracle
from app.utils.circuit_parser import parse_circuit


def all_amplitudes(model, n, **kwargs):
    return np.array([partition_amplitude(model, index_to_bitstring(i, n), **kwargs) for i in range(2 ** n)])


def test_worked_example_path_sum(worked_example):
    model = build_ising(worked_example)
    assert model.total_spins == 4
    assert model.free_spins == [(0, 1), (1, 1)]
    assert partition_amplitude(model, (0, 0)) == pytest.approx(0.5, abs=1e-12)
    assert partition_amplitude(model, (1, 1)) == pytest.approx(-0.5, abs=1e-12)


def test_counts_match_worldline_lengths():
    circuit = generate_random_circuit(3, 3, 14, seed=3)
    model = build_ising(circuit)
    worldlines = worldline_lengths(circuit)
    assert model.lengths == worldlines.lengths
    np.testing.assert_array_equal(model.prefix, worldlines.prefix)
    assert model.total_spins == sum(worldlines.lengths)


def test_path_sum_matches_statevector_on_twenty_circuits():
    grids = [(2, 2), (2, 3), (1, 4), (1, 3)]
    checked = 0
    for seed in range(200):
        if checked == 20:
            break
        rows, cols = grids[seed % len(grids)]
        circuit = generate_random_circuit(rows, cols, 6 + seed % 7, seed, pool="xyt")
        model = build_ising(circuit)
        if len(model.free_spins) > 14:
            continue
        np.testing.assert_allclose(
            all_amplitudes(model, circuit.n), statevector_oracle(circuit), atol=1e-10
        )
        checked += 1
    assert checked == 20


def test_path_sum_on_hand_written_circuits(line_circuit, clifford_circuit):
    for circuit in (line_circuit, clifford_circuit):
        model = build_ising(circuit)
        np.testing.assert_allclose(
            all_amplitudes(model, circuit.n), statevector_oracle(circuit), atol=1e-12
        )


def test_global_phase_is_a_constant_factor():
    circuit = generate_random_circuit(2, 2, 10, seed=4)
    model = build_ising(circuit)
    with_phase = all_amplitudes(model, circuit.n)
    without_phase = all_amplitudes(model, circuit.n, include_global_phase=False)
    nonzero = np.abs(without_phase) > 1e-9
    ratios = with_phase[nonzero] / without_phase[nonzero]
    expected = np.exp(1j * np.pi * model.global_phase_units / 4)
    np.testing.assert_allclose(ratios, expected, atol=1e-10)


def test_path_phase_of_trivial_path(worked_example):
    model = build_ising(worked_example)
    assert path_phase(model, [[1, 1, 1], [1, 1, 1]], (0, 0)) == 0
    # b_0^1 = b_1^1 = 1 con entradas y salidas en 0: solo el CZ aporta 4 unidades
    assert path_phase(model, [[1, -1, 1], [1, -1, 1]], (0, 0)) == 4


def test_path_phase_checks_boundaries(worked_example):
    model = build_ising(worked_example)
    with pytest.raises(IsingError):
        path_phase(model, [[-1, 1, 1], [1, 1, 1]], (0, 0))
    with pytest.raises(IsingError):
        path_phase(model, [[1, 1, 1], [1, 1, 1]], (1, 0))
    with pytest.raises(IsingError):
        path_phase(model, [[1, 1], [1, 1, 1]], (0, 0))


def test_free_spin_cap():
    circuit = generate_random_circuit(2, 2, 8, seed=0)
    model = build_ising(circuit)
    assert len(model.free_spins) > 0
    with pytest.raises(FreeSpinCapExceeded):
        partition_amplitude(model, (0, 0, 0, 0), max_free_spins=0)


def test_clifford_circuit_has_only_even_phases(clifford_circuit):
    profile = clifford_phase_profile(clifford_circuit)
    assert profile
    assert all(unit % 2 == 0 for unit in profile)


def test_t_gate_produces_odd_phases():
    circuit = parse_circuit("1\n0 h 0\n1 t 0\n2 h 0\n")
    profile = clifford_phase_profile(circuit)
    assert any(unit % 2 == 1 for unit in profile)


def test_phase_profile_samples_large_circuits(clifford_circuit):
    profile = clifford_phase_profile(clifford_circuit, sample_paths=256, seed=1, max_free_spins=2)
    assert profile
    assert all(unit % 2 == 0 for unit in profile)


def test_coupling_list_has_one_term_per_gate():
    circuit = generate_random_circuit(2, 3, 9, seed=5)
    model = build_ising(circuit)
    couplings = coupling_list(model)
    assert len(couplings) == len(circuit.gates)
    coefficients = {"x": 2, "y": 4, "h": 4, "t": 1, "cz": 4}
    for record in couplings:
        assert record["coefficient"] == coefficients[record["kind"]]
        assert all(":" in spin for spin in record["spins"])
