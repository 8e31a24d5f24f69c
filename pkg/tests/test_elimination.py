from itertools import permutations

import networkx as nx
import numpy as np
import pytest

from app.core.errors import MemoryBudgetExceeded
from app.services.circuit_service import generate_random_circuit
from app.services.elimination_service import (
    EliminationError,
    Ordering,
    build_line_graph,
    bucket_eliminate,
    greedy_ordering,
    simulate_elimination,
    vertical_ordering,
)
from app.services.model_service import Factor, GraphicalModel, VariableId, build_model
from app.services.simulator_service import statevector_oracle
from app.schemas.circuit import bitstring_to_index


def external(variables):
    return Ordering(tuple(variables), "external")


def test_worked_example_amplitude(worked_example):
    model = build_model(worked_example, output=[0, 0])
    ordering = vertical_ordering(model)
    result = bucket_eliminate(model, ordering)
    assert result.value == pytest.approx(0.5, abs=1e-12)
    assert result.max_rank == 2
    assert result.step_ranks == [2, 1]

    report = simulate_elimination(model.graph, ordering)
    assert report.max_clique == 2
    assert report.width == 1
    assert report.step_cliques == [2, 1]


def test_worked_example_line_graph(worked_example):
    line_graph = build_line_graph(worked_example)
    # Dos tramos de entrada, cuatro alrededor del CZ y dos de salida
    assert line_graph.number_of_nodes() == 8
    _, report = greedy_ordering(line_graph, "min_fill", seed=0)
    assert report.max_clique == 4
    assert report.width == 3


def test_path_graph_has_width_one():
    graph = nx.path_graph(6)
    report = simulate_elimination(graph, external(range(6)))
    assert report.max_clique == 2
    assert report.width == 1


def test_clique_has_width_k_minus_one():
    graph = nx.complete_graph(5)
    report = simulate_elimination(graph, external(range(5)))
    assert report.max_clique == 5
    assert report.width == 4


def test_star_graph_center_first_is_worse():
    graph = nx.star_graph(4)
    leaves_first = simulate_elimination(graph, external([1, 2, 3, 4, 0]))
    center_first = simulate_elimination(graph, external([0, 1, 2, 3, 4]))
    assert leaves_first.width == 1
    assert center_first.width == 4


def test_greedy_finds_tree_width():
    graph = nx.balanced_tree(2, 4)
    for heuristic in ("min_fill", "min_degree"):
        ordering, report = greedy_ordering(graph, heuristic, seed=1)
        assert report.width == 1
        assert report.provenance == heuristic
        assert set(ordering.variables) == set(graph.nodes)


def test_greedy_is_deterministic_per_seed():
    graph = nx.gnp_random_graph(30, 0.15, seed=5)
    first, _ = greedy_ordering(graph, "min_fill", seed=42, restarts=4)
    second, _ = greedy_ordering(graph, "min_fill", seed=42, restarts=4)
    assert first == second


def test_greedy_rejects_empty_graph_and_unknown_heuristic():
    with pytest.raises(EliminationError):
        greedy_ordering(nx.Graph(), "min_fill")
    with pytest.raises(EliminationError):
        greedy_ordering(nx.path_graph(3), "min_width")


def test_ordering_must_be_a_permutation(worked_example):
    model = build_model(worked_example, output=[0, 0])
    with pytest.raises(EliminationError):
        bucket_eliminate(model, external([VariableId(0, 1)]))
    with pytest.raises(EliminationError):
        Ordering((VariableId(0, 1), VariableId(0, 1)))
    with pytest.raises(EliminationError):
        Ordering((), "random")


def test_all_orderings_agree_on_small_model(line_circuit):
    state = statevector_oracle(line_circuit)
    for x in [(0, 0, 0), (1, 0, 1), (1, 1, 1)]:
        model = build_model(line_circuit, output=x)
        assert model.variable_count == 6
        expected = state[bitstring_to_index(x)]
        values = np.array([
            bucket_eliminate(model, external(order)).value
            for order in permutations(model.variables)
        ])
        np.testing.assert_allclose(values, expected, atol=1e-12)


def test_all_orderings_agree_on_twenty_small_models():
    rng = np.random.default_rng(11)
    checked = 0
    for seed in range(60):
        if checked == 20:
            break
        circuit = generate_random_circuit(2, 2, 5 + seed % 2, seed)
        x = tuple(int(b) for b in rng.integers(0, 2, size=circuit.n))
        model = build_model(circuit, output=x)
        if not 1 <= model.variable_count <= 6:
            continue
        expected = statevector_oracle(circuit)[bitstring_to_index(x)]
        values = np.array([
            bucket_eliminate(model, external(order)).value
            for order in permutations(model.variables)
        ])
        np.testing.assert_allclose(values, expected, atol=1e-12)
        checked += 1
    assert checked == 20


def test_heuristic_orderings_agree_on_generated_circuit():
    circuit = generate_random_circuit(3, 3, 10, seed=8)
    model = build_model(circuit, output=[1, 0, 1, 1, 0, 0, 1, 0, 1])
    values = [bucket_eliminate(model, vertical_ordering(model)).value]
    for heuristic in ("min_fill", "min_degree"):
        ordering, _ = greedy_ordering(model.graph, heuristic, seed=3)
        values.append(bucket_eliminate(model, ordering).value)
    np.testing.assert_allclose(values, values[0], rtol=1e-10, atol=1e-14)


def test_predicted_clique_matches_observed_rank(rng):
    circuit = generate_random_circuit(3, 3, 9, seed=12)
    model = build_model(circuit, output=[0] * circuit.n)
    orderings = [vertical_ordering(model)]
    orderings += [greedy_ordering(model.graph, h, seed=2)[0] for h in ("min_fill", "min_degree")]
    for _ in range(5):
        orderings.append(external([model.variables[i] for i in rng.permutation(model.variable_count)]))
    for ordering in orderings:
        report = simulate_elimination(model.graph, ordering)
        result = bucket_eliminate(model, ordering)
        assert report.max_clique == result.max_rank
        assert report.step_cliques == result.step_ranks
        assert report.flops == result.flops


def test_vertical_ordering_walks_the_short_dimension():
    circuit = generate_random_circuit(2, 3, 6, seed=1)
    model = build_model(circuit, output=None)
    qubits = []
    for v in vertical_ordering(model).variables:
        if not qubits or qubits[-1] != v.qubit:
            qubits.append(v.qubit)
    assert qubits == [0, 3, 1, 4, 2, 5]


def test_vertical_ordering_is_sorted_by_index_per_qubit():
    circuit = generate_random_circuit(3, 3, 12, seed=2)
    model = build_model(circuit, output=[0] * circuit.n)
    ordering = vertical_ordering(model).variables
    for q in range(circuit.n):
        indices = [v.index for v in ordering if v.qubit == q]
        assert indices == sorted(indices)


def test_memory_budget_abort_reports_rank_and_step(worked_example):
    model = build_model(worked_example, output=[0, 0])
    with pytest.raises(MemoryBudgetExceeded) as error:
        bucket_eliminate(model, vertical_ordering(model), memory_budget=16)
    assert error.value.rank == 2
    assert error.value.step == 0
    assert error.value.required_bytes == 64
    assert error.value.to_dict()["budget_bytes"] == 16


def test_variable_without_factors_contributes_a_factor_two():
    model = GraphicalModel.from_factors([], extra_variables=["a"])
    result = bucket_eliminate(model, external(["a"]))
    assert result.value == pytest.approx(2)
    assert result.step_ranks == [1]


def test_disconnected_components_multiply():
    factors = [
        Factor(("a",), np.array([1, 2], dtype=complex)),
        Factor(("b",), np.array([3, 4], dtype=complex)),
        Factor((), np.asarray(0.5, dtype=complex)),
    ]
    model = GraphicalModel.from_factors(factors)
    result = bucket_eliminate(model, external(["b", "a"]))
    assert result.value == pytest.approx(0.5 * 3 * 7)


def test_free_variables_give_the_joint_tensor(worked_example):
    model = build_model(worked_example, output=None)
    assert model.free_variables == (VariableId(0, 2), VariableId(1, 2))
    result = bucket_eliminate(model, vertical_ordering(model))
    joint = result.value
    assert joint.variables == model.free_variables
    expected = statevector_oracle(worked_example).reshape(2, 2)
    np.testing.assert_allclose(joint.values, expected, atol=1e-12)


def test_simulate_elimination_skips_free_variables(worked_example):
    model = build_model(worked_example, output=None)
    report = simulate_elimination(model.graph, vertical_ordering(model), model.free_variables)
    assert len(report.step_cliques) == model.variable_count - 2
    assert report.variable_count == model.variable_count


def test_width_grows_with_depth_for_vertical_ordering():
    widths = []
    for depth in (4, 8, 12, 16):
        circuit = generate_random_circuit(4, 4, depth, seed=0)
        model = build_model(circuit, output=[0] * circuit.n)
        widths.append(simulate_elimination(model.graph, vertical_ordering(model)).width)
    assert widths == sorted(widths)


@pytest.mark.slow
def test_vertical_width_is_non_decreasing_on_six_by_six():
    widths = []
    for depth in range(10, 31, 4):
        circuit = generate_random_circuit(6, 6, depth, seed=0)
        model = build_model(circuit, output=[0] * circuit.n)
        widths.append(simulate_elimination(model.graph, vertical_ordering(model)).width)
    assert widths == sorted(widths)
