"""
Servicio de eliminación de variables (bucket elimination).

Evalúa un modelo gráfico sumando una variable a la vez según un ordenamiento,
calcula ordenamientos (vertical y heurísticas voraces) con su ancho inducido y
construye el grafo de línea de la red de tensores para comparar anchos.
"""
import logging
import time
from dataclasses import dataclass, field
from functools import reduce
from itertools import combinations
from typing import Dict, Hashable, List, Optional, Sequence, Set, Tuple, Union

import networkx as nx
import numpy as np

from app.core.config import settings
from app.core.errors import BucketSimError, MemoryBudgetExceeded
from app.decorators.operation_logging import log_execution
from app.schemas.circuit import Circuit
from app.schemas.elimination import WidthReport
from app.services.model_service import Factor, GraphicalModel, VariableId

logger = logging.getLogger(__name__)

PROVENANCES = ("vertical", "min_fill", "min_degree", "external")
HEURISTICS = ("min_fill", "min_degree")


class EliminationError(BucketSimError):
    """Excepción personalizada para errores de eliminación y ordenamientos"""

    error_code = "elimination_error"


@dataclass(frozen=True)
class Ordering:
    """Permutación de las variables no fijadas con su procedencia"""
    variables: Tuple[Hashable, ...]
    provenance: str = "external"

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise EliminationError(f"unknown ordering provenance {self.provenance!r}")
        if len(set(self.variables)) != len(self.variables):
            raise EliminationError("ordering repeats a variable")

    def __len__(self) -> int:
        return len(self.variables)


@dataclass
class Bucket:
    """Factores cuya variable más baja es la variable del bucket"""
    variable: Hashable
    factors: List[Factor] = field(default_factory=list)


@dataclass
class EliminationResult:
    """
    value: amplitud escalar, o Factor conjunto sobre las variables libres
    max_rank: rango máximo de los tensores producto formados
    step_ranks: rango del producto en cada paso (1 para buckets vacíos)
    flops: Σ 2^rango sobre los pasos
    """
    value: Union[complex, Factor]
    max_rank: int
    step_ranks: List[int]
    flops: int


def _check_permutation(variables: Sequence[Hashable], expected: Set[Hashable]) -> None:
    given = set(variables)
    if given != expected or len(given) != len(variables):
        missing = len(expected - given)
        extra = len(given - expected)
        raise EliminationError(
            f"ordering is not a permutation of the model variables "
            f"({missing} missing, {extra} unknown)"
        )


def _lateral_key(model: GraphicalModel):
    """
    Clave (j lateral, k): recorre primero la dimensión más corta de la grilla
    para que j consecutivos sean vecinos a lo largo de ℓ.
    """
    rows, cols = model.rows, model.cols

    def key(variable):
        if rows is None or cols is None or not isinstance(variable, VariableId):
            return (variable,)
        r, c = divmod(variable.qubit, cols)
        lateral = (c, r) if rows <= cols else (r, c)
        return (lateral, variable.index)

    return key


def vertical_ordering(model: GraphicalModel) -> Ordering:
    """
    Orden lexicográfico de los pares (j, k), con j a lo largo de la dimensión
    lateral más corta.
    """
    return Ordering(tuple(sorted(model.variables, key=_lateral_key(model))), "vertical")


def process_bucket(bucket: Bucket, memory_budget: Optional[int] = None,
                   step: int = 0) -> Factor:
    """
    Producto con broadcasting de los factores del bucket seguido de la suma
    sobre la variable del bucket (primer eje).

    Los ejes faltantes de cada factor se expanden virtualmente con tamaño 1;
    como las listas de variables son ascendentes basta con un reshape.
    """
    if not bucket.factors:
        raise EliminationError(f"bucket of variable {bucket.variable} is empty")

    union = sorted(set().union(*(f.variables for f in bucket.factors)))
    if union[0] != bucket.variable:
        raise EliminationError(
            f"bucket of variable {bucket.variable} holds a factor over a lower variable"
        )

    itemsize = bucket.factors[0].values.dtype.itemsize
    _check_budget(len(union), itemsize, memory_budget, step, bucket.variable)

    def expand(factor: Factor) -> np.ndarray:
        members = set(factor.variables)
        return factor.values.reshape([2 if v in members else 1 for v in union])

    product = reduce(np.multiply, (expand(f) for f in bucket.factors))
    product = np.broadcast_to(product, (2,) * len(union))
    return Factor(tuple(union[1:]), np.asarray(product.sum(axis=0)))


def _check_budget(rank: int, itemsize: int, memory_budget: Optional[int], step: int,
                  variable: Hashable = None) -> None:
    budget = memory_budget if memory_budget is not None else settings.MEMORY_BUDGET_BYTES
    required = (2 ** rank) * itemsize
    if required > budget:
        raise MemoryBudgetExceeded(
            rank=rank,
            step=step,
            required_bytes=required,
            budget_bytes=budget,
            variable=None if variable is None else str(variable),
        )


@log_execution("elimination", "bucket_eliminate")
def bucket_eliminate(model: GraphicalModel, ordering: Ordering,
                     memory_budget: Optional[int] = None) -> EliminationResult:
    """
    Evalúa el modelo por eliminación de buckets.

    Las variables libres del modelo se mueven al final (en orden estable) y no
    se eliminan: el resultado es entonces el tensor conjunto sobre ellas, con
    ejes en el orden de model.free_variables. Sin variables libres el
    resultado es un escalar complejo. Los escalares de componentes
    desconectadas se multiplican.

    Raises:
        EliminationError: Si el ordenamiento no es una permutación de las variables
        MemoryBudgetExceeded: Si un tensor intermedio excede el presupuesto
    """
    _check_permutation(ordering.variables, set(model.variables))

    free = list(model.free_variables)
    free_set = set(free)
    eliminated = [v for v in ordering.variables if v not in free_set]
    position = {v: i for i, v in enumerate(eliminated + free)}
    n_eliminated = len(eliminated)

    dtype = model.factors[0].values.dtype if model.factors else np.dtype(settings.complex_dtype)
    scalar = np.asarray(1, dtype=dtype)
    buckets = [Bucket(i) for i in range(n_eliminated)]
    final: List[Factor] = []

    def place(factor: Factor) -> None:
        nonlocal scalar
        if factor.rank == 0:
            scalar = scalar * factor.values
        elif factor.variables[0] < n_eliminated:
            buckets[factor.variables[0]].factors.append(factor)
        else:
            final.append(factor)

    for factor in model.factors:
        place(factor.relabel(position))

    step_ranks: List[int] = []
    for i, bucket in enumerate(buckets):
        if not bucket.factors:
            # Variable sin factores: la suma sobre sus dos valores es 2
            scalar = scalar * 2
            step_ranks.append(1)
            continue
        tensor = process_bucket(bucket, memory_budget=memory_budget, step=i)
        step_ranks.append(tensor.rank + 1)
        logger.debug(
            f"Eliminated {eliminated[i]} with tensor rank {tensor.rank + 1}",
            extra={"operation": "process_bucket", "step": i, "rank": tensor.rank + 1},
        )
        place(tensor)

    flops = sum(2 ** r for r in step_ranks)
    max_rank = max(step_ranks, default=0)

    if not free:
        return EliminationResult(complex(scalar), max_rank, step_ranks, flops)

    _check_budget(len(free), dtype.itemsize, memory_budget, n_eliminated)
    joint = np.full((2,) * len(free), scalar, dtype=dtype)
    for factor in final:
        members = set(factor.variables)
        shape = [2 if p in members else 1 for p in range(n_eliminated, n_eliminated + len(free))]
        joint = joint * factor.values.reshape(shape)
    return EliminationResult(Factor(tuple(free), joint), max_rank, step_ranks, flops)


def _adjacency(graph: nx.Graph) -> Dict[Hashable, Set[Hashable]]:
    return {v: set(graph.neighbors(v)) - {v} for v in graph.nodes}


def _eliminate_vertex(adjacency: Dict[Hashable, Set[Hashable]], vertex: Hashable) -> Set[Hashable]:
    """Elimina el vértice conectando a todos sus vecinos entre sí"""
    neighbors = adjacency.pop(vertex)
    for a in neighbors:
        adjacency[a].discard(vertex)
        adjacency[a].update(neighbors - {a})
    return neighbors


def simulate_elimination(graph: nx.Graph, ordering: Ordering,
                         free_variables: Sequence[Hashable] = (),
                         itemsize: Optional[int] = None) -> WidthReport:
    """
    Repite la eliminación de vértices sobre el grafo (sin tensores) y reporta
    el tamaño del clique creado en cada paso.

    Las variables libres no se eliminan. El resultado es determinista.
    """
    _check_permutation(ordering.variables, set(graph.nodes))
    itemsize = itemsize or settings.itemsize
    free_set = set(free_variables)

    adjacency = _adjacency(graph)
    step_cliques = []
    for vertex in ordering.variables:
        if vertex in free_set:
            continue
        step_cliques.append(len(_eliminate_vertex(adjacency, vertex)) + 1)

    max_clique = max(step_cliques, default=0)
    return WidthReport(
        provenance=ordering.provenance,
        ordering=[str(v) for v in ordering.variables],
        variable_count=len(ordering.variables),
        max_clique=max_clique,
        width=max(max_clique - 1, 0),
        step_cliques=step_cliques,
        peak_memory_bytes=(2 ** max_clique) * itemsize,
        flops=sum(2 ** c for c in step_cliques),
    )


def _fill_in(adjacency: Dict[Hashable, Set[Hashable]], vertex: Hashable) -> int:
    """Aristas que faltan entre los vecinos del vértice"""
    neighbors = adjacency[vertex]
    return sum(1 for a, b in combinations(neighbors, 2) if b not in adjacency[a])


def _greedy_run(graph: nx.Graph, heuristic: str, rng: np.random.Generator,
                free_variables: Sequence[Hashable]) -> List[Hashable]:
    """
    Un ordenamiento voraz: elige en cada paso un vértice de puntaje mínimo,
    desempatando al azar, y actualiza solo los puntajes afectados.
    """
    adjacency = _adjacency(graph)
    free_set = set(free_variables)

    def score(v: Hashable) -> int:
        return _fill_in(adjacency, v) if heuristic == "min_fill" else len(adjacency[v])

    scores = {v: score(v) for v in adjacency if v not in free_set}
    order: List[Hashable] = []
    while scores:
        best = min(scores.values())
        candidates = [v for v, s in scores.items() if s == best]
        vertex = candidates[int(rng.integers(len(candidates)))]
        del scores[vertex]
        neighbors = _eliminate_vertex(adjacency, vertex)
        order.append(vertex)

        affected = set(neighbors)
        if heuristic == "min_fill":
            for a in neighbors:
                affected.update(adjacency[a])
        for v in affected:
            if v in scores:
                scores[v] = score(v)

    return order + [v for v in free_variables if v in adjacency]


@log_execution("elimination", "greedy_ordering")
def greedy_ordering(graph: nx.Graph, heuristic: str = "min_fill",
                    restarts: Optional[int] = None, seed: int = 0,
                    time_budget: Optional[float] = None,
                    free_variables: Sequence[Hashable] = ()) -> Tuple[Ordering, WidthReport]:
    """
    Mejor ordenamiento entre varios reinicios de una heurística voraz.

    Args:
        graph: Grafo de interacción (no vacío)
        heuristic: "min_fill" o "min_degree"
        restarts: Número de reinicios (por defecto settings.GREEDY_RESTARTS)
        seed: Semilla maestra; cada reinicio usa una semilla derivada
        time_budget: Límite de tiempo en segundos; siempre se completa al menos un reinicio
        free_variables: Variables que se dejan al final sin eliminar

    Returns:
        (Ordering, WidthReport) del reinicio con menor (clique máximo, flops)
    """
    if heuristic not in HEURISTICS:
        raise EliminationError(f"unknown heuristic {heuristic!r}, expected one of {HEURISTICS}")
    if graph.number_of_nodes() == 0:
        raise EliminationError("cannot order an empty graph")

    restarts = restarts or settings.GREEDY_RESTARTS
    time_budget = time_budget if time_budget is not None else settings.GREEDY_TIME_BUDGET_SECONDS
    start = time.perf_counter()

    best: Optional[Tuple[Ordering, WidthReport]] = None
    for attempt, child in enumerate(np.random.SeedSequence(seed).spawn(restarts)):
        rng = np.random.default_rng(child)
        ordering = Ordering(tuple(_greedy_run(graph, heuristic, rng, free_variables)), heuristic)
        report = simulate_elimination(graph, ordering, free_variables=free_variables)
        if best is None or report.cost_key < best[1].cost_key:
            best = (ordering, report)
        if time_budget is not None and time.perf_counter() - start > time_budget:
            logger.info(
                f"Greedy ordering stopped after {attempt + 1} of {restarts} restarts",
                extra={"operation": "greedy_ordering", "width": best[1].width},
            )
            break

    return best


def build_line_graph(circuit: Circuit) -> nx.Graph:
    """
    Grafo de línea de la red de tensores del circuito.

    La red tiene un vértice por compuerta más los extremos de entrada y salida
    de cada qubit; cada tramo de cable entre dos tensores es una arista. En el
    grafo de línea cada tramo es un vértice y los tramos que comparten tensor
    forman un clique. Los vértices se renombran a enteros; el tramo original
    queda en el atributo "wire".
    """
    network = nx.MultiGraph()
    last_node = {q: ("in", q) for q in range(circuit.n)}
    network.add_nodes_from(last_node.values())

    for index, gate in enumerate(circuit.gates):
        node = ("gate", index)
        network.add_node(node, kind=gate.kind.value)
        for q in gate.qubits:
            network.add_edge(last_node[q], node, qubit=q)
            last_node[q] = node

    for q in range(circuit.n):
        network.add_edge(last_node[q], ("out", q), qubit=q)

    line_graph = nx.Graph(nx.line_graph(network))
    return nx.convert_node_labels_to_integers(line_graph, label_attribute="wire")
