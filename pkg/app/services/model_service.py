"""
Servicio de modelos gráficos: traduce un circuito con condiciones de frontera
a un modelo gráfico complejo no dirigido (variables b_j^k, factores ψ y grafo
de interacción).
"""
import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import (
    Callable,
    Dict,
    Hashable,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
)

import networkx as nx
import numpy as np

from app.core.config import settings
from app.core.errors import BucketSimError
from app.decorators.operation_logging import log_execution
from app.schemas.circuit import Circuit, Gate, GateKind

logger = logging.getLogger(__name__)

UNITARY_TOLERANCE = 1e-10

_SQRT_HALF = 1 / np.sqrt(2)

GATE_MATRICES: Dict[GateKind, np.ndarray] = {
    GateKind.H: _SQRT_HALF * np.array([[1, 1], [1, -1]], dtype=np.complex128),
    GateKind.XHALF: 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=np.complex128),
    GateKind.YHALF: 0.5 * np.array([[1 + 1j, -1 - 1j], [1 + 1j, 1 + 1j]], dtype=np.complex128),
    GateKind.T: np.diag([1, np.exp(1j * np.pi / 4)]).astype(np.complex128),
    GateKind.CZ: np.diag([1, 1, 1, -1]).astype(np.complex128),
}


class ModelError(BucketSimError):
    """Excepción personalizada para errores de construcción del modelo gráfico"""

    error_code = "model_error"


class VariableId(NamedTuple):
    """Variable b_j^k: qubit j, índice k sobre la línea de mundo"""
    qubit: int
    index: int

    def __str__(self) -> str:
        return f"{self.qubit}:{self.index}"

    @classmethod
    def parse(cls, text: str) -> "VariableId":
        try:
            qubit, index = text.strip().split(":")
            return cls(int(qubit), int(index))
        except ValueError:
            raise ModelError(f"invalid variable id {text!r}, expected 'j:k'")


@dataclass(frozen=True, eq=False)
class Factor:
    """
    Función compleja sobre un conjunto ordenado de variables booleanas.

    values tiene forma (2,)*rank y sus ejes siguen el orden de `variables`
    (el primer eje es la variable más significativa). Un factor de rango 0
    es un escalar.
    """
    variables: Tuple[Hashable, ...]
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (2,) * len(self.variables):
            raise ModelError(
                f"factor table shape {self.values.shape} does not match "
                f"{len(self.variables)} variables"
            )
        if len(set(self.variables)) != len(self.variables):
            raise ModelError(f"repeated variable in factor {self.variables}")

    @classmethod
    def create(cls, variables: Sequence[Hashable], values,
               key: Optional[Callable[[Hashable], object]] = None) -> "Factor":
        """
        Construye un factor reordenando los ejes para que las variables queden
        en orden ascendente (según `key`, por defecto el orden natural).
        """
        values = np.asarray(values)
        variables = tuple(variables)
        sort_key = key or (lambda v: v)
        order = sorted(range(len(variables)), key=lambda i: sort_key(variables[i]))
        if values.ndim:
            values = np.transpose(values, order)
        return cls(tuple(variables[i] for i in order), values)

    @classmethod
    def scalar(cls, value: complex, dtype=None) -> "Factor":
        return cls((), np.asarray(value, dtype=dtype or settings.complex_dtype))

    @property
    def rank(self) -> int:
        return len(self.variables)

    def fix(self, assignment: Mapping[Hashable, int]) -> "Factor":
        """Sustituye las variables fijadas por su valor (rebanado de la tabla)"""
        if not any(v in assignment for v in self.variables):
            return self
        index = tuple(
            assignment[v] if v in assignment else slice(None) for v in self.variables
        )
        remaining = tuple(v for v in self.variables if v not in assignment)
        return Factor(remaining, np.asarray(self.values[index]))

    def relabel(self, mapping: Mapping[Hashable, Hashable]) -> "Factor":
        return Factor.create([mapping[v] for v in self.variables], self.values)


@dataclass(eq=False)
class GraphicalModel:
    """
    Modelo gráfico complejo no dirigido.

    variables: variables no fijadas, en orden ascendente
    factors: lista de factores (pueden incluir escalares de rango 0)
    graph: adyacencia inducida por los factores (un clique por factor)
    fixed: variables sustituidas por su valor de frontera
    free_variables: variables de salida libres (no se eliminan)
    """
    variables: Tuple[Hashable, ...]
    factors: List[Factor]
    graph: nx.Graph
    fixed: Dict[Hashable, int] = field(default_factory=dict)
    free_variables: Tuple[Hashable, ...] = ()
    rows: Optional[int] = None
    cols: Optional[int] = None

    @classmethod
    def from_factors(cls, factors: Sequence[Factor],
                     free_variables: Sequence[Hashable] = (),
                     extra_variables: Sequence[Hashable] = (),
                     fixed: Optional[Dict[Hashable, int]] = None,
                     rows: Optional[int] = None,
                     cols: Optional[int] = None) -> "GraphicalModel":
        variables = set(extra_variables) | set(free_variables)
        for factor in factors:
            variables.update(factor.variables)

        graph = nx.Graph()
        graph.add_nodes_from(sorted(variables))
        for factor in factors:
            graph.add_edges_from(combinations(factor.variables, 2))

        return cls(
            variables=tuple(sorted(variables)),
            factors=list(factors),
            graph=graph,
            fixed=dict(fixed or {}),
            free_variables=tuple(free_variables),
            rows=rows,
            cols=cols,
        )

    @property
    def variable_count(self) -> int:
        return len(self.variables)

    def edge_list(self) -> List[Tuple[Hashable, Hashable]]:
        return sorted(tuple(sorted(edge)) for edge in self.graph.edges())


def gate_factor(gate: Gate, variables: Sequence[Hashable], dtype=None) -> Factor:
    """
    Factor ψ de una compuerta sobre sus variables incidentes.

    - Compuerta no diagonal de un qubit: variables (b, b'), ψ(b, b') = U[b', b]
    - Compuerta diagonal de un qubit: variable (b,), ψ(b) = U[b, b]
    - CZ: variables (b_i, b_j), ψ(b_i, b_j) = CZ[(b_i b_j), (b_i b_j)]

    Raises:
        ModelError: Si la compuerta es desconocida o las variables no corresponden
    """
    matrix = GATE_MATRICES.get(gate.kind)
    if matrix is None:
        raise ModelError(f"unknown gate kind {gate.kind!r}")

    expected = 1 if gate.kind is GateKind.T else 2
    if len(variables) != expected:
        raise ModelError(
            f"gate {gate.kind.value} takes {expected} variable(s), got {len(variables)}"
        )

    if gate.kind is GateKind.CZ:
        table = np.diag(matrix).reshape(2, 2)
    elif gate.kind.is_diagonal:
        table = np.diag(matrix)
    else:
        table = matrix.T

    return Factor.create(variables, table.astype(dtype or settings.complex_dtype))


def check_unitary(matrix: np.ndarray, tolerance: float = UNITARY_TOLERANCE) -> None:
    deviation = np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0])))
    if deviation > tolerance:
        raise ModelError(f"matrix is not unitary (deviation {deviation:.3e})")


def nondiagonal_two_qubit_factor(matrix, variables: Sequence[Hashable],
                                 dtype=None) -> Factor:
    """
    Factor de rango 4 de una compuerta genérica de dos qubits.

    variables = (b0, b1, b0', b1') con (b0, b1) las variables de entrada y
    (b0', b1') las nuevas. ψ(b0, b1, b0', b1') = U[(b0' b1'), (b0 b1)].
    """
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.shape != (4, 4):
        raise ModelError(f"two-qubit gate must be 4x4, got {matrix.shape}")
    if len(variables) != 4:
        raise ModelError(f"two-qubit factor takes 4 variables, got {len(variables)}")
    check_unitary(matrix)

    table = matrix.reshape(2, 2, 2, 2).transpose(2, 3, 0, 1)
    return Factor.create(variables, table.astype(dtype or settings.complex_dtype))


def _endpoint_bits(bits: Optional[Sequence[Optional[int]]], n: int,
                   name: str) -> List[Optional[int]]:
    """Normaliza una condición de frontera: None = todos libres"""
    if bits is None:
        return [None] * n
    bits = list(bits)
    if len(bits) != n:
        raise ModelError(f"{name} has {len(bits)} entries, circuit has {n} qubits")
    for b in bits:
        if b not in (0, 1, None):
            raise ModelError(f"{name} entries must be 0, 1 or free, got {b!r}")
    return [None if b is None else int(b) for b in bits]


@log_execution("model", "build_model")
def build_model(circuit: Circuit,
                output: Optional[Sequence[Optional[int]]] = None,
                input: Optional[Sequence[Optional[int]]] = (),
                overrides: Optional[Mapping[int, np.ndarray]] = None,
                dtype=None) -> GraphicalModel:
    """
    Construye el modelo gráfico de ⟨output|U|input⟩.

    Args:
        circuit: Circuito
        output: Bits de salida; None (o entradas None) marca qubits libres
        input: Bits de entrada; por defecto todo cero, None = entradas libres
        overrides: Índice de compuerta de dos qubits -> matriz 4x4 genérica
        dtype: dtype complejo de las tablas (por defecto según PRECISION)

    Returns:
        GraphicalModel: Variables fijadas sustituidas en las tablas y removidas
    """
    dtype = dtype or settings.complex_dtype
    n = circuit.n
    if input is not None and len(input) == 0:
        input = [0] * n
    input_bits = _endpoint_bits(input, n, "input")
    output_bits = _endpoint_bits(output, n, "output")
    overrides = dict(overrides or {})

    for index in overrides:
        if not 0 <= index < len(circuit.gates) or circuit.gates[index].kind.arity != 2:
            raise ModelError(f"override index {index} is not a two-qubit gate")

    current = [0] * n
    created: List[VariableId] = [VariableId(j, 0) for j in range(n)]
    factors: List[Factor] = []

    for gate_index, gate in enumerate(circuit.gates):
        if gate_index in overrides:
            a, b = gate.qubits
            new_a, new_b = VariableId(a, current[a] + 1), VariableId(b, current[b] + 1)
            factors.append(
                nondiagonal_two_qubit_factor(
                    overrides[gate_index],
                    (VariableId(a, current[a]), VariableId(b, current[b]), new_a, new_b),
                    dtype=dtype,
                )
            )
            created.extend([new_a, new_b])
            current[a] += 1
            current[b] += 1
        elif gate.kind is GateKind.CZ:
            a, b = gate.qubits
            factors.append(
                gate_factor(gate, (VariableId(a, current[a]), VariableId(b, current[b])), dtype)
            )
        elif gate.kind.is_diagonal:
            q = gate.qubits[0]
            factors.append(gate_factor(gate, (VariableId(q, current[q]),), dtype))
        else:
            q = gate.qubits[0]
            new = VariableId(q, current[q] + 1)
            factors.append(gate_factor(gate, (VariableId(q, current[q]), new), dtype))
            created.append(new)
            current[q] += 1

    fixed: Dict[VariableId, int] = {}
    free_outputs: List[VariableId] = []
    for j in range(n):
        first, last = VariableId(j, 0), VariableId(j, current[j])
        if input_bits[j] is not None:
            fixed[first] = input_bits[j]
        if output_bits[j] is None:
            free_outputs.append(last)
            if last in fixed:
                # Línea de mundo vacía con entrada fija: la salida libre queda
                # restringida por una delta
                delta = np.zeros(2, dtype=dtype)
                delta[fixed.pop(last)] = 1
                factors.append(Factor((last,), delta))
        elif last in fixed and fixed[last] != output_bits[j]:
            factors.append(Factor.scalar(0, dtype))
        else:
            fixed[last] = output_bits[j]

    factors = [factor.fix(fixed) for factor in factors]
    model = GraphicalModel.from_factors(
        factors,
        free_variables=free_outputs,
        extra_variables=[v for v in created if v not in fixed],
        fixed=fixed,
        rows=circuit.rows,
        cols=circuit.cols,
    )
    logger.debug(
        f"Built model with {model.variable_count} variables, {len(factors)} factors "
        f"and {model.graph.number_of_edges()} edges",
        extra={"operation": "build_model"},
    )
    return model
