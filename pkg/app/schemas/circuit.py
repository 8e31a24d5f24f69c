# app/schemas/circuit.py
from enum import Enum
from itertools import combinations
from typing import Dict, List, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class GateKind(str, Enum):
    """
    Conjunto de compuertas soportado. El valor es el nombre usado en el
    formato de texto de circuitos.
    """
    H = "h"
    XHALF = "x_1_2"
    YHALF = "y_1_2"
    T = "t"
    CZ = "cz"

    @property
    def arity(self) -> int:
        return 2 if self is GateKind.CZ else 1

    @property
    def is_diagonal(self) -> bool:
        return self in (GateKind.T, GateKind.CZ)


NON_DIAGONAL_KINDS = (GateKind.H, GateKind.XHALF, GateKind.YHALF)


def qubit_position(qubit: int, cols: int) -> Tuple[int, int]:
    """(fila, columna) de un qubit con índice row-major"""
    return divmod(qubit, cols)


def are_grid_neighbors(a: int, b: int, cols: int) -> bool:
    (ra, ca), (rb, cb) = qubit_position(a, cols), qubit_position(b, cols)
    return abs(ra - rb) + abs(ca - cb) == 1


class Gate(BaseModel):
    """Una compuerta aplicada en un ciclo de reloj"""
    model_config = ConfigDict(frozen=True)

    kind: GateKind
    cycle: int = Field(..., ge=0, description="Índice del ciclo de reloj t")
    qubits: Tuple[int, ...]

    @model_validator(mode="after")
    def validate_arity(self) -> "Gate":
        if len(self.qubits) != self.kind.arity:
            raise ValueError(
                f"gate {self.kind.value} expects {self.kind.arity} qubit(s), "
                f"got {len(self.qubits)}"
            )
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"gate {self.kind.value} acts twice on qubit {self.qubits[0]}")
        return self

    @property
    def sort_key(self) -> Tuple[int, int]:
        return (self.cycle, min(self.qubits))


def cycle_violations(gates: Sequence[Gate], rows: int, cols: int) -> List[str]:
    """
    Verifica las invariantes de un conjunto de compuertas del mismo ciclo
    y de la grilla. Regresa la lista de violaciones (vacía si es válido).
    """
    n = rows * cols
    violations = []
    used: Dict[int, Gate] = {}
    cz_gates = []

    for gate in gates:
        for q in gate.qubits:
            if not 0 <= q < n:
                violations.append(f"qubit {q} out of range for {rows}x{cols} grid")
                continue
            if q in used:
                violations.append(f"qubit {q} used twice in cycle {gate.cycle}")
            used[q] = gate
        if gate.kind is GateKind.CZ:
            a, b = gate.qubits
            if 0 <= a < n and 0 <= b < n and not are_grid_neighbors(a, b, cols):
                violations.append(f"cz {a} {b} acts on qubits that are not grid neighbors")
            cz_gates.append(gate)

    # Dos CZ simultáneos no pueden tocar qubits vecinos
    for first, second in combinations(cz_gates, 2):
        if any(
            are_grid_neighbors(a, b, cols) for a in first.qubits for b in second.qubits
        ):
            violations.append(
                f"cz {first.qubits} and cz {second.qubits} are adjacent in cycle {first.cycle}"
            )

    return violations


class Circuit(BaseModel):
    """
    Circuito sobre una grilla de R×C qubits, con compuertas agrupadas por ciclo.
    Inmutable: se puede compartir entre tareas concurrentes.
    """
    model_config = ConfigDict(frozen=True)

    rows: int = Field(..., ge=1)
    cols: int = Field(..., ge=1)
    gates: Tuple[Gate, ...] = ()

    @field_validator("gates")
    @classmethod
    def sort_gates(cls, v: Tuple[Gate, ...]) -> Tuple[Gate, ...]:
        """Forma canónica: compuertas ordenadas por (ciclo, qubit menor)"""
        return tuple(sorted(v, key=lambda g: g.sort_key))

    @model_validator(mode="after")
    def validate_cycles(self) -> "Circuit":
        violations = []
        for cycle_gates in self.cycles:
            violations.extend(cycle_violations(cycle_gates, self.rows, self.cols))
        if violations:
            raise ValueError("; ".join(violations))
        return self

    @property
    def n(self) -> int:
        return self.rows * self.cols

    @property
    def ell(self) -> int:
        return min(self.rows, self.cols)

    @property
    def depth(self) -> int:
        """Número de ciclos, contando el ciclo 0"""
        return self.gates[-1].cycle + 1 if self.gates else 0

    @property
    def cycles(self) -> List[List[Gate]]:
        grouped: List[List[Gate]] = [[] for _ in range(self.depth)]
        for gate in self.gates:
            grouped[gate.cycle].append(gate)
        return grouped


# --- Bit-strings: tuplas de 0/1, qubit 0 es el bit más significativo ---

BitString = Tuple[int, ...]


def parse_bitstring(text: str, n: int) -> BitString:
    text = text.strip()
    if len(text) != n or any(c not in "01" for c in text):
        raise ValueError(f"bit-string {text!r} is not a string of {n} bits")
    return tuple(int(c) for c in text)


def format_bitstring(bits: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in bits)


def bitstring_to_index(bits: Sequence[int]) -> int:
    index = 0
    for b in bits:
        index = (index << 1) | int(b)
    return index


def index_to_bitstring(index: int, n: int) -> BitString:
    return tuple((index >> (n - 1 - j)) & 1 for j in range(n))
