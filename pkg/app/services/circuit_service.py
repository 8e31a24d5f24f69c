import logging
from typing import Dict, List, NamedTuple, Set, Tuple

import numpy as np

from app.core.errors import BucketSimError
from app.decorators.operation_logging import log_execution
from app.schemas.circuit import (
    Circuit,
    Gate,
    GateKind,
    NON_DIAGONAL_KINDS,
    cycle_violations,
)

logger = logging.getLogger(__name__)

# Secuencia fija de los 8 patrones de CZ: (orientación, desplazamiento).
# Cada orientación usa desplazamientos módulo 4 alternados por paridad de
# fila/columna; juntos cubren todas las aristas de vecinos de la grilla.
CZ_PATTERN_SEQUENCE: Tuple[Tuple[str, int], ...] = (
    ("horizontal", 0),
    ("horizontal", 2),
    ("vertical", 0),
    ("vertical", 2),
    ("horizontal", 1),
    ("horizontal", 3),
    ("vertical", 1),
    ("vertical", 3),
)

# Conjuntos para la elección aleatoria posterior a la primera T. "xy" solo
# alterna X^1/2 e Y^1/2; "xyt" incluye T en el sorteo como en el esquema de
# colocación publicado para esta familia de circuitos.
SINGLE_QUBIT_POOLS: Dict[str, Tuple[GateKind, ...]] = {
    "xy": (GateKind.XHALF, GateKind.YHALF),
    "xyt": (GateKind.XHALF, GateKind.YHALF, GateKind.T),
}


class CircuitError(BucketSimError):
    """Excepción personalizada para errores de construcción de circuitos"""

    error_code = "circuit_error"


class Worldlines(NamedTuple):
    """
    Longitudes de las líneas de mundo.

    lengths[j] = d_j, número de compuertas no diagonales sobre el qubit j.
    prefix[j, t] = d(j, t), el mismo conteo restringido a los ciclos 0..t-1.
    """
    lengths: List[int]
    prefix: np.ndarray

    def at(self, qubit: int, cycle: int) -> int:
        return int(self.prefix[qubit, cycle])


def cz_pattern(rows: int, cols: int, index: int) -> List[Tuple[int, int]]:
    """
    Pares de qubits (row-major) del patrón de CZ número `index` (0..7).
    """
    orientation, offset = CZ_PATTERN_SEQUENCE[index % len(CZ_PATTERN_SEQUENCE)]
    pairs = []
    if orientation == "horizontal":
        for r in range(rows):
            for c in range(cols - 1):
                if c % 4 == (offset + 2 * (r % 2)) % 4:
                    pairs.append((r * cols + c, r * cols + c + 1))
    else:
        for c in range(cols):
            for r in range(rows - 1):
                if r % 4 == (offset + 2 * (c % 2)) % 4:
                    pairs.append((r * cols + c, (r + 1) * cols + c))
    return sorted(pairs)


@log_execution("circuit", "generate_random_circuit")
def generate_random_circuit(rows: int, cols: int, depth: int, seed: int,
                            pool: str = "xy") -> Circuit:
    """
    Genera un circuito aleatorio sobre una grilla de rows×cols qubits.

    Reglas de colocación:
      - ciclo 0: H en todos los qubits;
      - ciclos t >= 1: el patrón de CZ (t-1) mod 8;
      - una compuerta de un qubit se coloca en el ciclo t solo si el qubit
        estuvo en un CZ en t-1 y no lo está en t;
      - la primera compuerta después de la H inicial es T;
      - después se elige uniformemente en el conjunto `pool` sin repetir la
        compuerta anterior del qubit.

    Args:
        rows: Filas de la grilla
        cols: Columnas de la grilla
        depth: Número de ciclos, contando el ciclo 0 de Hadamards
        seed: Semilla del generador
        pool: "xy" (X^1/2, Y^1/2) o "xyt" (X^1/2, Y^1/2, T)

    Returns:
        Circuit: circuito determinista para (rows, cols, depth, seed)

    Raises:
        CircuitError: Si las dimensiones o la profundidad son inválidas
    """
    if rows < 1 or cols < 1:
        raise CircuitError(f"Invalid grid dimensions {rows}x{cols}")
    if depth < 1:
        raise CircuitError(f"Depth must be >= 1, got {depth}")
    if pool not in SINGLE_QUBIT_POOLS:
        raise CircuitError(f"Unknown single-qubit pool {pool!r}")
    candidates = SINGLE_QUBIT_POOLS[pool]

    rng = np.random.default_rng(seed)
    n = rows * cols

    gates: List[Gate] = [Gate(kind=GateKind.H, cycle=0, qubits=(q,)) for q in range(n)]
    last_single: Dict[int, GateKind] = {q: GateKind.H for q in range(n)}
    previous_cz: Set[int] = set()

    for t in range(1, depth):
        pattern = cz_pattern(rows, cols, t - 1)
        in_cz = {q for pair in pattern for q in pair}
        gates.extend(Gate(kind=GateKind.CZ, cycle=t, qubits=pair) for pair in pattern)

        for q in range(n):
            if q not in previous_cz or q in in_cz:
                continue
            previous = last_single[q]
            if previous is GateKind.H:
                kind = GateKind.T
            else:
                choices = [k for k in candidates if k is not previous]
                kind = choices[int(rng.integers(len(choices)))]
            gates.append(Gate(kind=kind, cycle=t, qubits=(q,)))
            last_single[q] = kind

        previous_cz = in_cz

    circuit = Circuit(rows=rows, cols=cols, gates=tuple(gates))
    logger.info(
        f"Generated {rows}x{cols} circuit with depth {depth} and {len(gates)} gates",
        extra={"operation": "generate_random_circuit", "seed": seed},
    )
    return circuit


def worldline_lengths(circuit: Circuit) -> Worldlines:
    """
    Cuenta las compuertas no diagonales (H, X^1/2, Y^1/2) de cada qubit,
    en total y por prefijo de ciclos.
    """
    per_cycle = np.zeros((circuit.n, circuit.depth), dtype=np.int64)
    for gate in circuit.gates:
        if gate.kind in NON_DIAGONAL_KINDS:
            per_cycle[gate.qubits[0], gate.cycle] += 1

    prefix = np.zeros((circuit.n, circuit.depth + 1), dtype=np.int64)
    prefix[:, 1:] = np.cumsum(per_cycle, axis=1)
    return Worldlines(lengths=[int(v) for v in prefix[:, -1]], prefix=prefix)


def check_circuit_invariants(circuit: Circuit) -> List[str]:
    """
    Revisión exhaustiva de las invariantes por ciclo (qubits disjuntos,
    CZ entre vecinos, CZ simultáneos no adyacentes).
    """
    violations = []
    for cycle_gates in circuit.cycles:
        violations.extend(cycle_violations(cycle_gates, circuit.rows, circuit.cols))
    return violations


def check_layout_rules(circuit: Circuit, pool: str = "xy") -> List[str]:
    """
    Revisa las reglas de colocación del generador aleatorio sobre un circuito
    generado con el conjunto `pool`.
    Regresa la lista de violaciones (vacía si el circuito las cumple todas).
    """
    violations = check_circuit_invariants(circuit)
    cycles = circuit.cycles
    if not cycles:
        return violations

    h_layer = {g.qubits[0] for g in cycles[0] if g.kind is GateKind.H}
    if h_layer != set(range(circuit.n)) or len(cycles[0]) != circuit.n:
        violations.append("cycle 0 is not a full layer of H gates")

    last_single = {q: GateKind.H for q in range(circuit.n)}
    previous_cz: Set[int] = set()
    for t, cycle_gates in enumerate(cycles[1:], start=1):
        in_cz = {q for g in cycle_gates if g.kind is GateKind.CZ for q in g.qubits}
        for gate in cycle_gates:
            if gate.kind is GateKind.CZ:
                continue
            q = gate.qubits[0]
            if q not in previous_cz:
                violations.append(f"cycle {t}: gate on qubit {q} not preceded by a CZ")
            previous = last_single[q]
            if previous is GateKind.H and gate.kind is not GateKind.T:
                violations.append(f"cycle {t}: first gate on qubit {q} after H is not T")
            if previous is not GateKind.H and gate.kind not in SINGLE_QUBIT_POOLS[pool]:
                violations.append(f"cycle {t}: qubit {q} got {gate.kind.value} outside pool {pool}")
            if gate.kind is previous:
                violations.append(f"cycle {t}: qubit {q} repeats {gate.kind.value}")
            last_single[q] = gate.kind
        placed = {g.qubits[0] for g in cycle_gates if g.kind is not GateKind.CZ}
        for q in sorted(previous_cz - in_cz - placed):
            violations.append(f"cycle {t}: qubit {q} left a CZ without a single-qubit gate")
        previous_cz = in_cz

    return violations
