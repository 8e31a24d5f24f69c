"""
Oráculo de suma de caminos tipo Ising.

La amplitud se escribe como 2^{-L/2} Σ_s exp(iπ H_s(x)/4): una función de
partición a temperatura inversa imaginaria sobre espines s_j^k = ±1, con
b = (1 - s)/2. Las fases se acumulan en unidades enteras de π/4 módulo 8:

- X^1/2 (b -> b'): 2 unidades si b = b'
- Y^1/2 (b -> b'): 4 unidades si b = 1 y b' = 0
- H (b -> b'): 4 unidades si b = b' = 1
- T: 1 unidad si b = 1
- CZ: 4 unidades si b_i = b_j = 1

Las fases constantes de las matrices X^1/2 (-1 unidad) e Y^1/2 (+1 unidad) no
dependen del camino y se acumulan aparte en `global_phase_units`.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Set, Tuple

import numpy as np

from app.core.config import settings
from app.core.errors import BucketSimError, FreeSpinCapExceeded
from app.decorators.operation_logging import log_execution
from app.schemas.circuit import Circuit, GateKind
from app.services.circuit_service import worldline_lengths

logger = logging.getLogger(__name__)

PHASE_MODULUS = 8
DEFAULT_SAMPLE_PATHS = 4096

# Fase constante (unidades de π/4) que cada compuerta aporta a todos los caminos
CONSTANT_PHASE_UNITS = {GateKind.XHALF: -1, GateKind.YHALF: 1}


class IsingError(BucketSimError):
    """Excepción personalizada para errores del modelo de Ising"""

    error_code = "ising_error"


class PhaseTerm(NamedTuple):
    """
    Término de H_s: `kind` es x, y, h, t o cz; `spins` son los pares (j, k)
    que acopla; `coefficient` está en unidades de π/4.
    """
    kind: str
    qubits: Tuple[int, ...]
    cycle: int
    spins: Tuple[Tuple[int, int], ...]
    coefficient: int


@dataclass
class IsingPhaseModel:
    """
    Modelo de fases de un circuito.

    lengths: d_j por qubit; L = Σ d_j
    prefix: d(j, t), espín activo del qubit j al inicio del ciclo t
    alpha: (n, max d) con 1 donde hay X^1/2, 0 donde hay Y^1/2 y -1 en otro caso
    h_extension: (n, max d) con True donde la transición es una H
    tau: (n, depth) con 1 donde hay una T
    z: (depth, n, n) simétrica con 1 donde hay un CZ
    """
    n: int
    depth: int
    lengths: List[int]
    prefix: np.ndarray
    alpha: np.ndarray
    h_extension: np.ndarray
    tau: np.ndarray
    z: np.ndarray
    terms: List[PhaseTerm] = field(default_factory=list)
    global_phase_units: int = 0

    @property
    def total_spins(self) -> int:
        return int(sum(self.lengths))

    @property
    def free_spins(self) -> List[Tuple[int, int]]:
        """Espines internos (ni de entrada ni de salida), con ambos extremos fijos"""
        return [(j, k) for j, d in enumerate(self.lengths) for k in range(1, d)]


@log_execution("ising", "build_ising")
def build_ising(circuit: Circuit) -> IsingPhaseModel:
    """
    Construye el modelo de fases: coeficientes por compuerta y conteos d(j, t)
    consistentes con worldline_lengths.

    Raises:
        IsingError: Si el circuito tiene una compuerta sin regla de fase
    """
    worldlines = worldline_lengths(circuit)
    lengths, prefix = worldlines.lengths, worldlines.prefix
    n, depth = circuit.n, circuit.depth
    width = max(lengths, default=0)

    alpha = np.full((n, width), -1, dtype=np.int8)
    h_extension = np.zeros((n, width), dtype=bool)
    tau = np.zeros((n, depth), dtype=np.int8)
    z = np.zeros((depth, n, n), dtype=np.int8)
    terms: List[PhaseTerm] = []
    global_units = 0

    for gate in circuit.gates:
        t = gate.cycle
        if gate.kind is GateKind.CZ:
            a, b = gate.qubits
            z[t, a, b] = z[t, b, a] = 1
            terms.append(PhaseTerm("cz", (a, b), t, ((a, int(prefix[a, t])), (b, int(prefix[b, t]))), 4))
            continue

        q = gate.qubits[0]
        k = int(prefix[q, t])
        if gate.kind is GateKind.T:
            tau[q, t] = 1
            terms.append(PhaseTerm("t", (q,), t, ((q, k),), 1))
        elif gate.kind is GateKind.XHALF:
            alpha[q, k] = 1
            terms.append(PhaseTerm("x", (q,), t, ((q, k), (q, k + 1)), 2))
        elif gate.kind is GateKind.YHALF:
            alpha[q, k] = 0
            terms.append(PhaseTerm("y", (q,), t, ((q, k), (q, k + 1)), 4))
        elif gate.kind is GateKind.H:
            h_extension[q, k] = True
            terms.append(PhaseTerm("h", (q,), t, ((q, k), (q, k + 1)), 4))
        else:
            raise IsingError(f"gate {gate.kind.value} has no phase rule")
        global_units += CONSTANT_PHASE_UNITS.get(gate.kind, 0)

    return IsingPhaseModel(
        n=n,
        depth=depth,
        lengths=lengths,
        prefix=prefix,
        alpha=alpha,
        h_extension=h_extension,
        tau=tau,
        z=z,
        terms=terms,
        global_phase_units=global_units % PHASE_MODULUS,
    )


def _term_units(term: PhaseTerm, bits: Sequence):
    """
    Unidades de fase de un término dados los bits de sus espines. Funciona
    con enteros o con arreglos (enumeración vectorizada).
    """
    if term.kind == "x":
        before, after = bits
        return term.coefficient * (1 - (before ^ after))
    if term.kind == "y":
        before, after = bits
        return term.coefficient * (before & (1 - after))
    if term.kind in ("h", "cz"):
        first, second = bits
        return term.coefficient * (first & second)
    return term.coefficient * bits[0]


def path_phase(model: IsingPhaseModel, s: Sequence[Sequence[int]], x: Sequence[int]) -> int:
    """
    H_s(x) en unidades de π/4 módulo 8 (sin la fase global constante).

    Args:
        model: Modelo de fases
        s: Espines por qubit, s[j][k] = ±1 para k = 0..d_j
        x: Cadena de salida

    Raises:
        IsingError: Si s no respeta la frontera (s_j^0 = +1, s_j^{d_j} = 1 - 2x_j)
    """
    if len(s) != model.n or len(x) != model.n:
        raise IsingError(f"expected spins and bits for {model.n} qubits")
    bits: Dict[Tuple[int, int], int] = {}
    for j, spins in enumerate(s):
        if len(spins) != model.lengths[j] + 1:
            raise IsingError(f"qubit {j} needs {model.lengths[j] + 1} spins, got {len(spins)}")
        if any(v not in (1, -1) for v in spins):
            raise IsingError(f"spins of qubit {j} must be +1 or -1")
        if spins[0] != 1:
            raise IsingError(f"boundary violation: s_{j}^0 must be +1 for the all-zero input")
        if spins[-1] != 1 - 2 * int(x[j]):
            raise IsingError(f"boundary violation: s_{j}^{model.lengths[j]} does not match x_{j}")
        for k, v in enumerate(spins):
            bits[(j, k)] = (1 - v) // 2

    units = sum(_term_units(term, [bits[spin] for spin in term.spins]) for term in model.terms)
    return int(units % PHASE_MODULUS)


def _enumerate_phase_counts(model: IsingPhaseModel, fixed_bits: Dict[Tuple[int, int], int],
                            free: List[Tuple[int, int]]) -> np.ndarray:
    """
    Cuenta de caminos por unidad de fase (0..7) sobre todas las asignaciones
    de los espines libres. Se acumula en uint8: 256 es múltiplo de 8.
    """
    column = {spin: i for i, spin in enumerate(free)}
    index = np.arange(2 ** len(free), dtype=np.uint32)

    def bit(spin):
        if spin in column:
            return ((index >> column[spin]) & 1).astype(np.uint8)
        return np.uint8(fixed_bits[spin])

    units = np.zeros(index.size, dtype=np.uint8)
    for term in model.terms:
        units += np.uint8(_term_units(term, [bit(spin) for spin in term.spins]) % PHASE_MODULUS)
    return np.bincount(units % PHASE_MODULUS, minlength=PHASE_MODULUS)


def _phase_sum(counts: np.ndarray) -> complex:
    """Σ_u counts[u] e^{iπu/4}, en orden fijo de u"""
    roots = np.exp(1j * np.pi * np.arange(PHASE_MODULUS) / 4)
    return complex(np.sum(counts.astype(np.float64) * roots))


@log_execution("ising", "partition_amplitude")
def partition_amplitude(model: IsingPhaseModel, x: Sequence[int],
                        include_global_phase: bool = True,
                        max_free_spins: Optional[int] = None) -> complex:
    """
    2^{-L/2} Σ_s exp(iπ H_s(x)/4) por fuerza bruta sobre los espines internos.

    Con include_global_phase=True se multiplica la fase constante de las
    compuertas, de modo que el resultado coincide con la amplitud de la
    eliminación; sin ella coincide salvo una fase global.

    Raises:
        FreeSpinCapExceeded: Si hay más espines libres que el límite configurado
    """
    if len(x) != model.n:
        raise IsingError(f"bit-string has {len(x)} bits, model has {model.n} qubits")
    cap = max_free_spins if max_free_spins is not None else settings.ISING_MAX_FREE_SPINS
    free = model.free_spins
    if len(free) > cap:
        raise FreeSpinCapExceeded(f"path sum has {len(free)} free spins, cap is {cap}")

    fixed_bits: Dict[Tuple[int, int], int] = {}
    for j, d in enumerate(model.lengths):
        fixed_bits[(j, 0)] = 0
        if d == 0 and int(x[j]) != 0:
            # Sin compuertas no diagonales la salida es la entrada
            return 0j
        fixed_bits[(j, d)] = int(x[j])

    counts = _enumerate_phase_counts(model, fixed_bits, free)
    value = _phase_sum(counts) * 2.0 ** (-model.total_spins / 2)
    if include_global_phase:
        value *= np.exp(1j * np.pi * model.global_phase_units / 4)
    return complex(value)


@log_execution("ising", "clifford_phase_profile")
def clifford_phase_profile(circuit: Circuit, sample_paths: int = DEFAULT_SAMPLE_PATHS,
                           seed: int = 0, max_free_spins: Optional[int] = None) -> Set[int]:
    """
    Conjunto de fases H_s (unidades de π/4, sin constante global) realizadas
    por los caminos con la entrada fija en cero y todos los demás espines
    libres, incluidas las salidas.

    Si hay más espines que el límite se evalúan `sample_paths` caminos
    aleatorios en lugar de la enumeración completa.
    """
    model = build_ising(circuit)
    free = [(j, k) for j, d in enumerate(model.lengths) for k in range(1, d + 1)]
    fixed_bits = {(j, 0): 0 for j in range(model.n)}
    cap = max_free_spins if max_free_spins is not None else settings.ISING_MAX_FREE_SPINS

    if len(free) <= cap:
        counts = _enumerate_phase_counts(model, fixed_bits, free)
        return {int(u) for u in np.nonzero(counts)[0]}

    rng = np.random.default_rng(seed)
    realized: Set[int] = set()
    for _ in range(sample_paths):
        assignment = dict(fixed_bits)
        assignment.update(zip(free, rng.integers(0, 2, size=len(free)).tolist()))
        units = sum(
            _term_units(term, [assignment[spin] for spin in term.spins]) for term in model.terms
        )
        realized.add(int(units % PHASE_MODULUS))
    logger.info(
        f"Sampled {sample_paths} of 2^{len(free)} paths for the phase profile",
        extra={"operation": "clifford_phase_profile", "seed": seed},
    )
    return realized


def coupling_list(model: IsingPhaseModel) -> List[dict]:
    """Términos del modelo como registros (tipo, qubits, ciclo, coeficiente en π/4)"""
    return [
        {
            "kind": term.kind,
            "qubits": list(term.qubits),
            "cycle": term.cycle,
            "spins": [f"{j}:{k}" for j, k in term.spins],
            "coefficient": term.coefficient,
        }
        for term in model.terms
    ]
