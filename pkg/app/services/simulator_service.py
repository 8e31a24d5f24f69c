"""
Servicio de simulación: amplitudes y probabilidades por eliminación de
variables, oráculo de vector de estado, evaluación por lotes y muestreo a
partir de un conjunto calculado.
"""
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.core.config import settings
from app.core.errors import BucketSimError, StatevectorCapExceeded
from app.core.logging_config import get_service_logger, log_evaluation
from app.core.metrics import record_amplitude
from app.decorators.operation_logging import log_execution
from app.schemas.circuit import (
    BitString,
    Circuit,
    GateKind,
    bitstring_to_index,
    format_bitstring,
    index_to_bitstring,
)
from app.schemas.elimination import WidthReport
from app.schemas.simulator import AmplitudeResult, SampleSet
from app.services.elimination_service import (
    Ordering,
    bucket_eliminate,
    greedy_ordering,
    simulate_elimination,
    vertical_ordering,
)
from app.services.model_service import GATE_MATRICES, build_model

logger = logging.getLogger(__name__)
service_logger = get_service_logger("simulator")

STRATEGIES = ("auto", "vertical", "min_fill", "min_degree")
SAMPLING_METHODS = ("elimination", "statevector")


class SimulatorError(BucketSimError):
    """Excepción personalizada para errores del simulador"""

    error_code = "simulator_error"


def _dtype(precision: Optional[str]) -> str:
    if precision is None:
        return settings.complex_dtype
    if precision not in ("single", "double"):
        raise SimulatorError(f"unknown precision {precision!r}")
    return "complex64" if precision == "single" else "complex128"


def _check_bits(circuit: Circuit, bits: Sequence[int]) -> None:
    if len(bits) != circuit.n:
        raise SimulatorError(f"bit-string has {len(bits)} bits, circuit has {circuit.n} qubits")


@log_execution("simulator", "plan_ordering")
def plan_ordering(circuit: Circuit, strategy: str = "auto", seed: int = 0,
                  free_qubits: Sequence[int] = ()) -> Tuple[Ordering, WidthReport]:
    """
    Calcula una sola vez el ordenamiento de un circuito.

    Todos los modelos con extremos totalmente fijados de un mismo circuito
    comparten la estructura del grafo, así que el plan sirve para cualquier
    cadena de salida.

    Con "auto" se usa el orden vertical si profundidad·ℓ está por debajo de
    VERTICAL_DEPTH_THRESHOLD; si no, se comparan los WidthReport predichos
    del orden vertical y de min-fill y gana el de menor (clique, flops).
    """
    if strategy not in STRATEGIES:
        raise SimulatorError(f"unknown ordering strategy {strategy!r}, expected one of {STRATEGIES}")

    output = [None if q in set(free_qubits) else 0 for q in range(circuit.n)]
    model = build_model(circuit, output=output)
    free = model.free_variables

    candidates: List[Tuple[Ordering, WidthReport]] = []
    if strategy in ("vertical", "auto"):
        ordering = vertical_ordering(model)
        candidates.append((ordering, simulate_elimination(model.graph, ordering, free)))

    use_greedy = strategy in ("min_fill", "min_degree") or (
        strategy == "auto" and circuit.depth * circuit.ell >= settings.VERTICAL_DEPTH_THRESHOLD
    )
    if use_greedy and model.graph.number_of_nodes() > 0:
        heuristic = "min_degree" if strategy == "min_degree" else "min_fill"
        candidates.append(
            greedy_ordering(model.graph, heuristic=heuristic, seed=seed, free_variables=free)
        )
    if not candidates:
        ordering = vertical_ordering(model)
        candidates.append((ordering, simulate_elimination(model.graph, ordering, free)))

    ordering, report = min(candidates, key=lambda c: c[1].cost_key)
    service_logger.info(
        f"Planned {report.provenance} ordering with width {report.width}",
        extra={"operation": "plan_ordering", "strategy": strategy, "width": report.width},
    )
    return ordering, report


def _evaluate(circuit: Circuit, bits: BitString, ordering: Ordering,
              report: WidthReport, strategy: str, memory_budget: Optional[int],
              dtype: str) -> AmplitudeResult:
    """Evaluación de una amplitud con un plan dado; propaga errores"""
    start = time.perf_counter()
    model = build_model(circuit, output=bits, dtype=dtype)
    result = bucket_eliminate(model, ordering, memory_budget=memory_budget)
    elapsed = time.perf_counter() - start
    value = complex(result.value)
    return AmplitudeResult(
        bitstring=format_bitstring(bits),
        re=value.real,
        im=value.imag,
        probability=value.real * value.real + value.imag * value.imag,
        strategy=report.provenance if strategy == "auto" else strategy,
        width=report.width,
        max_rank=result.max_rank,
        peak_memory_bytes=report.peak_memory_bytes,
        flops=result.flops,
        elapsed_seconds=elapsed,
    )


def _evaluate_safely(args) -> AmplitudeResult:
    """Versión para lotes: convierte los errores en resultados con `error`"""
    circuit, bits, ordering, report, strategy, memory_budget, dtype = args
    try:
        return _evaluate(circuit, bits, ordering, report, strategy, memory_budget, dtype)
    except BucketSimError as e:
        return AmplitudeResult(
            bitstring=format_bitstring(bits), strategy=strategy, width=report.width,
            error=str(e), error_code=e.error_code,
        )


def amplitude(circuit: Circuit, x: Sequence[int], strategy: str = "auto",
              ordering: Optional[Tuple[Ordering, WidthReport]] = None,
              memory_budget: Optional[int] = None, precision: Optional[str] = None,
              seed: int = 0) -> AmplitudeResult:
    """
    Amplitud exacta ⟨x|U|0…0⟩ por build_model + bucket_eliminate.

    Args:
        circuit: Circuito
        x: Cadena de salida (qubit 0 es el bit más significativo)
        strategy: auto | vertical | min_fill | min_degree
        ordering: Plan precalculado (Ordering, WidthReport); si falta se planea
        memory_budget: Presupuesto en bytes por tensor (por defecto la configuración)
        precision: single | double (por defecto la configuración)
        seed: Semilla de desempate de las heurísticas

    Raises:
        MemoryBudgetExceeded: Si algún tensor intermedio excede el presupuesto
    """
    bits = tuple(int(b) for b in x)
    _check_bits(circuit, bits)
    plan = ordering or plan_ordering(circuit, strategy, seed=seed)
    start = time.perf_counter()
    try:
        result = _evaluate(circuit, bits, *plan, strategy, memory_budget, _dtype(precision))
    except BucketSimError as e:
        record_amplitude(strategy, time.perf_counter() - start, success=False)
        log_evaluation(
            service_logger, "amplitude", success=False,
            bitstring=format_bitstring(bits), error_code=e.error_code,
        )
        raise
    record_amplitude(result.strategy, result.elapsed_seconds, success=True)
    return result


@log_execution("simulator", "statevector_oracle")
def statevector_oracle(circuit: Circuit, max_qubits: Optional[int] = None) -> np.ndarray:
    """
    Vector de estado completo U|0…0⟩ aplicando las compuertas ciclo por ciclo.

    El índice de cada amplitud tiene al qubit 0 como bit más significativo.

    Raises:
        StatevectorCapExceeded: Si n supera el límite configurado
    """
    cap = max_qubits if max_qubits is not None else settings.STATEVECTOR_MAX_QUBITS
    n = circuit.n
    if n > cap:
        raise StatevectorCapExceeded(f"statevector oracle limited to {cap} qubits, circuit has {n}")

    state = np.zeros((2,) * n, dtype=np.complex128)
    state[(0,) * n] = 1
    for gate in circuit.gates:
        if gate.kind is GateKind.CZ:
            a, b = gate.qubits
            index = [slice(None)] * n
            index[a], index[b] = 1, 1
            state[tuple(index)] *= -1
        else:
            q = gate.qubits[0]
            state = np.moveaxis(np.tensordot(GATE_MATRICES[gate.kind], state, axes=([1], [q])), 0, q)
    return state.reshape(-1)


@log_execution("simulator", "batch_probabilities")
def batch_probabilities(circuit: Circuit, xs: Sequence[Sequence[int]],
                        workers: Optional[int] = None, strategy: str = "auto",
                        ordering: Optional[Tuple[Ordering, WidthReport]] = None,
                        memory_budget: Optional[int] = None,
                        precision: Optional[str] = None, seed: int = 0,
                        chunksize: Optional[int] = None) -> List[AmplitudeResult]:
    """
    Evalúa muchas cadenas de salida reutilizando un único plan de ordenamiento.

    El resultado respeta el orden de entrada y es idéntico para cualquier
    número de workers. Los errores por elemento quedan en AmplitudeResult.error
    y el lote continúa.
    """
    workers = workers or settings.WORKERS
    bitstrings = [tuple(int(b) for b in x) for x in xs]
    for bits in bitstrings:
        _check_bits(circuit, bits)

    plan = ordering or plan_ordering(circuit, strategy, seed=seed)
    dtype = _dtype(precision)
    tasks = [(circuit, bits, *plan, strategy, memory_budget, dtype) for bits in bitstrings]

    if workers == 1 or len(tasks) <= 1:
        results = [_evaluate_safely(task) for task in tasks]
    else:
        chunksize = chunksize or max(1, len(tasks) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(_evaluate_safely, tasks, chunksize=chunksize))

    failures = 0
    for result in results:
        record_amplitude(result.strategy, result.elapsed_seconds, success=result.ok)
        if not result.ok:
            failures += 1
            log_evaluation(
                service_logger, "amplitude", success=False,
                bitstring=result.bitstring, error_code=result.error_code,
            )
    service_logger.info(
        f"Evaluated {len(results)} amplitudes with {workers} worker(s), {failures} failed",
        extra={"operation": "batch_probabilities", "width": plan[1].width},
    )
    return results


@log_execution("simulator", "amplitude_tensor")
def amplitude_tensor(circuit: Circuit, fixed_bits: Sequence[Optional[int]],
                     strategy: str = "auto", memory_budget: Optional[int] = None,
                     precision: Optional[str] = None, seed: int = 0) -> np.ndarray:
    """
    Tensor conjunto de amplitudes sobre los qubits de salida libres.

    fixed_bits tiene una entrada por qubit: 0/1 fija la salida y None la deja
    libre. El tensor tiene un eje por qubit libre, en orden creciente de qubit.
    """
    if len(fixed_bits) != circuit.n:
        raise SimulatorError(f"expected {circuit.n} output marks, got {len(fixed_bits)}")
    free_qubits = [q for q, b in enumerate(fixed_bits) if b is None]
    ordering, _ = plan_ordering(circuit, strategy, seed=seed, free_qubits=free_qubits)
    model = build_model(circuit, output=fixed_bits, dtype=_dtype(precision))
    result = bucket_eliminate(model, ordering, memory_budget=memory_budget)
    if not free_qubits:
        return np.asarray(result.value)
    return result.value.values


def draw_distinct(rng: np.random.Generator, n: int, t: int) -> List[BitString]:
    """t cadenas distintas uniformes; con t = 2^n se toma el cubo completo en orden"""
    total = 2 ** n
    if t > total:
        raise SimulatorError(f"cannot draw {t} distinct bit-strings of {n} bits")
    if t == total:
        return [index_to_bitstring(i, n) for i in range(total)]
    if n <= 30:
        indices = rng.choice(total, size=t, replace=False)
        return [index_to_bitstring(int(i), n) for i in indices]

    seen = set()
    drawn: List[BitString] = []
    while len(drawn) < t:
        for row in rng.integers(0, 2, size=(t - len(drawn), n)):
            bits = tuple(int(b) for b in row)
            if bits not in seen:
                seen.add(bits)
                drawn.append(bits)
    return drawn


@log_execution("simulator", "sample_outputs")
def sample_outputs(circuit: Circuit, t: int, m: int, seed: int,
                   method: str = "elimination", strategy: str = "auto",
                   workers: Optional[int] = None,
                   probabilities: Optional[np.ndarray] = None) -> SampleSet:
    """
    Muestreo desde un conjunto calculado.

    1. T = t cadenas distintas uniformes (semilla hija 0 de SeedSequence(seed)).
    2. p_U(x) para cada x de T, por eliminación o por el vector de estado.
    3. p̃(x) = p_U(x) / Σ_T p_U.
    4. S = m extracciones i.i.d. de T con p̃ (semilla hija 1).

    Args:
        probabilities: Distribución completa precalculada (solo con
            method="statevector"); evita recalcular el oráculo en repeticiones

    Raises:
        SimulatorError: Si no se cumple t >= m >= 1 o Σ_T p_U es cero
    """
    if not t >= m >= 1:
        raise SimulatorError(f"sampling needs t >= m >= 1, got t={t}, m={m}")
    if method not in SAMPLING_METHODS:
        raise SimulatorError(f"unknown sampling method {method!r}")

    n = circuit.n
    set_seed, sample_seed = np.random.SeedSequence(seed).spawn(2)
    candidates = draw_distinct(np.random.default_rng(set_seed), n, t)

    if method == "statevector":
        if probabilities is None:
            probabilities = np.abs(statevector_oracle(circuit)) ** 2
        probs = np.array([probabilities[bitstring_to_index(x)] for x in candidates])
    else:
        results = batch_probabilities(circuit, candidates, workers=workers, strategy=strategy,
                                      seed=seed)
        failed = [r for r in results if not r.ok]
        if failed:
            raise SimulatorError(f"{len(failed)} amplitude evaluations failed: {failed[0].error}")
        probs = np.array([r.probability for r in results])

    total = float(probs.sum())
    if total <= 0:
        raise SimulatorError("all probabilities in T are zero")
    normalized = probs / total

    rng = np.random.default_rng(sample_seed)
    picks = rng.choice(t, size=m, p=normalized)
    sample_probs = probs[picks]

    positive = probs[probs > 0]
    entropy_estimate = float(-(2 ** n / t) * np.sum(positive * np.log(positive)))
    cross_entropy = (
        float(-np.mean(np.log(sample_probs))) if np.all(sample_probs > 0) else None
    )

    return SampleSet(
        n=n, t=t, m=m, seed=seed, method=method,
        bitstrings=[format_bitstring(x) for x in candidates],
        probabilities=probs.tolist(),
        normalized=normalized.tolist(),
        samples=[format_bitstring(candidates[i]) for i in picks],
        sample_probabilities=sample_probs.tolist(),
        total_probability=total,
        entropy_estimate=entropy_estimate,
        cross_entropy=cross_entropy,
    )
