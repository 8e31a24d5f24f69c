"""
Servicio de benchmarking por entropía cruzada (XEB): estimación de fidelidad,
constantes de Porter-Thomas, entropías con error por bootstrap, modelo de
error del muestreo y estimación Monte Carlo de observables diagonales.
"""
import logging
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from app.core.config import settings
from app.core.errors import BucketSimError
from app.decorators.operation_logging import log_execution
from app.schemas.benchmark import (
    EULER_GAMMA,
    ExpectationEstimate,
    FidelityEstimate,
    HistogramBin,
    PTStats,
    XEBErrorModel,
)
from app.schemas.circuit import BitString, Circuit, parse_bitstring
from app.services.simulator_service import sample_outputs

logger = logging.getLogger(__name__)

# Varianza de log(N·p) bajo Porter-Thomas: π²/6 - 1
LOG_PT_VARIANCE = np.pi ** 2 / 6 - 1

KS_THRESHOLD = 0.01
KS_MIN_SAMPLES = 100_000
DEGENERATE_TOLERANCE = 1e-15


class BenchmarkError(BucketSimError):
    """Excepción personalizada para errores de benchmarking"""

    error_code = "benchmark_error"


def _as_probabilities(values: Sequence[float]) -> np.ndarray:
    probs = np.asarray(values, dtype=np.float64)
    if probs.size == 0:
        raise BenchmarkError("empty probability list")
    return probs


def cross_entropy(sample_probs: Sequence[float]) -> float:
    """
    S = -(1/m) Σ log p_U(x_j), en nats.

    Raises:
        BenchmarkError: Si alguna probabilidad es <= 0 (cadena imposible bajo p_U)
    """
    probs = _as_probabilities(sample_probs)
    if np.any(probs <= 0):
        raise BenchmarkError(
            f"{int(np.sum(probs <= 0))} sample(s) have zero probability under the ideal circuit"
        )
    return float(-np.mean(np.log(probs)))


def porter_thomas_constants(n: int) -> Tuple[float, float]:
    """
    (H_0, H_pt) para n qubits: H_0 = n log 2 + γ y H_pt = n log 2 - 1 + γ.
    """
    if n < 1:
        raise BenchmarkError(f"qubit count must be >= 1, got {n}")
    h0 = n * np.log(2) + EULER_GAMMA
    return float(h0), float(h0 - 1)


def exact_entropies(probabilities: Sequence[float]) -> Tuple[float, float]:
    """
    (H_0, H(p_U)) de una distribución completa de 2^n probabilidades:
    H_0 = -(1/N) Σ log p y H(p_U) = -Σ p log p.

    Raises:
        BenchmarkError: Si alguna probabilidad es cero (H_0 diverge)
    """
    probs = _as_probabilities(probabilities)
    if np.any(probs <= 0):
        raise BenchmarkError("H_0 diverges: the distribution has zero probabilities")
    logs = np.log(probs)
    return float(-np.mean(logs)), float(-np.sum(probs * logs))


@log_execution("benchmark", "fidelity_estimate")
def fidelity_estimate(sample_probs: Sequence[float], h0: float, h_pu: float) -> FidelityEstimate:
    """
    α = (H_0 - S) / (H_0 - H(p_U)).

    El error estándar viene del término del límite central: desviación de
    log p sobre la muestra dividida entre √m y |H_0 - H(p_U)|. Con menos de
    dos valores distintos se usa la varianza de Porter-Thomas.
    """
    denominator = h0 - h_pu
    if abs(denominator) < DEGENERATE_TOLERANCE:
        raise BenchmarkError("degenerate denominator: H_0 equals H(p_U)")

    probs = _as_probabilities(sample_probs)
    s = cross_entropy(probs)
    m = probs.size

    spread = float(np.std(np.log(probs), ddof=1)) if m > 1 else 0.0
    if spread == 0.0:
        spread = float(np.sqrt(LOG_PT_VARIANCE))
    stderr = spread / np.sqrt(m) / abs(denominator)

    return FidelityEstimate(
        alpha=(h0 - s) / denominator,
        cross_entropy=s,
        h0=h0,
        h_pu=h_pu,
        m=m,
        stderr=stderr,
    )


def bootstrap_error(values: Sequence[float], statistic: Callable[[np.ndarray], float],
                    resamples: Optional[int] = None, seed: int = 0) -> float:
    """
    Desviación estándar del estadístico sobre remuestreos con reemplazo.
    Determinista para una semilla dada.
    """
    data = np.asarray(values)
    if data.size == 0:
        raise BenchmarkError("bootstrap needs a nonempty input")
    resamples = resamples if resamples is not None else settings.BOOTSTRAP_RESAMPLES
    if resamples < 100:
        raise BenchmarkError(f"bootstrap needs at least 100 resamples, got {resamples}")

    rng = np.random.default_rng(seed)
    m = data.size
    estimates = np.array(
        [statistic(data[rng.integers(0, m, size=m)]) for _ in range(resamples)]
    )
    if np.ptp(estimates) == 0:
        return 0.0
    return float(np.std(estimates, ddof=1))


def entropy_statistic(n: int) -> Callable[[np.ndarray], float]:
    """Estadístico -(2^n/t) Σ p log p sobre un conjunto de t probabilidades"""
    scale = 2.0 ** n

    def statistic(probs: np.ndarray) -> float:
        positive = probs[probs > 0]
        return float(-(scale / probs.size) * np.sum(positive * np.log(positive)))

    return statistic


def _histogram(scaled: np.ndarray, bins: int):
    """Histograma log-espaciado de N·p; el primer borde es 0 si hay ceros"""
    positive = scaled[scaled > 0]
    if positive.size == 0:
        edges = np.array([0.0, 1.0])
    else:
        lo, hi = float(positive.min()), float(positive.max())
        if hi <= lo:
            lo, hi = lo / 2, hi * 2
        edges = np.geomspace(lo, hi, bins + 1)
        if np.any(scaled < lo):
            edges[0] = 0.0
    counts, edges = np.histogram(scaled, bins=edges)
    return counts, edges


@log_execution("benchmark", "pt_check")
def pt_check(probs: Sequence[float], n: int, bins: int = 50,
             resamples: Optional[int] = None, seed: int = 0) -> PTStats:
    """
    Compara probabilidades de salida con la ley exponencial (Porter-Thomas).

    Histograma de N·p (N = 2^n) con bins log-espaciados contra la densidad
    e^{-u}; distancia de Kolmogorov-Smirnov de N·p contra Exp(1); entropía
    -(N/t) Σ p log p con error por bootstrap. El veredicto solo se da con al
    menos 10^5 probabilidades.
    """
    values = _as_probabilities(probs)
    if bins < 1:
        raise BenchmarkError(f"bins must be >= 1, got {bins}")
    scaled = values * 2.0 ** n
    t = values.size

    counts, edges = _histogram(scaled, bins)
    histogram = []
    for count, lo, hi in zip(counts, edges[:-1], edges[1:]):
        # Densidad media de Exp(1) sobre el bin
        density = (np.exp(-lo) - np.exp(-hi)) / (hi - lo) if hi > lo else float(np.exp(-lo))
        histogram.append(
            HistogramBin(bin_lo=float(lo), bin_hi=float(hi), count=int(count),
                         reference_density=float(density))
        )

    ks = stats.kstest(scaled, "expon")
    statistic = entropy_statistic(n)
    entropy = statistic(values)
    entropy_error = bootstrap_error(values, statistic, resamples=resamples, seed=seed)
    _, expected = porter_thomas_constants(n)

    verdict = bool(ks.statistic < KS_THRESHOLD) if t >= KS_MIN_SAMPLES else None
    logger.info(
        f"Porter-Thomas check over {t} probabilities: KS={ks.statistic:.4f}, "
        f"entropy={entropy:.4f}±{entropy_error:.4f}",
        extra={"operation": "pt_check"},
    )
    return PTStats(
        n=n,
        t=t,
        histogram=histogram,
        ks_distance=float(ks.statistic),
        ks_pvalue=float(ks.pvalue),
        entropy_estimate=entropy,
        entropy_error=entropy_error,
        expected_entropy=expected,
        porter_thomas=verdict,
    )


def xeb_error_model(t: int, m: int, h: float, n: int) -> XEBErrorModel:
    """
    Modelo de la entropía cruzada muestreada desde un conjunto calculado:

        H - ξ √(2/t) H + ζ √((π²/6-1)/m) + ξζ n² / √(2tm(π²/6-1))

    con ξ, ζ normales estándar independientes. El término cruzado tiene
    varianza 1 y no se correlaciona con ξ ni con ζ, así que la dispersión
    total es la norma de los tres coeficientes.
    """
    if t < 1 or m < 1:
        raise BenchmarkError(f"t and m must be >= 1, got t={t}, m={m}")
    xi = float(np.sqrt(2 / t) * abs(h))
    zeta = float(np.sqrt(LOG_PT_VARIANCE / m))
    cross = float(n ** 2 / np.sqrt(2 * t * m * LOG_PT_VARIANCE))
    return XEBErrorModel(
        mean=h,
        xi_coefficient=xi,
        zeta_coefficient=zeta,
        cross_coefficient=cross,
        spread=float(np.sqrt(xi ** 2 + zeta ** 2 + cross ** 2)),
    )


# --- Muestreadores sintéticos de p_exp = α p_U + (1 - α) uniforme ---

def exact_sampler(probabilities: Sequence[float], m: int,
                  rng: np.random.Generator) -> np.ndarray:
    """Índices de m muestras i.i.d. de la distribución ideal completa"""
    probs = _as_probabilities(probabilities)
    return rng.choice(probs.size, size=m, p=probs / probs.sum())


def uniform_sampler(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """Índices de m muestras uniformes (distribución no correlacionada)"""
    return rng.integers(0, 2 ** n, size=m)


def mixture_sampler(probabilities: Sequence[float], alpha: float, m: int,
                    rng: np.random.Generator) -> np.ndarray:
    """Índices de m muestras de α p_U + (1 - α) uniforme"""
    if not 0 <= alpha <= 1:
        raise BenchmarkError(f"mixture weight must lie in [0, 1], got {alpha}")
    probs = _as_probabilities(probabilities)
    from_ideal = rng.random(m) < alpha
    ideal = rng.choice(probs.size, size=m, p=probs / probs.sum())
    uniform = rng.integers(0, probs.size, size=m)
    return np.where(from_ideal, ideal, uniform)


def read_measured_bitstrings(text: str, n: int) -> list:
    """
    Cadenas medidas: una por línea, validadas contra el número de qubits.
    Las líneas vacías y las que inician con '#' se ignoran.
    """
    bitstrings = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            bitstrings.append(parse_bitstring(line, n))
        except ValueError as e:
            raise BenchmarkError(f"line {number}: {e}")
    if not bitstrings:
        raise BenchmarkError("no measured bit-strings found")
    return bitstrings


@log_execution("benchmark", "expectation_mc")
def expectation_mc(circuit: Circuit, observable: Callable[[BitString], float], t: int,
                   m: int, seed: int, method: str = "elimination",
                   workers: Optional[int] = None,
                   probabilities: Optional[np.ndarray] = None) -> ExpectationEstimate:
    """
    Estimación Monte Carlo de ⟨O⟩ para un observable diagonal O(x).

    value: promedio autonormalizado sobre T con pesos p_U (error de orden
    1/√t por el método delta). sample_value: promedio simple sobre S.
    """
    sample_set = sample_outputs(circuit, t, m, seed, method=method, workers=workers,
                                probabilities=probabilities)

    def evaluate(bitstrings: Sequence[str]) -> np.ndarray:
        values = np.array([float(observable(tuple(int(c) for c in x))) for x in bitstrings])
        if not np.all(np.isfinite(values)):
            raise BenchmarkError("observable must be bounded")
        return values

    f_t = evaluate(sample_set.bitstrings)
    weights = np.asarray(sample_set.probabilities)
    total = weights.sum()
    value = float(np.sum(weights * f_t) / total)
    error = float(np.sqrt(np.sum(weights ** 2 * (f_t - value) ** 2)) / total)

    f_s = evaluate(sample_set.samples)
    sample_value = float(np.mean(f_s))
    sample_error = float(np.std(f_s, ddof=1) / np.sqrt(m)) if m > 1 else 0.0

    return ExpectationEstimate(
        value=value, error=error, sample_value=sample_value, sample_error=sample_error,
        t=t, m=m,
    )
