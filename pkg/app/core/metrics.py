# app/core/metrics.py
"""Métricas Prometheus de las evaluaciones de amplitudes."""
from prometheus_client import CollectorRegistry, Counter, Histogram, write_to_textfile

REGISTRY = CollectorRegistry()

AMPLITUDE_EVALUATIONS_TOTAL = Counter(
    "bucketsim_amplitude_evaluations_total",
    "Amplitudes evaluadas por eliminación de variables",
    ["strategy", "status"],
    registry=REGISTRY,
)

AMPLITUDE_SECONDS = Histogram(
    "bucketsim_amplitude_seconds",
    "Tiempo por amplitud (segundos)",
    buckets=(0.001, 0.01, 0.1, 1.0, 10.0, 60.0, 300.0, float("inf")),
    registry=REGISTRY,
)


def record_amplitude(strategy: str, seconds: float, success: bool) -> None:
    status = "ok" if success else "error"
    AMPLITUDE_EVALUATIONS_TOTAL.labels(strategy=strategy, status=status).inc()
    if success:
        AMPLITUDE_SECONDS.observe(seconds)


def write_metrics(path: str) -> None:
    """Escribe el registro en formato de texto para el textfile collector."""
    write_to_textfile(path, REGISTRY)
