# app/schemas/benchmark.py
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator

EULER_GAMMA = 0.5772156649015329


class FidelityEstimate(BaseModel):
    """
    Estimación de fidelidad por entropía cruzada:
    α = (H_0 - S) / (H_0 - H(p_U)), sin recorte a [0, 1].
    """
    alpha: float
    cross_entropy: float = Field(..., description="S(p_exp, p_U) en nats")
    h0: float = Field(..., description="Entropía cruzada de una distribución no correlacionada")
    h_pu: float = Field(..., description="Entropía de la distribución ideal")
    m: int = Field(..., ge=1, description="Tamaño de la muestra")
    stderr: float = Field(..., gt=0, description="Error estándar de α")


class HistogramBin(BaseModel):
    """Bin del histograma de N·p con la densidad de referencia e^{-u}"""
    bin_lo: float
    bin_hi: float
    count: int = Field(..., ge=0)
    reference_density: float = Field(..., ge=0)


class PTStats(BaseModel):
    """Comparación de probabilidades de salida contra la ley de Porter-Thomas"""
    n: int = Field(..., ge=1)
    t: int = Field(..., ge=1, description="Número de probabilidades")
    histogram: List[HistogramBin]
    ks_distance: float = Field(..., ge=0, le=1)
    ks_pvalue: float
    entropy_estimate: float
    entropy_error: float = Field(..., ge=0, description="Error por bootstrap")
    expected_entropy: float = Field(..., description="n log 2 - 1 + γ")
    euler_gamma: float = EULER_GAMMA
    porter_thomas: Optional[bool] = Field(
        None, description="Veredicto KS; solo con suficientes probabilidades"
    )

    @field_validator("histogram")
    @classmethod
    def validate_bins(cls, v: List[HistogramBin]) -> List[HistogramBin]:
        for first, second in zip(v, v[1:]):
            if second.bin_lo < first.bin_hi - 1e-12:
                raise ValueError("histogram bins must be ascending and disjoint")
        return v

    @property
    def histogram_mass(self) -> int:
        return sum(b.count for b in self.histogram)


class XEBErrorModel(BaseModel):
    """
    Modelo de la entropía cruzada muestreada:
    H - ξ·a + ζ·b + ξζ·c con ξ, ζ normales estándar independientes.
    """
    mean: float
    xi_coefficient: float = Field(..., ge=0, description="a = √(2/t)·H")
    zeta_coefficient: float = Field(..., ge=0, description="b = √((π²/6-1)/m)")
    cross_coefficient: float = Field(..., ge=0, description="c = n²/√(2tm(π²/6-1))")
    spread: float = Field(..., ge=0, description="Desviación estándar total √(a²+b²+c²)")


class ExpectationEstimate(BaseModel):
    """Estimación Monte Carlo de un observable diagonal"""
    value: float = Field(..., description="Estimación ponderada sobre T")
    error: float = Field(..., ge=0)
    sample_value: float = Field(..., description="Estimación con la muestra S")
    sample_error: float = Field(..., ge=0)
    t: int = Field(..., ge=1)
    m: int = Field(..., ge=1)
