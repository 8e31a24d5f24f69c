# app/schemas/simulator.py
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator

PROBABILITY_TOLERANCE = 1e-9


class AmplitudeResult(BaseModel):
    """
    Amplitud ⟨x|U|0…0⟩ de una cadena de salida, con estadísticas de la
    eliminación. Si la evaluación falló, `error` trae el mensaje y los campos
    numéricos quedan en None.
    """
    bitstring: str
    re: Optional[float] = None
    im: Optional[float] = None
    probability: Optional[float] = None
    strategy: str = "auto"
    width: Optional[int] = None
    max_rank: Optional[int] = None
    peak_memory_bytes: Optional[int] = None
    flops: Optional[int] = None
    elapsed_seconds: float = Field(default=0.0, ge=0)
    error: Optional[str] = None
    error_code: Optional[str] = None

    @model_validator(mode="after")
    def validate_probability(self) -> "AmplitudeResult":
        if self.error is not None:
            return self
        if self.re is None or self.im is None or self.probability is None:
            raise ValueError("successful results need re, im and probability")
        expected = self.re ** 2 + self.im ** 2
        if abs(self.probability - expected) > PROBABILITY_TOLERANCE:
            raise ValueError("probability must be the squared modulus of the amplitude")
        if not -PROBABILITY_TOLERANCE <= self.probability <= 1 + PROBABILITY_TOLERANCE:
            raise ValueError(f"probability {self.probability} outside [0, 1]")
        return self

    @property
    def amplitude(self) -> Optional[complex]:
        if self.re is None or self.im is None:
            return None
        return complex(self.re, self.im)

    @property
    def ok(self) -> bool:
        return self.error is None


class SampleSet(BaseModel):
    """
    Conjunto T de cadenas distintas con sus probabilidades ideales y la
    muestra S extraída de T con las probabilidades normalizadas.
    """
    n: int = Field(..., ge=1)
    t: int = Field(..., ge=1)
    m: int = Field(..., ge=1)
    seed: int
    method: str = Field(..., pattern="^(elimination|statevector)$")
    bitstrings: List[str] = Field(..., description="Conjunto T")
    probabilities: List[float] = Field(..., description="p_U(x) para cada x de T")
    normalized: List[float] = Field(..., description="p_U(x) / Σ_T p_U")
    samples: List[str] = Field(..., description="Muestra S de tamaño m")
    sample_probabilities: List[float] = Field(..., description="p_U de cada elemento de S")
    total_probability: float = Field(..., description="Σ_T p_U, para diagnóstico")
    entropy_estimate: float = Field(..., description="-(2^n/t) Σ_T p log p")
    cross_entropy: Optional[float] = Field(
        None, description="-(1/m) Σ_S log p_U; None si alguna probabilidad es cero"
    )

    @model_validator(mode="after")
    def validate_sizes(self) -> "SampleSet":
        if len(self.bitstrings) != self.t or len(set(self.bitstrings)) != self.t:
            raise ValueError("T must hold t distinct bit-strings")
        if len(self.samples) != self.m:
            raise ValueError("S must hold m samples")
        return self
