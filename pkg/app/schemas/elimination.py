# app/schemas/elimination.py
from typing import List

from pydantic import BaseModel, Field, model_validator


class WidthReport(BaseModel):
    """
    Resultado de simular la eliminación de vértices con un ordenamiento.

    max_clique es el clique más grande creado durante la eliminación (tamaño
    del tensor intermedio más grande); width = max_clique - 1 es el ancho
    inducido en la convención habitual.
    """
    provenance: str = Field(..., description="vertical | min_fill | min_degree | external")
    ordering: List[str] = Field(default_factory=list, description="Variables en orden de eliminación")
    variable_count: int = Field(..., ge=0)
    max_clique: int = Field(..., ge=0)
    width: int = Field(..., ge=0)
    step_cliques: List[int] = Field(default_factory=list)
    peak_memory_bytes: int = Field(..., ge=0)
    flops: int = Field(..., ge=0, description="Estimación de multiplicaciones-sumas: Σ 2^clique")

    @model_validator(mode="after")
    def validate_width(self) -> "WidthReport":
        if self.width != max(self.max_clique - 1, 0):
            raise ValueError("width must equal max_clique - 1")
        if self.step_cliques and self.max_clique != max(self.step_cliques):
            raise ValueError("max_clique must be the largest step clique")
        return self

    @property
    def cost_key(self):
        """Clave de comparación entre ordenamientos: (clique máximo, flops)"""
        return (self.max_clique, self.flops)
