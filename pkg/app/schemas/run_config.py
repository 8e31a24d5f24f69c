# app/schemas/run_config.py
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from app.core.config import settings


class RunConfig(BaseModel):
    """
    Parámetros de una ejecución del CLI. Exactamente una fuente de circuito:
    un archivo o los parámetros del generador (rows, cols, depth).
    """
    command: str
    circuit_path: Optional[str] = None
    rows: Optional[int] = Field(None, ge=1)
    cols: Optional[int] = Field(None, ge=1)
    depth: Optional[int] = Field(None, ge=1)
    depths: Optional[List[int]] = None
    pool: str = Field(default="xy", pattern="^(xy|xyt)$")
    seed: int = 0
    ordering: str = "auto"
    t: Optional[int] = Field(None, ge=1)
    m: Optional[int] = Field(None, ge=1)
    resamples: int = Field(default_factory=lambda: settings.BOOTSTRAP_RESAMPLES, ge=100)
    precision: str = Field(default_factory=lambda: settings.PRECISION, pattern="^(single|double)$")
    memory_budget: int = Field(default_factory=lambda: settings.MEMORY_BUDGET_BYTES, gt=0)
    workers: int = Field(default_factory=lambda: settings.WORKERS, ge=1)
    output: Optional[str] = None
    format: str = Field(default="csv", pattern="^(csv|jsonl|json)$")

    @model_validator(mode="after")
    def validate_circuit_source(self) -> "RunConfig":
        generated = self.rows is not None or self.cols is not None
        if self.circuit_path and generated:
            raise ValueError("give either a circuit file or generator parameters, not both")
        if generated and (self.rows is None or self.cols is None):
            raise ValueError("generator needs both --rows and --cols")
        if generated and self.depth is None and not self.depths:
            raise ValueError("generator needs --depth")
        if not self.circuit_path and not generated and self.command != "generate":
            raise ValueError("a circuit source is required: --circuit or --rows/--cols/--depth")
        return self

    @property
    def generated(self) -> bool:
        return self.circuit_path is None


# Consumidores de aleatoriedad derivados de la semilla maestra, en el orden
# de SeedSequence(seed).spawn(...)
SEED_CONSUMERS = ("sampling", "ordering", "bitstrings", "bootstrap")


def derive_seeds(master_seed: int) -> Dict[str, int]:
    """
    Esquema de división de semillas: el generador de circuitos usa la semilla
    maestra; cada otro consumidor usa un hijo de SeedSequence(master_seed).
    """
    children = np.random.SeedSequence(master_seed).spawn(len(SEED_CONSUMERS))
    seeds = {"circuit": master_seed}
    for name, child in zip(SEED_CONSUMERS, children):
        seeds[name] = int(child.generate_state(1)[0])
    return seeds


class OutputMetadata(BaseModel):
    """Metadatos de un archivo de datos; bastan para reproducirlo byte a byte"""
    command: str
    version: str = Field(default_factory=lambda: settings.PROJECT_VERSION)
    flags: Dict[str, Any]
    master_seed: int
    seed_split: Dict[str, int]
    data_file: str
