# app/core/config.py
from typing import Optional

import numpy as np
from pydantic import Field, computed_field
from pydantic_settings import BaseSettings, SettingsConfigDict

GIB = 1024 ** 3


class Settings(BaseSettings):
    """
    Gestiona la configuración de la aplicación cargando variables de entorno.
    Utiliza Pydantic para la validación de tipos.
    """
    model_config = SettingsConfigDict(
        env_file=".env", env_ignore_case=True, extra="ignore"
    )

    PROJECT_VERSION: str = "0.1.0"

    # --- Presupuestos de recursos ---
    MEMORY_BUDGET_BYTES: int = Field(default=8 * GIB, gt=0)
    STATEVECTOR_MAX_QUBITS: int = Field(default=26, ge=1)
    ISING_MAX_FREE_SPINS: int = Field(default=24, ge=0)

    # --- Precisión numérica: "single" (complex64) o "double" (complex128) ---
    PRECISION: str = Field(default="double", pattern="^(single|double)$")

    # --- Ordenamientos de eliminación ---
    VERTICAL_DEPTH_THRESHOLD: int = 40  # d·ℓ por debajo del cual se usa el orden vertical
    GREEDY_RESTARTS: int = Field(default=8, ge=1)
    GREEDY_TIME_BUDGET_SECONDS: Optional[float] = None

    # --- Paralelismo y estadística ---
    WORKERS: int = Field(default=1, ge=1)
    BOOTSTRAP_RESAMPLES: int = Field(default=1000, ge=100)

    # --- Logging ---
    LOG_LEVEL: str = "INFO"
    LOG_DIR: Optional[str] = None

    @computed_field
    @property
    def complex_dtype(self) -> str:
        """
        Nombre del dtype complejo de numpy correspondiente a PRECISION.
        """
        return "complex64" if self.PRECISION == "single" else "complex128"

    @property
    def itemsize(self) -> int:
        return np.dtype(self.complex_dtype).itemsize


# Instancia única de la configuración que será usada en toda la aplicación.
settings = Settings()
