# app/core/errors.py
"""
Jerarquía base de excepciones del simulador.

Cada servicio define además su propia excepción (CircuitError, ModelError, ...)
en su módulo; aquí solo viven las que cruzan varios servicios y las que el CLI
traduce a códigos de salida.
"""
from typing import Optional

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RESOURCE_BUDGET = 3
EXIT_VERIFICATION_MISMATCH = 4


class BucketSimError(Exception):
    """Excepción raíz del proyecto"""

    error_code = "bucketsim_error"


class ResourceBudgetError(BucketSimError):
    """Se excedió un presupuesto de memoria o un límite de tamaño configurado"""

    error_code = "resource_budget"


class MemoryBudgetExceeded(ResourceBudgetError):
    """
    Un tensor intermedio de la eliminación excede el presupuesto de memoria.
    Se reporta el rango del tensor y el paso de eliminación que lo produjo.
    """

    error_code = "memory_budget_exceeded"

    def __init__(self, rank: int, step: int, required_bytes: int, budget_bytes: int,
                 variable: Optional[str] = None):
        self.rank = rank
        self.step = step
        self.required_bytes = required_bytes
        self.budget_bytes = budget_bytes
        self.variable = variable
        super().__init__(
            f"Tensor of rank {rank} at elimination step {step}"
            f"{f' (variable {variable})' if variable else ''} needs "
            f"{required_bytes} bytes, budget is {budget_bytes} bytes"
        )

    def to_dict(self) -> dict:
        return {
            "error": self.error_code,
            "rank": self.rank,
            "step": self.step,
            "variable": self.variable,
            "required_bytes": self.required_bytes,
            "budget_bytes": self.budget_bytes,
        }


class StatevectorCapExceeded(ResourceBudgetError):
    """El circuito tiene más qubits que el límite del oráculo de vector de estado"""

    error_code = "statevector_cap_exceeded"


class FreeSpinCapExceeded(ResourceBudgetError):
    """La suma de caminos de Ising tiene más espines libres que el límite"""

    error_code = "free_spin_cap_exceeded"


class VerificationMismatch(BucketSimError):
    """Dos oráculos independientes no coinciden dentro de la tolerancia"""

    error_code = "verification_mismatch"


def exit_code_for(error: BaseException) -> int:
    """
    Traduce una excepción al código de salida del CLI.
    """
    if isinstance(error, ResourceBudgetError):
        return EXIT_RESOURCE_BUDGET
    if isinstance(error, VerificationMismatch):
        return EXIT_VERIFICATION_MISMATCH
    return EXIT_USAGE
