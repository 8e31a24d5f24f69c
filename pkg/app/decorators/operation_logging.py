# DECORADORES PARA LOGGING AUTOMÁTICO DE OPERACIONES
# Cada operación de servicio registra duración, éxito y tipo de error

import time
import functools
from typing import Any, Callable, Dict, Optional

from app.core.logging_config import get_service_logger, log_evaluation


def _sanitize_parameters(parameters: Dict[str, Any]) -> Dict[str, Any]:
    """Resume parámetros grandes (circuitos, arreglos) para no inflar los logs"""
    sanitized = {}
    for key, value in parameters.items():
        if isinstance(value, (int, float, str, bool)) or value is None:
            sanitized[key] = value
        elif hasattr(value, "__len__") and len(str(value)) > 200:
            sanitized[key] = f"[{type(value).__name__}:{len(value)}]"
        else:
            sanitized[key] = str(value)
    return sanitized


def log_execution(service_name: str, operation: Optional[str] = None):
    """
    Decorador que registra cada ejecución de una operación de servicio

    Args:
        service_name: Nombre del servicio (ej: "elimination")
        operation: Nombre de la operación (por defecto el nombre de la función)

    Usage:
        @log_execution("elimination", "greedy_ordering")
        def greedy_ordering(graph, ...):
            ...
    """
    def decorator(func: Callable) -> Callable:
        logger = get_service_logger(service_name)
        operation_name = operation or func.__name__

        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            error: Optional[BaseException] = None
            try:
                return func(*args, **kwargs)
            except Exception as e:
                error = e
                raise
            finally:
                duration_ms = (time.perf_counter() - start_time) * 1000
                if error is None:
                    logger.debug(
                        f"{operation_name} finished",
                        extra={
                            "operation": operation_name,
                            "elapsed_ms": round(duration_ms, 3),
                            "success": True,
                        },
                    )
                else:
                    log_evaluation(
                        logger,
                        operation_name,
                        success=False,
                        elapsed_ms=duration_ms,
                        error_code=getattr(error, "error_code", type(error).__name__),
                        parameters=_sanitize_parameters(kwargs),
                    )

        return wrapper

    return decorator
