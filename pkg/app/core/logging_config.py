import logging
import logging.config
import json
import sys
from datetime import datetime
from typing import Dict, Any, Optional
from pathlib import Path

from app.core.config import settings

# Atributos de dominio que el formatter copia al JSON cuando están presentes
STRUCTURED_FIELDS = (
    "service",
    "operation",
    "circuit",
    "bitstring",
    "strategy",
    "width",
    "rank",
    "step",
    "elapsed_ms",
    "seed",
    "success",
    "error_code",
    "parameters",
)


class StructuredFormatter(logging.Formatter):
    """
    Formatter que genera logs en formato JSON estructurado
    para facilitar la integración con sistemas de monitoreo
    """

    def format(self, record: logging.LogRecord) -> str:
        log_entry = {
            "timestamp": datetime.fromtimestamp(record.created).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
            "process": record.process,
        }

        for field in STRUCTURED_FIELDS:
            if hasattr(record, field):
                log_entry[field] = getattr(record, field)

        if record.exc_info:
            log_entry["exception"] = self.formatException(record.exc_info)

        return json.dumps(log_entry, ensure_ascii=False, default=str)


class StderrHandler(logging.StreamHandler):
    """
    StreamHandler que resuelve sys.stderr en cada emisión, así sigue
    escribiendo aunque sys.stderr se reemplace después de configurar.
    """

    def __init__(self) -> None:
        super().__init__(sys.stderr)

    @property
    def stream(self):
        return sys.stderr

    @stream.setter
    def stream(self, value) -> None:
        pass


def setup_logging(level: Optional[str] = None, log_dir: Optional[str] = None) -> None:
    """
    Configura el sistema de logging con formato estructurado.

    La consola escribe en stderr para que stdout quede libre para los datos
    (CSV/JSON). Si hay directorio de logs se agregan archivos rotativos en JSON.

    Args:
        level: Nivel para el árbol de loggers "app" (por defecto settings.LOG_LEVEL)
        log_dir: Directorio de logs (por defecto settings.LOG_DIR; None = sin archivos)
    """
    level = (level or settings.LOG_LEVEL).upper()
    log_dir = log_dir if log_dir is not None else settings.LOG_DIR

    handlers: Dict[str, Dict[str, Any]] = {
        "console": {
            "()": StderrHandler,
            "formatter": "simple",
            "level": level,
        }
    }
    app_handlers = ["console"]

    if log_dir:
        Path(log_dir).mkdir(parents=True, exist_ok=True)
        handlers["file_all"] = {
            "class": "logging.handlers.RotatingFileHandler",
            "formatter": "structured",
            "filename": str(Path(log_dir) / "bucketsim.log"),
            "maxBytes": 10485760,  # 10MB
            "backupCount": 10,
            "level": level,
        }
        handlers["file_errors"] = {
            "class": "logging.handlers.RotatingFileHandler",
            "formatter": "structured",
            "filename": str(Path(log_dir) / "errors.log"),
            "maxBytes": 10485760,  # 10MB
            "backupCount": 10,
            "level": "ERROR",
        }
        app_handlers += ["file_all", "file_errors"]

    logging_config = {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "structured": {
                "()": StructuredFormatter,
            },
            "simple": {
                "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
                "datefmt": "%Y-%m-%d %H:%M:%S",
            },
        },
        "handlers": handlers,
        "loggers": {
            "app": {
                "level": level,
                "handlers": app_handlers,
                "propagate": False,
            },
        },
        "root": {
            "level": "WARNING",
            "handlers": ["console"],
        },
    }

    logging.config.dictConfig(logging_config)

    logger = logging.getLogger("app")
    logger.debug("Logging system initialized")
    if log_dir:
        logger.info(f"Log files will be stored in: {Path(log_dir).absolute()}")


class LoggerAdapter(logging.LoggerAdapter):
    """
    Adapter personalizado para agregar contexto adicional a los logs
    """

    def __init__(self, logger: logging.Logger, extra: Optional[Dict[str, Any]] = None):
        super().__init__(logger, extra or {})

    def process(self, msg: str, kwargs: Dict[str, Any]) -> tuple:
        if self.extra:
            merged = dict(self.extra)
            merged.update(kwargs.get("extra", {}))
            kwargs["extra"] = merged

        return msg, kwargs


def get_service_logger(service: str) -> LoggerAdapter:
    """
    Obtiene un logger para un servicio (circuit, model, elimination, ...).
    """
    base_logger = logging.getLogger(f"app.services.{service}_service")
    return LoggerAdapter(base_logger, {"service": service})


def get_command_logger(command: str) -> LoggerAdapter:
    """
    Obtiene un logger para un subcomando del CLI.
    """
    base_logger = logging.getLogger(f"app.commands.{command}")
    return LoggerAdapter(base_logger, {"service": "cli", "operation": command})


def log_evaluation(logger: logging.LoggerAdapter, operation: str, success: bool = True,
                   elapsed_ms: Optional[float] = None, **kwargs) -> None:
    """
    Registra una evaluación (amplitud, ordenamiento, oráculo) con contexto estructurado

    Args:
        logger: Logger a usar
        operation: Tipo de operación
        success: Si la operación fue exitosa
        elapsed_ms: Tiempo de ejecución en milisegundos
        **kwargs: Información adicional (bitstring, width, rank, error_code...)
    """
    extra = {
        "operation": operation,
        "success": success,
    }
    if elapsed_ms is not None:
        extra["elapsed_ms"] = round(elapsed_ms, 3)

    extra.update(kwargs)

    if success:
        logger.info(f"Operation successful: {operation}", extra=extra)
    else:
        logger.error(f"Operation failed: {operation}", extra=extra)
