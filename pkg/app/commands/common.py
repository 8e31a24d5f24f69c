"""
Opciones y utilidades compartidas por los subcomandos del CLI.
"""
import argparse
from typing import Any, Dict, Optional

from pydantic import ValidationError

from app.core.config import settings
from app.core.errors import BucketSimError
from app.schemas.circuit import Circuit
from app.schemas.run_config import OutputMetadata, RunConfig, derive_seeds
from app.services.circuit_service import generate_random_circuit
from app.utils.circuit_parser import parse_circuit
from app.utils.io_utils import read_text, write_metadata, write_text

ORDERING_ALIASES = {
    "auto": "auto",
    "vertical": "vertical",
    "min_fill": "min_fill",
    "minfill": "min_fill",
    "min_degree": "min_degree",
    "mindegree": "min_degree",
}


class UsageError(BucketSimError):
    """Argumentos inválidos o inconsistentes"""

    error_code = "usage_error"


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if value < 1:
        raise argparse.ArgumentTypeError(f"{value} must be >= 1")
    return value


def ordering_name(text: str) -> str:
    name = ORDERING_ALIASES.get(text.lower())
    if name is None:
        raise argparse.ArgumentTypeError(
            f"unknown ordering {text!r}, expected one of {sorted(ORDERING_ALIASES)}"
        )
    return name


def add_circuit_source(parser: argparse.ArgumentParser, with_depth: bool = True) -> None:
    group = parser.add_argument_group("circuit source")
    group.add_argument("--circuit", dest="circuit_path", help="Circuit text file")
    group.add_argument("--rows", type=positive_int, help="Generator grid rows")
    group.add_argument("--cols", type=positive_int, help="Generator grid columns")
    if with_depth:
        group.add_argument("--depth", type=positive_int, help="Generator depth (cycles, including cycle 0)")
    group.add_argument("--pool", choices=("xy", "xyt"), default="xy",
                       help="Single-qubit pool after the first T")
    parser.add_argument("--seed", type=int, default=0, help="Master seed")


def add_evaluation_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--ordering", type=ordering_name, default="auto",
                        help="auto | vertical | min_fill | min_degree")
    parser.add_argument("--workers", type=positive_int, default=settings.WORKERS)
    parser.add_argument("--precision", choices=("single", "double"), default=settings.PRECISION)
    parser.add_argument("--memory-budget", type=positive_int, default=settings.MEMORY_BUDGET_BYTES,
                        help="Bytes per intermediate tensor (default from MEMORY_BUDGET_BYTES)")


def add_output(parser: argparse.ArgumentParser, formats=("csv", "jsonl")) -> None:
    parser.add_argument("--output", "-o", help="Output file (default: stdout)")
    parser.add_argument("--format", choices=formats, default=formats[0])


def build_config(args: argparse.Namespace) -> RunConfig:
    fields = {name: getattr(args, name) for name in RunConfig.model_fields if hasattr(args, name)}
    fields["command"] = args.command
    try:
        return RunConfig(**{k: v for k, v in fields.items() if v is not None})
    except ValidationError as e:
        raise UsageError(e.errors()[0]["msg"])


def load_circuit(config: RunConfig, depth: Optional[int] = None) -> Circuit:
    """Lee el circuito del archivo o lo genera con la semilla maestra"""
    if config.circuit_path:
        return parse_circuit(read_text(config.circuit_path))
    return generate_random_circuit(
        config.rows, config.cols, depth or config.depth, config.seed, pool=config.pool
    )


def flags_of(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        key: value for key, value in sorted(vars(args).items())
        if key != "handler" and isinstance(value, (str, int, float, bool, list, type(None)))
    }


def emit(args: argparse.Namespace, path: Optional[str], content: str) -> None:
    """Escribe un archivo de datos con su sidecar de metadatos"""
    write_text(path, content)
    if path:
        write_metadata(path, OutputMetadata(
            command=args.command,
            flags=flags_of(args),
            master_seed=args.seed,
            seed_split=derive_seeds(args.seed),
            data_file=path,
        ))
