"""Subcomando `generate`: circuito aleatorio en formato de texto."""
import argparse

from app.commands.common import emit, positive_int
from app.core.logging_config import get_command_logger
from app.services.circuit_service import generate_random_circuit
from app.utils.circuit_parser import serialize_circuit

logger = get_command_logger("generate")


def register(subparsers) -> None:
    parser = subparsers.add_parser("generate", help="Generate a random grid circuit")
    parser.add_argument("--rows", type=positive_int, required=True)
    parser.add_argument("--cols", type=positive_int, required=True)
    parser.add_argument("--depth", type=positive_int, required=True,
                        help="Number of cycles, including the initial Hadamard layer")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--pool", choices=("xy", "xyt"), default="xy")
    parser.add_argument("--output", "-o", help="Circuit file (default: stdout)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    circuit = generate_random_circuit(args.rows, args.cols, args.depth, args.seed, pool=args.pool)
    emit(args, args.output, serialize_circuit(circuit))
    logger.info(
        f"Generated {args.rows}x{args.cols} depth-{args.depth} circuit",
        extra={"seed": args.seed},
    )
    return 0
