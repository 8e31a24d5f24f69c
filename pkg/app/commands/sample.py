"""Subcomando `sample`: muestreo desde un conjunto T de probabilidades calculadas."""
import argparse

from app.commands.common import (
    UsageError,
    add_circuit_source,
    add_evaluation_options,
    build_config,
    emit,
    load_circuit,
    positive_int,
)
from app.core.logging_config import get_command_logger
from app.schemas.run_config import derive_seeds
from app.services.simulator_service import sample_outputs
from app.utils.io_utils import csv_text, json_text

logger = get_command_logger("sample")

SUMMARY_FIELDS = ("n", "t", "m", "seed", "method", "total_probability", "entropy_estimate", "cross_entropy")


def register(subparsers) -> None:
    parser = subparsers.add_parser("sample", help="Sample bit-strings from a computed set T")
    add_circuit_source(parser)
    add_evaluation_options(parser)
    parser.add_argument("--t", type=positive_int, required=True, help="Size of the computed set T")
    parser.add_argument("--m", type=positive_int, required=True, help="Number of samples drawn from T")
    parser.add_argument("--method", choices=("elimination", "statevector"), default="elimination")
    parser.add_argument("--output", "-o",
                        help="Output prefix: writes PREFIX.probabilities.csv, PREFIX.samples.txt "
                             "and PREFIX.summary.json (default: summary to stdout)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = build_config(args)
    if args.m > args.t:
        raise UsageError(f"--m ({args.m}) cannot exceed --t ({args.t})")
    circuit = load_circuit(config)
    if args.t > 2 ** circuit.n:
        raise UsageError(f"--t ({args.t}) exceeds the {2 ** circuit.n} bit-strings of the circuit")

    sample_set = sample_outputs(
        circuit, args.t, args.m, derive_seeds(args.seed)["sampling"],
        method=args.method, strategy=config.ordering, workers=config.workers,
    )
    summary = json_text(sample_set.model_dump(include=set(SUMMARY_FIELDS)))

    if not config.output:
        emit(args, None, summary)
        return 0

    prefix = config.output
    emit(args, f"{prefix}.probabilities.csv", csv_text(
        ("bitstring", "probability", "normalized"),
        zip(sample_set.bitstrings, sample_set.probabilities, sample_set.normalized),
    ))
    emit(args, f"{prefix}.samples.txt", "".join(f"{x}\n" for x in sample_set.samples))
    emit(args, f"{prefix}.summary.json", summary)
    logger.info(
        f"Sampled {args.m} bit-strings from a set of {args.t}",
        extra={"seed": args.seed},
    )
    return 0
