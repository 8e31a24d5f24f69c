"""Subcomando `pt`: comparación de probabilidades de salida con Porter-Thomas."""
import argparse

import numpy as np

from app.commands.common import (
    UsageError,
    add_circuit_source,
    add_evaluation_options,
    build_config,
    emit,
    load_circuit,
    positive_int,
)
from app.core.config import settings
from app.core.logging_config import get_command_logger
from app.schemas.run_config import derive_seeds
from app.services.benchmark_service import pt_check
from app.services.simulator_service import (
    SimulatorError,
    batch_probabilities,
    draw_distinct,
    statevector_oracle,
)
from app.utils.io_utils import csv_text, json_text

logger = get_command_logger("pt")

HISTOGRAM_COLUMNS = ("bin_lo", "bin_hi", "count", "reference_density")


def register(subparsers) -> None:
    parser = subparsers.add_parser("pt", help="Porter-Thomas check of output probabilities")
    add_circuit_source(parser)
    add_evaluation_options(parser)
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--full", action="store_true",
                        help="Use the full distribution from the statevector oracle")
    source.add_argument("--t", type=positive_int,
                        help="Use t distinct random bit-strings evaluated by elimination")
    parser.add_argument("--bins", type=positive_int, default=50)
    parser.add_argument("--resamples", type=int, default=settings.BOOTSTRAP_RESAMPLES,
                        help="Bootstrap resamples for the entropy error (>= 100)")
    parser.add_argument("--output", "-o",
                        help="Output prefix: writes PREFIX.histogram.csv and PREFIX.stats.json "
                             "(default: stats to stdout)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = build_config(args)
    circuit = load_circuit(config)
    seeds = derive_seeds(args.seed)

    if args.full:
        probs = np.abs(statevector_oracle(circuit)) ** 2
    else:
        if args.t > 2 ** circuit.n:
            raise UsageError(f"--t ({args.t}) exceeds the {2 ** circuit.n} bit-strings of the circuit")
        bitstrings = draw_distinct(np.random.default_rng(seeds["bitstrings"]), circuit.n, args.t)
        results = batch_probabilities(
            circuit, bitstrings, workers=config.workers, strategy=config.ordering,
            memory_budget=config.memory_budget, precision=config.precision,
            seed=seeds["ordering"],
        )
        failed = [r for r in results if not r.ok]
        if failed:
            raise SimulatorError(f"{len(failed)} amplitude evaluations failed: {failed[0].error}")
        probs = np.array([r.probability for r in results])

    stats = pt_check(probs, circuit.n, bins=args.bins, resamples=config.resamples,
                     seed=seeds["bootstrap"])
    report = json_text(stats.model_dump(exclude={"histogram"}))

    if not config.output:
        emit(args, None, report)
        return 0
    emit(args, f"{config.output}.histogram.csv", csv_text(
        HISTOGRAM_COLUMNS,
        ((b.bin_lo, b.bin_hi, b.count, b.reference_density) for b in stats.histogram),
    ))
    emit(args, f"{config.output}.stats.json", report)
    return 0
