"""Subcomando `amplitude`: amplitudes exactas de una lista de cadenas."""
import argparse
from typing import List

import numpy as np

from app.commands.common import (
    UsageError,
    add_circuit_source,
    add_evaluation_options,
    add_output,
    build_config,
    emit,
    load_circuit,
)
from app.core.errors import EXIT_OK, EXIT_RESOURCE_BUDGET, ResourceBudgetError
from app.core.logging_config import get_command_logger
from app.schemas.circuit import BitString, index_to_bitstring, parse_bitstring
from app.schemas.run_config import derive_seeds
from app.services.elimination_service import simulate_elimination
from app.services.model_service import build_model
from app.services.simulator_service import batch_probabilities, plan_ordering
from app.utils.io_utils import (
    csv_text,
    format_ordering,
    jsonl_text,
    parse_ordering,
    read_text,
)

logger = get_command_logger("amplitude")

CSV_COLUMNS = ("bitstring", "re", "im", "prob", "width", "seconds")
RESOURCE_ERROR_CODES = {
    cls.error_code for cls in [ResourceBudgetError, *ResourceBudgetError.__subclasses__()]
}


def register(subparsers) -> None:
    parser = subparsers.add_parser("amplitude", help="Exact amplitudes by bucket elimination")
    add_circuit_source(parser)
    add_evaluation_options(parser)
    add_output(parser)
    parser.add_argument("--bitstring", "-x", action="append", default=[],
                        help="Output bit-string, qubit 0 first (repeatable)")
    parser.add_argument("--bitstrings-file", help="File with one bit-string per line")
    parser.add_argument("--random", type=int, default=0,
                        help="Add this many uniform random bit-strings")
    parser.add_argument("--all", action="store_true", help="Evaluate every bit-string")
    parser.add_argument("--ordering-file", help="Import an ordering (one j:k per line)")
    parser.add_argument("--export-ordering", help="Write the planned ordering (one j:k per line)")
    parser.add_argument("--timings", action="store_true",
                        help="Fill the seconds column (makes the output non-reproducible)")
    parser.set_defaults(handler=run)


def collect_bitstrings(args: argparse.Namespace, n: int) -> List[BitString]:
    bitstrings = [parse_bitstring(x, n) for x in args.bitstring]
    if args.bitstrings_file:
        for line in read_text(args.bitstrings_file).splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                bitstrings.append(parse_bitstring(line, n))
    if args.random:
        rng = np.random.default_rng(derive_seeds(args.seed)["bitstrings"])
        bitstrings.extend(tuple(int(b) for b in row) for row in rng.integers(0, 2, size=(args.random, n)))
    if args.all:
        bitstrings.extend(index_to_bitstring(i, n) for i in range(2 ** n))
    if not bitstrings:
        raise UsageError("no bit-strings given: use --bitstring, --bitstrings-file, --random or --all")
    return bitstrings


def run(args: argparse.Namespace) -> int:
    config = build_config(args)
    circuit = load_circuit(config)
    try:
        bitstrings = collect_bitstrings(args, circuit.n)
    except ValueError as e:
        raise UsageError(str(e))

    if args.ordering_file:
        ordering = parse_ordering(read_text(args.ordering_file))
        model = build_model(circuit, output=[0] * circuit.n)
        plan = (ordering, simulate_elimination(model.graph, ordering))
    else:
        plan = plan_ordering(circuit, config.ordering, seed=derive_seeds(args.seed)["ordering"])
    if args.export_ordering:
        emit(args, args.export_ordering, format_ordering(plan[0]))

    results = batch_probabilities(
        circuit, bitstrings, workers=config.workers, strategy=config.ordering,
        ordering=plan, memory_budget=config.memory_budget, precision=config.precision,
    )

    if config.format == "csv":
        rows = [
            (r.bitstring, r.re, r.im, r.probability, r.width,
             r.elapsed_seconds if args.timings else "")
            for r in results
        ]
        content = csv_text(CSV_COLUMNS, rows)
    else:
        exclude = set() if args.timings else {"elapsed_seconds"}
        content = jsonl_text(r.model_dump(exclude=exclude) for r in results)
    emit(args, config.output, content)

    failed = [r for r in results if not r.ok]
    if failed:
        logger.warning(f"{len(failed)} of {len(results)} amplitudes failed")
    if any(r.error_code in RESOURCE_ERROR_CODES for r in failed):
        return EXIT_RESOURCE_BUDGET
    return EXIT_OK
