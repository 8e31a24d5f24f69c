"""Subcomando `xeb`: estimación de fidelidad a partir de cadenas medidas."""
import argparse

import numpy as np

from app.commands.common import (
    add_circuit_source,
    add_evaluation_options,
    build_config,
    emit,
    load_circuit,
)
from app.core.config import settings
from app.core.logging_config import get_command_logger
from app.schemas.circuit import bitstring_to_index
from app.services.benchmark_service import (
    BenchmarkError,
    exact_entropies,
    fidelity_estimate,
    porter_thomas_constants,
    read_measured_bitstrings,
)
from app.services.simulator_service import SimulatorError, batch_probabilities, statevector_oracle
from app.utils.io_utils import json_text, read_text

logger = get_command_logger("xeb")


def register(subparsers) -> None:
    parser = subparsers.add_parser("xeb", help="Cross-entropy fidelity estimate from measured bit-strings")
    add_circuit_source(parser)
    add_evaluation_options(parser)
    parser.add_argument("--samples", required=True, help="Measured bit-strings, one per line")
    parser.add_argument("--entropies", choices=("auto", "exact", "porter-thomas"), default="auto",
                        help="H_0 and H(p_U) from the full distribution or the Porter-Thomas constants")
    parser.add_argument("--output", "-o", help="Report JSON (default: stdout)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = build_config(args)
    circuit = load_circuit(config)
    measured = read_measured_bitstrings(read_text(args.samples), circuit.n)
    h0_pt, h_pt = porter_thomas_constants(circuit.n)

    use_exact = args.entropies == "exact" or (
        args.entropies == "auto" and circuit.n <= settings.STATEVECTOR_MAX_QUBITS
    )
    h0, h_pu, source = h0_pt, h_pt, "porter-thomas"
    if use_exact:
        probabilities = np.abs(statevector_oracle(circuit)) ** 2
        sample_probs = probabilities[[bitstring_to_index(x) for x in measured]]
        try:
            h0, h_pu = exact_entropies(probabilities)
            source = "exact"
        except BenchmarkError:
            if args.entropies == "exact":
                raise
            logger.warning("Distribution has zero probabilities, using Porter-Thomas constants")
    else:
        distinct = sorted(set(measured))
        results = batch_probabilities(
            circuit, distinct, workers=config.workers, strategy=config.ordering,
            memory_budget=config.memory_budget, precision=config.precision,
        )
        failed = [r for r in results if not r.ok]
        if failed:
            raise SimulatorError(f"{len(failed)} amplitude evaluations failed: {failed[0].error}")
        lookup = {x: r.probability for x, r in zip(distinct, results)}
        sample_probs = np.array([lookup[x] for x in measured])

    estimate = fidelity_estimate(sample_probs, h0, h_pu)
    report = estimate.model_dump()
    report.update({"h_pt": h_pt, "entropy_source": source, "n": circuit.n})
    emit(args, config.output, json_text(report))
    logger.info(f"Estimated fidelity {estimate.alpha:.4f} ± {estimate.stderr:.4f}")
    return 0
