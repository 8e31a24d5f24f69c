"""
Subcomando `verify`: compara la eliminación por cubetas con el vector de
estado y con la suma de caminos de Ising sobre cadenas aleatorias.
"""
import argparse
import time
from typing import Dict, List

import numpy as np

from app.commands.common import (
    add_circuit_source,
    add_evaluation_options,
    build_config,
    emit,
    load_circuit,
    positive_int,
)
from app.core.errors import ResourceBudgetError, VerificationMismatch
from app.core.logging_config import get_command_logger
from app.schemas.circuit import GateKind, bitstring_to_index, format_bitstring
from app.schemas.run_config import derive_seeds
from app.services.ising_service import (
    build_ising,
    clifford_phase_profile,
    coupling_list,
    partition_amplitude,
)
from app.services.simulator_service import amplitude, plan_ordering, statevector_oracle
from app.utils.io_utils import json_text

logger = get_command_logger("verify")

TOLERANCES = {"double": 1e-10, "single": 1e-5}


def register(subparsers) -> None:
    parser = subparsers.add_parser("verify", help="Cross-check the independent amplitude oracles")
    add_circuit_source(parser)
    add_evaluation_options(parser)
    parser.add_argument("--bitstrings", type=positive_int, default=16,
                        help="Number of random bit-strings to compare")
    parser.add_argument("--tolerance", type=float,
                        help="Maximum relative deviation (default 1e-10 double, 1e-5 single)")
    parser.add_argument("--couplings", help="Write the Ising coupling list as JSON")
    parser.add_argument("--output", "-o", help="Report JSON (default: stdout)")
    parser.set_defaults(handler=run)


def relative_deviation(values: np.ndarray, reference: np.ndarray, n: int) -> float:
    """
    max |a - b| / max(|b|, 2^{-n/2}); la escala mínima es la magnitud típica
    de una amplitud, así las amplitudes nulas no dividen entre cero.
    """
    values, reference = np.asarray(values), np.asarray(reference)
    scale = np.maximum(np.abs(reference), 2.0 ** (-n / 2))
    return float(np.max(np.abs(values - reference) / scale))


def compare_oracles(reference: np.ndarray, candidates: Dict[str, np.ndarray],
                    n: int) -> Dict[str, float]:
    """Desviación relativa de cada oráculo respecto a la eliminación"""
    return {
        name: relative_deviation(values, reference, n) for name, values in candidates.items()
    }


def _timed(function):
    start = time.perf_counter()
    value = function()
    return value, time.perf_counter() - start


def run(args: argparse.Namespace) -> int:
    config = build_config(args)
    circuit = load_circuit(config)
    seeds = derive_seeds(args.seed)
    tolerance = args.tolerance if args.tolerance is not None else TOLERANCES[config.precision]

    rng = np.random.default_rng(seeds["bitstrings"])
    bitstrings = [tuple(int(b) for b in row) for row in rng.integers(0, 2, size=(args.bitstrings, circuit.n))]

    oracles: Dict[str, dict] = {}
    plan = plan_ordering(circuit, config.ordering, seed=seeds["ordering"])

    def eliminate() -> np.ndarray:
        return np.array([
            amplitude(circuit, x, strategy=config.ordering, ordering=plan,
                      memory_budget=config.memory_budget, precision=config.precision).amplitude
            for x in bitstrings
        ])

    reference, seconds = _timed(eliminate)
    oracles["elimination"] = {"status": "ok", "seconds": seconds, "width": plan[1].width}

    candidates: Dict[str, np.ndarray] = {}
    try:
        state, seconds = _timed(lambda: statevector_oracle(circuit))
        candidates["statevector"] = np.array([state.flat[bitstring_to_index(x)] for x in bitstrings])
        oracles["statevector"] = {"status": "ok", "seconds": seconds}
    except ResourceBudgetError as e:
        oracles["statevector"] = {"status": "skipped", "reason": str(e)}

    model = build_ising(circuit)
    try:
        values, seconds = _timed(lambda: np.array([partition_amplitude(model, x) for x in bitstrings]))
        candidates["ising"] = values
        oracles["ising"] = {"status": "ok", "seconds": seconds, "free_spins": len(model.free_spins)}
    except ResourceBudgetError as e:
        oracles["ising"] = {"status": "skipped", "reason": str(e)}

    deviations = compare_oracles(reference, candidates, circuit.n)
    for name, deviation in deviations.items():
        oracles[name]["max_relative_deviation"] = deviation

    t_free = not any(g.kind == GateKind.T for g in circuit.gates)
    profile = sorted(clifford_phase_profile(circuit, seed=seeds["sampling"]))
    even_only = all(unit % 2 == 0 for unit in profile)

    failures: List[str] = [
        f"{name} deviates by {deviation:.3e}" for name, deviation in deviations.items()
        if deviation > tolerance
    ]
    if t_free and not even_only:
        failures.append(f"T-free circuit realizes odd phase units {profile}")

    report = {
        "n": circuit.n,
        "depth": circuit.depth,
        "bitstrings": [format_bitstring(x) for x in bitstrings],
        "tolerance": tolerance,
        "oracles": oracles,
        "phase_profile": {"units": profile, "t_free": t_free, "even_only": even_only},
        "passed": not failures,
        "failures": failures,
    }
    emit(args, config.output, json_text(report))
    if args.couplings:
        emit(args, args.couplings, json_text(coupling_list(model)))

    if failures:
        logger.error(f"Verification failed: {'; '.join(failures)}")
        raise VerificationMismatch("; ".join(failures))
    logger.info(f"Verified {len(bitstrings)} amplitudes across {len(candidates) + 1} oracles")
    return 0
