"""Subcomando `width`: tabla de ancho inducido contra profundidad."""
import argparse
from typing import List

from app.commands.common import (
    UsageError,
    add_circuit_source,
    add_output,
    build_config,
    emit,
    load_circuit,
    positive_int,
)
from app.core.logging_config import get_command_logger
from app.schemas.circuit import Circuit
from app.schemas.run_config import derive_seeds
from app.services.elimination_service import (
    build_line_graph,
    greedy_ordering,
    simulate_elimination,
    vertical_ordering,
)
from app.services.model_service import build_model
from app.utils.io_utils import csv_text, format_edge_list, format_ordering, json_text

logger = get_command_logger("width")

ORDERINGS = ("vertical", "min_fill", "min_degree")
CSV_COLUMNS = ("depth", "ordering", "variables", "max_clique", "width", "flops", "peak_memory_bytes")
LINE_GRAPH_COLUMNS = ("line_graph_max_clique", "line_graph_width")


def register(subparsers) -> None:
    parser = subparsers.add_parser("width", help="Induced width of elimination orderings")
    add_circuit_source(parser)
    parser.add_argument("--depths", type=positive_int, nargs="+",
                        help="Generator depths for a width-vs-depth table")
    parser.add_argument("--ordering", choices=ORDERINGS + ("all",), default="vertical")
    parser.add_argument("--restarts", type=positive_int, default=None,
                        help="Greedy restarts (default GREEDY_RESTARTS)")
    parser.add_argument("--line-graph", action="store_true",
                        help="Also report the min-fill width of the tensor-network line graph")
    parser.add_argument("--edge-list", help="Dump the model graph as an edge list")
    parser.add_argument("--export-ordering", help="Write the ordering of the last row (j:k per line)")
    add_output(parser, formats=("csv", "json"))
    parser.set_defaults(handler=run)


def width_reports(circuit: Circuit, orderings, seed: int, restarts=None):
    """WidthReport por ordenamiento para el modelo con extremos fijos"""
    model = build_model(circuit, output=[0] * circuit.n)
    reports = []
    for name in orderings:
        if name == "vertical" or model.graph.number_of_nodes() == 0:
            ordering = vertical_ordering(model)
            reports.append((ordering, simulate_elimination(model.graph, ordering)))
        else:
            reports.append(greedy_ordering(model.graph, heuristic=name, restarts=restarts, seed=seed))
    return model, reports


def run(args: argparse.Namespace) -> int:
    config = build_config(args)
    if args.circuit_path and args.depths:
        raise UsageError("--depths only applies to generated circuits")
    depths: List[int] = args.depths or [None]
    orderings = ORDERINGS if args.ordering == "all" else (args.ordering,)
    seed = derive_seeds(args.seed)["ordering"]

    rows, records = [], []
    last_ordering, last_model = None, None
    for depth in depths:
        circuit = load_circuit(config, depth=depth)
        model, reports = width_reports(circuit, orderings, seed, args.restarts)

        line_graph_fields = ()
        if args.line_graph:
            line_graph = build_line_graph(circuit)
            if line_graph.number_of_nodes():
                _, line_report = greedy_ordering(line_graph, "min_fill", restarts=args.restarts, seed=seed)
                line_graph_fields = (line_report.max_clique, line_report.width)
            else:
                line_graph_fields = (0, 0)

        for ordering, report in reports:
            rows.append((circuit.depth, report.provenance, report.variable_count, report.max_clique,
                         report.width, report.flops, report.peak_memory_bytes) + line_graph_fields)
            record = report.model_dump(exclude={"ordering"})
            record["depth"] = circuit.depth
            if args.line_graph:
                record.update(dict(zip(LINE_GRAPH_COLUMNS, line_graph_fields)))
            records.append(record)
            last_ordering = ordering
        last_model = model

    if config.format == "csv":
        header = CSV_COLUMNS + (LINE_GRAPH_COLUMNS if args.line_graph else ())
        content = csv_text(header, rows)
    else:
        content = json_text(records)
    emit(args, config.output, content)

    if args.edge_list:
        emit(args, args.edge_list, format_edge_list(last_model))
    if args.export_ordering:
        emit(args, args.export_ordering, format_ordering(last_ordering))
    logger.info(f"Reported widths for {len(depths)} circuit(s)")
    return 0
