# app/main.py
"""
Punto de entrada del CLI `bucketsim`.

Cada subcomando vive en app/commands y se registra con `register(subparsers)`;
el manejador devuelve el código de salida.
"""
import argparse
import logging
import sys
from typing import Optional, Sequence

from app.commands import COMMANDS
from app.core.config import settings
from app.core.errors import BucketSimError, exit_code_for
from app.core.logging_config import setup_logging
from app.core.metrics import write_metrics

logger = logging.getLogger("app")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bucketsim",
        description="Quantum circuit amplitudes by bucket elimination on undirected graphical models",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.PROJECT_VERSION}")
    parser.add_argument("--log-level", default=None,
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
                        help="Log level (default from LOG_LEVEL)")
    parser.add_argument("--log-dir", default=None, help="Also write JSON logs to this directory")
    parser.add_argument("--metrics-file", default=None,
                        help="Write Prometheus metrics in text format when the command ends")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(level=args.log_level, log_dir=args.log_dir)

    try:
        code = args.handler(args)
    except BucketSimError as e:
        code = exit_code_for(e)
        logger.error(f"{args.command} failed: {e}", extra={"error_code": e.error_code})
        sys.stderr.write(f"error: {e}\n")
    except (ValueError, OSError) as e:
        code = exit_code_for(e)
        logger.error(f"{args.command} failed: {e}")
        sys.stderr.write(f"error: {e}\n")

    if args.metrics_file:
        write_metrics(args.metrics_file)
    return code


if __name__ == "__main__":
    sys.exit(main())
