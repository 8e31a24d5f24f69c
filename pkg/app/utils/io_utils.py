"""
Utilidades de entrada/salida: archivos de cadenas y ordenamientos, escritura
de CSV/JSON y metadatos de reproducibilidad.
"""
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence

from app.schemas.run_config import OutputMetadata
from app.services.elimination_service import Ordering
from app.services.model_service import GraphicalModel, VariableId

logger = logging.getLogger(__name__)

STDOUT = "-"


def read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def write_text(path: Optional[str], content: str) -> None:
    """Escribe en el archivo o en stdout si path es None o '-'"""
    if path is None or path == STDOUT:
        sys.stdout.write(content)
        sys.stdout.flush()
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(content, encoding="utf-8")
    logger.debug(f"Wrote {len(content)} characters to {target}")


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def json_text(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def jsonl_text(records: Iterable[dict]) -> str:
    return "".join(json.dumps(record, sort_keys=True) + "\n" for record in records)


def metadata_path(path: str) -> str:
    return f"{path}.meta.json"


def write_metadata(path: Optional[str], metadata: OutputMetadata) -> None:
    """Escribe el sidecar F.meta.json junto al archivo de datos F"""
    if path is None or path == STDOUT:
        return
    write_text(metadata_path(path), json_text(metadata.model_dump()))


def format_ordering(ordering: Ordering) -> str:
    """Una variable `j:k` por línea"""
    return "".join(f"{v}\n" for v in ordering.variables)


def parse_ordering(text: str) -> Ordering:
    variables: List[VariableId] = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            variables.append(VariableId.parse(line))
    return Ordering(tuple(variables), "external")


def format_edge_list(model: GraphicalModel) -> str:
    """Lista de aristas `j,k j',k'` para herramientas externas de treewidth"""
    def label(v) -> str:
        return f"{v.qubit},{v.index}" if isinstance(v, VariableId) else str(v)

    return "".join(f"{label(a)} {label(b)}\n" for a, b in model.edge_list())
