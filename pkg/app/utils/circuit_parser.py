from typing import Dict, List, Optional, Tuple
import logging

from pydantic import ValidationError

from app.schemas.circuit import Circuit, Gate, GateKind, cycle_violations
from app.services.circuit_service import CircuitError

logger = logging.getLogger(__name__)


class CircuitParseError(CircuitError):
    """Excepción personalizada para errores del parser de circuitos"""

    error_code = "circuit_parse_error"

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{prefix}{message}")


class CircuitTextParser:
    """
    Parser del formato de texto de circuitos:

        <n> [<filas> <columnas>]
        <ciclo> <compuerta> <q> [<q2>]
        ...

    Compuertas soportadas: h, t, x_1_2, y_1_2, cz. Los qubits son índices
    row-major base 0. Las líneas que inician con '#' son comentarios y las
    líneas vacías se ignoran. Si el encabezado solo trae n, la grilla es 1×n
    salvo que el llamador indique filas/columnas.
    """

    SUPPORTED_GATES = {kind.value: kind for kind in GateKind}

    COMMENT_PREFIX = "#"

    def __init__(self):
        """Inicializa el parser de circuitos"""
        self.logger = logger

    def parse(self, text: str, rows: Optional[int] = None,
              cols: Optional[int] = None) -> Circuit:
        """
        Parsea el texto de un circuito y retorna un Circuit canónico

        Args:
            text: Contenido del archivo de circuito
            rows: Filas de la grilla (opcional, sobrescribe el encabezado)
            cols: Columnas de la grilla (opcional, sobrescribe el encabezado)

        Returns:
            Circuit: Circuito con compuertas ordenadas por (ciclo, qubit menor)

        Raises:
            CircuitParseError: Si alguna línea es inválida; indica el número de línea
        """
        lines = self._content_lines(text)
        if not lines:
            raise CircuitParseError("empty circuit file, expected qubit count header")

        header_line, header = lines[0]
        rows, cols = self._parse_header(header, header_line, rows, cols)
        n = rows * cols

        cycles: Dict[int, List[Gate]] = {}
        gates: List[Gate] = []
        for line_number, content in lines[1:]:
            gate = self._parse_gate_line(content, line_number, n)
            cycle_gates = cycles.setdefault(gate.cycle, [])
            # El ciclo acumulado hasta aquí es válido: cualquier violación nueva
            # es de esta línea
            violations = cycle_violations(cycle_gates + [gate], rows, cols)
            if violations:
                raise CircuitParseError(violations[0], line_number)
            cycle_gates.append(gate)
            gates.append(gate)

        try:
            circuit = Circuit(rows=rows, cols=cols, gates=tuple(gates))
        except ValidationError as e:
            raise CircuitParseError(str(e))

        self.logger.debug(
            f"Parsed circuit with {n} qubits, depth {circuit.depth} and {len(gates)} gates"
        )
        return circuit

    def serialize(self, circuit: Circuit) -> str:
        """
        Serializa un circuito en forma canónica (una compuerta por línea,
        ordenadas por ciclo y qubit menor).
        """
        if circuit.rows == 1:
            header = f"{circuit.n}"
        else:
            header = f"{circuit.n} {circuit.rows} {circuit.cols}"
        lines = [header]
        for gate in circuit.gates:
            qubits = " ".join(str(q) for q in gate.qubits)
            lines.append(f"{gate.cycle} {gate.kind.value} {qubits}")
        return "\n".join(lines) + "\n"

    def _content_lines(self, text: str) -> List[Tuple[int, str]]:
        """Líneas con contenido junto con su número de línea (base 1)"""
        content = []
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith(self.COMMENT_PREFIX):
                continue
            content.append((number, line))
        return content

    def _parse_header(self, header: str, line_number: int, rows: Optional[int],
                      cols: Optional[int]) -> Tuple[int, int]:
        parts = header.split()
        if len(parts) not in (1, 3) or not all(p.isdigit() for p in parts):
            raise CircuitParseError(
                f"invalid header {header!r}, expected '<n>' or '<n> <rows> <cols>'",
                line_number,
            )
        n = int(parts[0])
        if n < 1:
            raise CircuitParseError("qubit count must be >= 1", line_number)

        if len(parts) == 3:
            header_rows, header_cols = int(parts[1]), int(parts[2])
            if header_rows * header_cols != n:
                raise CircuitParseError(
                    f"grid {header_rows}x{header_cols} does not hold {n} qubits", line_number
                )
            rows = rows or header_rows
            cols = cols or header_cols

        if rows is None and cols is None:
            rows, cols = 1, n
        elif rows is None:
            rows = n // cols
        elif cols is None:
            cols = n // rows

        if rows * cols != n:
            raise CircuitParseError(f"grid {rows}x{cols} does not hold {n} qubits", line_number)
        return rows, cols

    def _parse_gate_line(self, content: str, line_number: int, n: int) -> Gate:
        """
        Parsea una línea de compuerta
        Formato: <ciclo> <compuerta> <q> [<q2>]
        """
        parts = content.split()
        if len(parts) < 3:
            raise CircuitParseError(f"malformed gate line {content!r}", line_number)

        cycle_text, name, *qubit_texts = parts
        kind = self.SUPPORTED_GATES.get(name.lower())
        if kind is None:
            raise CircuitParseError(f"unknown gate {name!r}", line_number)

        try:
            cycle = int(cycle_text)
            qubits = tuple(int(q) for q in qubit_texts)
        except ValueError:
            raise CircuitParseError(f"non-integer field in {content!r}", line_number)

        if cycle < 0:
            raise CircuitParseError(f"negative cycle {cycle}", line_number)
        if len(qubits) != kind.arity:
            raise CircuitParseError(
                f"gate {kind.value} expects {kind.arity} qubit(s), got {len(qubits)}",
                line_number,
            )
        for q in qubits:
            if not 0 <= q < n:
                raise CircuitParseError(f"qubit {q} out of range for {n} qubits", line_number)

        try:
            return Gate(kind=kind, cycle=cycle, qubits=qubits)
        except ValidationError as e:
            raise CircuitParseError(e.errors()[0]["msg"], line_number)


circuit_parser = CircuitTextParser()


def parse_circuit(text: str, rows: Optional[int] = None, cols: Optional[int] = None) -> Circuit:
    return circuit_parser.parse(text, rows=rows, cols=cols)


def serialize_circuit(circuit: Circuit) -> str:
    return circuit_parser.serialize(circuit)
