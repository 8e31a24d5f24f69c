import numpy as np
import pytest

from app.schemas.circuit import Circuit
from app.services.circuit_service import generate_random_circuit
from app.utils.circuit_parser import parse_circuit

# H en ambos qubits, CZ, H en ambos qubits: ⟨00|C|00⟩ = 1/2
WORKED_EXAMPLE = """\
# dos qubits, grilla 1x2
2
0 h 0
0 h 1
1 cz 0 1
2 h 0
2 h 1
"""

# Tres qubits en línea con seis variables internas
LINE_CIRCUIT = """\
3
0 h 0
0 h 1
0 h 2
1 cz 0 1
2 x_1_2 0
2 t 1
3 cz 1 2
4 y_1_2 1
4 h 2
5 cz 0 1
6 h 0
6 h 1
6 h 2
"""

# Circuito sin compuertas T: todas las fases son múltiplos de π/2
CLIFFORD_CIRCUIT = """\
4 2 2
0 h 0
0 h 1
0 h 2
0 h 3
1 cz 0 1
2 x_1_2 0
2 y_1_2 1
3 cz 2 3
4 x_1_2 2
4 h 3
5 cz 0 2
6 y_1_2 0
6 x_1_2 2
"""


@pytest.fixture
def worked_example() -> Circuit:
    return parse_circuit(WORKED_EXAMPLE)


@pytest.fixture
def line_circuit() -> Circuit:
    return parse_circuit(LINE_CIRCUIT)


@pytest.fixture
def clifford_circuit() -> Circuit:
    return parse_circuit(CLIFFORD_CIRCUIT)


@pytest.fixture
def small_circuits():
    """Circuitos generados pequeños: (filas, columnas, profundidad, semilla)"""
    params = [(2, 2, 5, 1), (2, 2, 8, 2), (2, 3, 6, 3), (3, 3, 8, 4), (1, 4, 7, 5), (3, 2, 10, 6)]
    return [generate_random_circuit(r, c, d, seed) for r, c, d, seed in params]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
