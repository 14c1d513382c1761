"""qvm: state-vector quantum circuit simulation with textbook algorithms."""
from .errors import AlgorithmFailure, DomainError, QvmError, ResourceError, ValidationError
from .state import StateVector, basis_state, from_amplitudes, measure_qubits
from .gates import GateMatrix, named_gate
from .circuit import Circuit, execute, parse_circuit, render_circuit, sample

__version__ = "0.1.0"

__all__ = [
    "AlgorithmFailure", "DomainError", "QvmError", "ResourceError", "ValidationError",
    "StateVector", "basis_state", "from_amplitudes", "measure_qubits",
    "GateMatrix", "named_gate",
    "Circuit", "execute", "parse_circuit", "render_circuit", "sample",
]
