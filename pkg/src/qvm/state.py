"""Dense state-vector engine.

Qubit 0 is the leftmost symbol of a ket |i_0 i_1 ... i_{n-1}> and the most
significant bit of the amplitude index.  Gates are applied by reshaping the
amplitude vector to an n-dimensional 2x...x2 tensor and contracting the
target axes, so no 2^n x 2^n operator is ever formed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, ResourceError, ValidationError


@dataclass
class EngineConfig:
    max_qubits: int = 24
    norm_tol: float = 1e-9
    # Branches with probability below this are treated as unreachable.
    zero_branch: float = 1e-12


CONFIG = EngineConfig()


def as_rng(rng=None) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.num_qubits < 0:
            raise DomainError("num_qubits must be nonnegative")
        if self.num_qubits > CONFIG.max_qubits:
            raise ResourceError(
                f"{self.num_qubits} qubits exceeds max_qubits={CONFIG.max_qubits}"
            )
        if self.amplitudes.shape != (1 << self.num_qubits,):
            raise ValidationError(
                f"expected {1 << self.num_qubits} amplitudes, got {self.amplitudes.shape}"
            )

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def check_norm(self, tol: float | None = None) -> None:
        tol = CONFIG.norm_tol if tol is None else tol
        if abs(self.norm() ** 2 - 1.0) > tol:
            raise ValidationError(f"state norm drifted: |psi|^2 = {self.norm() ** 2!r}")

    def __getitem__(self, index):
        return self.amplitudes[index]


@dataclass(frozen=True)
class MeasurementRecord:
    measured_qubits: tuple
    outcome: str
    outcome_probability: float

    def __post_init__(self):
        if len(self.outcome) != len(self.measured_qubits):
            raise ValidationError("outcome length must match measured qubit count")
        if not 0.0 < self.outcome_probability <= 1.0 + 1e-12:
            raise ValidationError("outcome probability must lie in (0, 1]")

    @property
    def value(self) -> int:
        return int(self.outcome, 2) if self.outcome else 0


def from_amplitudes(amplitudes, normalize: bool = False) -> StateVector:
    amps = np.asarray(amplitudes, dtype=complex)
    n = int(round(np.log2(len(amps)))) if len(amps) else -1
    if n < 0 or (1 << n) != len(amps):
        raise DomainError("amplitude count must be a power of two")
    if normalize:
        nrm = np.linalg.norm(amps)
        if nrm == 0:
            raise ValidationError("cannot normalize the zero vector")
        amps = amps / nrm
    state = StateVector(n, amps)
    state.check_norm()
    return state


def _check_width(n: int) -> None:
    if n > CONFIG.max_qubits:
        raise ResourceError(f"{n} qubits exceeds max_qubits={CONFIG.max_qubits}")


def basis_state(n: int, i: int = 0) -> StateVector:
    if n < 0:
        raise DomainError("qubit count must be nonnegative")
    if not 0 <= i < (1 << n):
        raise DomainError(f"basis index {i} out of range for {n} qubits")
    _check_width(n)
    amps = np.zeros(1 << n, dtype=complex)
    amps[i] = 1.0
    return StateVector(n, amps)


def random_state(n: int, rng=None) -> StateVector:
    _check_width(n)
    rng = as_rng(rng)
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector(n, amps / np.linalg.norm(amps))


def _check_targets(targets: Sequence[int], n: int) -> tuple:
    targets = tuple(int(t) for t in targets)
    if len(set(targets)) != len(targets):
        raise DomainError(f"duplicate qubit in {targets}")
    for t in targets:
        if not 0 <= t < n:
            raise DomainError(f"qubit {t} out of range for {n} qubits")
    return targets


def apply_matrix(amps: np.ndarray, n: int, matrix: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """Contract ``matrix`` into the ``targets`` axes of a length-2^n vector.

    This is the raw kernel: no unitarity or norm checks, so it also serves
    the stochastic (probability vector) simulator.
    """
    k = len(targets)
    if k == 0:
        return amps * matrix[0, 0] if matrix.shape == (1, 1) else amps.copy()
    psi = amps.reshape((2,) * n)
    front = list(range(k))
    psi = np.moveaxis(psi, targets, front)
    shape = psi.shape
    psi = (matrix @ psi.reshape(1 << k, -1)).reshape(shape)
    psi = np.moveaxis(psi, front, targets)
    return np.ascontiguousarray(psi).reshape(-1)


def apply_gate(state: StateVector, gate, targets: Sequence[int]) -> StateVector:
    """Return ``state`` transformed by ``gate`` on ``targets`` (identity elsewhere).

    ``gate`` is a GateMatrix or a square array; arrays are checked for
    unitarity here, GateMatrix instances were checked at construction.
    """
    matrix = getattr(gate, "matrix", None)
    if matrix is None:
        matrix = np.asarray(gate, dtype=complex)
        check_unitary(matrix)
    targets = _check_targets(targets, state.num_qubits)
    if matrix.shape != (1 << len(targets),) * 2:
        raise DomainError(
            f"gate of dimension {matrix.shape[0]} cannot act on {len(targets)} qubits"
        )
    out = StateVector(state.num_qubits, apply_matrix(state.amplitudes, state.num_qubits, matrix, targets))
    out.check_norm()
    return out


def apply_diagonal(state: StateVector, phases: np.ndarray, qubits: Sequence[int]) -> StateVector:
    """Multiply each basis amplitude by ``phases[v]`` where v is the value of ``qubits``."""
    qubits = _check_targets(qubits, state.num_qubits)
    phases = np.asarray(phases, dtype=complex)
    if phases.shape != (1 << len(qubits),):
        raise DomainError("diagonal length must be 2^len(qubits)")
    if np.max(np.abs(np.abs(phases) - 1.0), initial=0.0) > 1e-9:
        raise ValidationError("diagonal entries must have unit modulus")
    values = register_values(state.num_qubits, qubits)
    return StateVector(state.num_qubits, state.amplitudes * phases[values])


def register_values(n: int, qubits: Sequence[int]) -> np.ndarray:
    """For every basis index, the integer encoded on ``qubits`` (first listed = MSB)."""
    idx = np.arange(1 << n)
    out = np.zeros(1 << n, dtype=np.int64)
    for q in qubits:
        out = (out << 1) | ((idx >> (n - 1 - q)) & 1)
    return out


def check_unitary(matrix: np.ndarray, tol: float = 1e-9) -> None:
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError("gate matrix must be square")
    dim = m.shape[0]
    if dim & (dim - 1) or dim == 0:
        raise ValidationError("gate dimension must be a power of two")
    if np.max(np.abs(m @ m.conj().T - np.eye(dim))) > tol:
        raise ValidationError("gate matrix is not unitary")


def _outcome_probs(state: StateVector, qubits: tuple) -> np.ndarray:
    n = state.num_qubits
    k = len(qubits)
    psi = np.moveaxis(state.amplitudes.reshape((2,) * n), qubits, list(range(k)))
    return np.sum(np.abs(psi.reshape(1 << k, -1)) ** 2, axis=1)


def outcome_distribution(state: StateVector, qubits: Sequence[int]) -> np.ndarray:
    """Exact probabilities of every outcome value on ``qubits``."""
    qubits = _check_targets(qubits, state.num_qubits)
    if not qubits:
        return np.ones(1)
    return _outcome_probs(state, qubits)


def branch_probability(state: StateVector, qubits: Sequence[int], values: str) -> float:
    qubits = _check_targets(qubits, state.num_qubits)
    if len(values) != len(qubits) or set(values) - {"0", "1"}:
        raise DomainError(f"values {values!r} must be a bit string of length {len(qubits)}")
    if not qubits:
        return 1.0
    return float(_outcome_probs(state, qubits)[int(values, 2)])


def project(state: StateVector, qubits: Sequence[int], value: int) -> StateVector:
    """Project onto ``qubits == value`` and renormalize."""
    qubits = _check_targets(qubits, state.num_qubits)
    vals = register_values(state.num_qubits, qubits)
    amps = np.where(vals == value, state.amplitudes, 0)
    p = float(np.vdot(amps, amps).real)
    if p < CONFIG.zero_branch:
        raise ValidationError(f"branch {value} of qubits {qubits} has probability {p:.3g}")
    return StateVector(state.num_qubits, amps / np.sqrt(p))


def measure_qubits(state: StateVector, qubits: Sequence[int], rng=None):
    """Sample an outcome on ``qubits`` and return (record, collapsed state)."""
    rng = as_rng(rng)
    qubits = _check_targets(qubits, state.num_qubits)
    total = state.norm() ** 2
    if total < CONFIG.zero_branch:
        raise ValidationError("cannot measure the zero vector")
    if not qubits:
        return MeasurementRecord((), "", 1.0), state.copy()
    probs = _outcome_probs(state, qubits) / total
    probs = np.where(probs < CONFIG.zero_branch, 0.0, probs)
    probs /= probs.sum()
    value = int(rng.choice(len(probs), p=probs))
    collapsed = project(state, qubits, value)
    outcome = format(value, f"0{len(qubits)}b")
    return MeasurementRecord(qubits, outcome, float(probs[value])), collapsed


def discard(state: StateVector, qubits: Sequence[int]) -> StateVector:
    """Drop qubits that are in a definite basis value (e.g. just measured)."""
    qubits = _check_targets(qubits, state.num_qubits)
    probs = _outcome_probs(state, qubits)
    value = int(np.argmax(probs))
    if probs[value] < 1.0 - 1e-9:
        raise ValidationError("qubits to discard are entangled with the rest of the state")
    n = state.num_qubits
    psi = np.moveaxis(state.amplitudes.reshape((2,) * n), qubits, list(range(len(qubits))))
    rest = psi.reshape(1 << len(qubits), -1)[value]
    return StateVector(n - len(qubits), rest.copy())


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """|a> (x) |b>, with a's qubits first."""
    return StateVector(a.num_qubits + b.num_qubits, np.kron(a.amplitudes, b.amplitudes))


def overlap(a: StateVector, b: StateVector) -> complex:
    """<a|b>."""
    if a.num_qubits != b.num_qubits:
        raise DomainError("overlap of states with different qubit counts")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: StateVector, b: StateVector) -> float:
    return abs(overlap(a, b)) ** 2


def to_real_doubled(state: StateVector) -> StateVector:
    """Map sum c_i|i> to sum Re(c_i)|i,0> + Im(c_i)|i,1> on one extra qubit."""
    amps = np.empty(2 * state.dim, dtype=complex)
    amps[0::2] = state.amplitudes.real
    amps[1::2] = state.amplitudes.imag
    return StateVector(state.num_qubits + 1, amps)


def reduced_purity(state: StateVector, qubit: int) -> float:
    """Tr(rho_q^2) for the one-qubit reduced density matrix."""
    (qubit,) = _check_targets([qubit], state.num_qubits)
    psi = np.moveaxis(state.amplitudes.reshape((2,) * state.num_qubits), qubit, 0).reshape(2, -1)
    rho = psi @ psi.conj().T
    return float(np.real(np.trace(rho @ rho)))
