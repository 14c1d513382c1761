"""Named gates, controlled gates, the Barenco construction and gate distances."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import schur
from scipy.optimize import minimize_scalar

from .errors import DomainError, ValidationError
from .state import apply_matrix, as_rng, basis_state, apply_gate, check_unitary, measure_qubits

# Quadratic irrational used for Deutsch's U and W gates.
ALPHA = math.sqrt(2.0) - 1.0


@dataclass(frozen=True, eq=False)
class GateMatrix:
    matrix: np.ndarray
    name: str = "unitary"
    params: tuple = ()

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        check_unitary(m)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def arity(self) -> int:
        return int(self.matrix.shape[0]).bit_length() - 1

    @property
    def dagger(self) -> "GateMatrix":
        return GateMatrix(self.matrix.conj().T, self.name + "_dg", self.params)

    def __eq__(self, other):
        return isinstance(other, GateMatrix) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes())

    def __repr__(self):
        p = f"({', '.join(map(repr, self.params))})" if self.params else ""
        return f"GateMatrix<{self.name}{p}, arity={self.arity}>"


def _rot(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]], dtype=complex)


def _phase(phi: float) -> np.ndarray:
    return np.array([[1, 0], [0, np.exp(1j * phi)]], dtype=complex)


def _g(theta, phi):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s * np.exp(1j * phi)], [-s * np.exp(-1j * phi), c]], dtype=complex)


def _rk(k):
    k = int(k)
    if k < 1:
        raise DomainError("R_k needs k >= 1")
    return _phase(2 * math.pi / 2 ** k)


def _controlled_matrix(u: np.ndarray, c: int) -> np.ndarray:
    dim = u.shape[0] << c
    out = np.eye(dim, dtype=complex)
    out[-u.shape[0]:, -u.shape[0]:] = u
    return out


_X = np.array([[0, 1], [1, 0]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

# name -> (arity, number of parameters, builder)
GATES = {
    "i": (1, 0, lambda: np.eye(2)),
    "x": (1, 0, lambda: _X),
    "not": (1, 0, lambda: _X),
    "y": (1, 0, lambda: np.array([[0, -1j], [1j, 0]])),
    "iy": (1, 0, lambda: np.array([[0, 1], [-1, 0]])),
    "z": (1, 0, lambda: np.diag([1, -1])),
    "h": (1, 0, lambda: _H),
    "rk": (1, 1, _rk),
    "rk_dg": (1, 1, lambda k: _rk(k).conj().T),
    "g": (1, 2, _g),
    "u": (1, 0, lambda: _rot(2 * math.pi * ALPHA)),
    "w": (1, 0, lambda: _phase(2 * math.pi * ALPHA)),
    "cnot": (2, 0, lambda: _controlled_matrix(_X, 1)),
    "crk": (2, 1, lambda k: _controlled_matrix(_rk(k), 1)),
    "crk_dg": (2, 1, lambda k: _controlled_matrix(_rk(k).conj().T, 1)),
    "swap": (2, 0, lambda: np.eye(4)[[0, 2, 1, 3]]),
    "toffoli": (3, 0, lambda: _controlled_matrix(_X, 2)),
    "u3": (3, 0, lambda: _controlled_matrix(_rot(2 * math.pi * ALPHA), 2)),
    "w3": (3, 0, lambda: _controlled_matrix(_phase(2 * math.pi * ALPHA), 2)),
}
ALIASES = {"ccnot": "toffoli", "cx": "cnot", "xor": "cnot"}


def named_gate(name: str, *params) -> GateMatrix:
    key = ALIASES.get(name.lower(), name.lower())
    if key not in GATES:
        raise DomainError(f"unknown gate {name!r}")
    _, nparams, build = GATES[key]
    if len(params) != nparams:
        raise DomainError(f"gate {key!r} takes {nparams} parameter(s), got {len(params)}")
    if key in ("rk", "crk", "rk_dg", "crk_dg"):
        params = (int(params[0]),)
    else:
        params = tuple(float(p) for p in params)
    return GateMatrix(np.asarray(build(*params), dtype=complex), key, params)


def gate_arity(name: str) -> int:
    key = ALIASES.get(name.lower(), name.lower())
    if key not in GATES:
        raise DomainError(f"unknown gate {name!r}")
    return GATES[key][0]


def controlled(gate: GateMatrix, num_controls: int) -> GateMatrix:
    """Identity unless all ``num_controls`` leading qubits are 1, then ``gate``."""
    if gate.arity != 1:
        raise DomainError("controlled() takes a one-qubit gate")
    if num_controls < 1:
        raise DomainError("num_controls must be positive")
    return GateMatrix(_controlled_matrix(gate.matrix, num_controls), "c" * num_controls + gate.name, gate.params)


def matrix_sqrt_2x2(q: GateMatrix) -> GateMatrix:
    """Principal square root of a one-qubit unitary via its Schur (eigen) form."""
    if q.arity != 1:
        raise DomainError("matrix_sqrt_2x2 takes a one-qubit gate")
    t, z = schur(q.matrix, output="complex")
    eig = np.diag(t).copy()
    # Clean rounding noise so that -1 maps to +i deterministically.
    eig = np.where(np.abs(eig.imag) < 1e-13, eig.real + 0j, eig)
    root = z @ np.diag(np.sqrt(eig)) @ z.conj().T
    return GateMatrix(root, "sqrt_" + q.name, q.params)


@dataclass
class GateSequence:
    """Ordered (gate, targets) applications on ``num_qubits`` qubits."""

    num_qubits: int
    steps: list = field(default_factory=list)

    def append(self, gate: GateMatrix, targets: Sequence[int]) -> None:
        self.steps.append((gate, tuple(targets)))

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def unitary(self) -> np.ndarray:
        n = self.num_qubits
        cols = np.eye(1 << n, dtype=complex)
        out = np.empty_like(cols)
        for c in range(1 << n):
            v = cols[:, c]
            for gate, targets in self.steps:
                v = apply_matrix(v, n, gate.matrix, targets)
            out[:, c] = v
        return out


def barenco_decompose(q: GateMatrix) -> GateSequence:
    """Five two-qubit gates realising the doubly controlled ``q`` on qubits (0, 1, 2).

    With V^2 = Q: controlled-V(1->2), CNOT(0->1), controlled-V^dagger(1->2),
    CNOT(0->1), controlled-V(0->2).
    """
    v = matrix_sqrt_2x2(q)
    cv = controlled(v, 1)
    cvd = controlled(v.dagger, 1)
    cx = named_gate("cnot")
    seq = GateSequence(3)
    seq.append(cv, (1, 2))
    seq.append(cx, (0, 1))
    seq.append(cvd, (1, 2))
    seq.append(cx, (0, 1))
    seq.append(cv, (0, 2))
    return seq


def _as_matrix(u) -> np.ndarray:
    return np.asarray(getattr(u, "matrix", u), dtype=complex)


def approximation_distance(u, v) -> float:
    """Operator (largest singular value) norm of U - V."""
    a, b = _as_matrix(u), _as_matrix(v)
    if a.shape != b.shape:
        raise DomainError(f"dimension mismatch {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b, 2))


def phase_distance(u, v) -> float:
    """min over unit phases of ||U - e^{i phi} V||, an upper bound found numerically."""
    a, b = _as_matrix(u), _as_matrix(v)
    if a.shape != b.shape:
        raise DomainError(f"dimension mismatch {a.shape} vs {b.shape}")
    tr = np.trace(b.conj().T @ a)
    phi0 = float(np.angle(tr)) if abs(tr) > 1e-12 else 0.0

    def dist(p):
        return float(np.linalg.norm(a - np.exp(1j * p) * b, 2))

    # The objective is not convex in phi; seed the local search from a coarse grid.
    step = 2 * math.pi / 64
    candidates = [phi0, 0.0] + [k * step for k in range(64)]
    start = min(candidates, key=dist)
    res = minimize_scalar(dist, bounds=(start - step, start + step), method="bounded",
                          options={"xatol": 1e-10})
    return min(dist(start), float(res.fun))


def quantum_random_bit(rng=None, start: int = 0) -> int:
    """Apply H to a fresh qubit in |start> and measure it."""
    state = apply_gate(basis_state(1, start), named_gate("h"), [0])
    record, _ = measure_qubits(state, [0], as_rng(rng))
    return record.value


def is_unitary(matrix, tol: float = 1e-9) -> bool:
    try:
        check_unitary(np.asarray(matrix, dtype=complex), tol)
    except ValidationError:
        return False
    return True
