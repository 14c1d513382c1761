"""Approximating three-qubit unitaries with powers of Deutsch's U3 and W3 gates.

U3 and W3 are doubly controlled rotations by the irrational angle 2*pi*alpha,
so U^n and W^n sweep a dense set of angles.  A target T is written as
e^{i l0} * prod_k (I + (e^{i(l_k - l0)} - 1)|v_k><v_k|) over its eigenvectors.
Each factor is R_k^{-1} P R_k where R_k rotates v_k onto |111> with two-level
(Givens) steps and P is a W3 power acting on |111>.

Acting only on the three data qubits, U3 and W3 fix every basis state with
fewer than two ones, so the gates alone are not universal there.  The
construction therefore uses two extra qubits (3 and 4) prepared in |1> and
used purely as controls: with one or both controls on them, U3/W3 become
singly controlled or free one-qubit gates on the data qubits.  The
approximated operator is the data block with both extra qubits equal to 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import schur

from .errors import DomainError, ResourceError
from .gates import ALPHA, GateMatrix, _controlled_matrix, _phase, _rot, approximation_distance, named_gate
from .state import apply_matrix

DATA = (0, 1, 2)
ANCILLAS = (3, 4)
NUM_QUBITS = 5
_TINY = 1e-14


@dataclass
class SynthesisConfig:
    # Upper bound on primitives per target, used to split the error budget.
    primitive_budget: int = 1000
    # The alpha-multiple scan runs up to cap_factor / delta.
    cap_factor: float = 4.0
    max_attempts: int = 4


class AlphaTable:
    """Sorted fractional parts {n * alpha} for n = 0..cap, for nearest-power lookup."""

    def __init__(self, cap: int):
        self.cap = int(cap)
        frac = np.mod(np.arange(self.cap + 1, dtype=np.float64) * ALPHA, 1.0)
        self.order = np.argsort(frac, kind="stable")
        self.sorted = frac[self.order]

    def smallest_power(self, f: float, delta: float) -> int | None:
        """Least n <= cap with circle distance({n alpha}, f) <= delta."""
        f = f % 1.0
        lo, hi = f - delta, f + delta
        spans = [(max(lo, 0.0), min(hi, 1.0))]
        if lo < 0:
            spans.append((lo + 1.0, 1.0))
        if hi > 1:
            spans.append((0.0, hi - 1.0))
        best = None
        for a, b in spans:
            i0 = np.searchsorted(self.sorted, a, "left")
            i1 = np.searchsorted(self.sorted, b, "right")
            if i1 > i0:
                m = int(self.order[i0:i1].min())
                best = m if best is None else min(best, m)
        return best


_TABLES: dict = {}


def _table(cap: int) -> AlphaTable:
    if cap not in _TABLES:
        _TABLES.clear()
        _TABLES[cap] = AlphaTable(cap)
    return _TABLES[cap]


@dataclass
class UWSynthesis:
    """Run-length U3/W3 program: each step is (gate, (c1, c2, target), power)."""

    target: np.ndarray
    eps: float
    steps: list = field(default_factory=list)
    distance: float = float("nan")
    delta: float = 0.0
    cap: int = 0
    attempts: int = 0

    @property
    def length(self) -> int:
        """Number of individual U3/W3 applications."""
        return int(sum(p for _, _, p in self.steps))

    def unitary(self) -> np.ndarray:
        return uw_block(self.steps)

    def report(self) -> dict:
        return {
            "eps": self.eps,
            "distance": self.distance,
            "steps": len(self.steps),
            "applications": self.length,
            "delta": self.delta,
            "scan_cap": self.cap,
            "attempts": self.attempts,
        }


def _power_matrix(gate: str, power: int) -> np.ndarray:
    angle = 2 * math.pi * ((power * ALPHA) % 1.0)
    return _rot(angle) if gate == "u3" else _phase(angle)


def uw_block(steps) -> np.ndarray:
    """8x8 block (data qubits, both extra qubits = 1) of the 5-qubit product."""
    full = {}
    out = np.empty((8, 8), dtype=complex)
    for x in range(8):
        v = np.zeros(1 << NUM_QUBITS, dtype=complex)
        v[(x << 2) | 3] = 1.0
        for gate, targets, power in steps:
            key = (gate, power)
            if key not in full:
                full[key] = _controlled_matrix(_power_matrix(gate, power), 2)
            v = apply_matrix(v, NUM_QUBITS, full[key], targets)
        out[:, x] = v[3::4]
    return out


class _Builder:
    def __init__(self, table: AlphaTable, delta: float):
        self.table = table
        self.delta = delta

    def prim(self, gate, controls, target, angle):
        """Primitive approximating the (controlled) rotation/phase by ``angle``."""
        n = self.table.smallest_power(angle / (2 * math.pi), self.delta)
        if n is None:
            raise ResourceError(
                f"no power n <= {self.table.cap} puts n*alpha within {self.delta:.3g} of the target"
            )
        if n == 0:
            return None
        ctl = tuple(controls) + ANCILLAS[: 2 - len(controls)]
        return (gate, ctl + (target,), n)

    def inverse(self, prim):
        gate, targets, n = prim
        f = -(n * ALPHA) % 1.0
        m = self.table.smallest_power(f, self.delta)
        if m is None:
            raise ResourceError("inverse power not found within the scan cap")
        return None if m == 0 else (gate, targets, m)


def _apply_prim(vec: np.ndarray, prim) -> np.ndarray:
    gate, targets, n = prim
    data = [q for q in targets[:2] if q in DATA]
    m = _controlled_matrix(_power_matrix(gate, n), len(data)) if data else _power_matrix(gate, n)
    return apply_matrix(vec, 3, m, data + [targets[2]])


def _rotate_to_top(v: np.ndarray, b: _Builder) -> list:
    """Primitives sending v to (phase) |111> by Givens steps in popcount order."""
    cur = v.astype(complex).copy()
    prims = []
    x_tilde = {}

    def emit(p):
        nonlocal cur
        if p is not None:
            prims.append(p)
            cur = _apply_prim(cur, p)

    for q in DATA:
        # X = Z . rot(pi/2): apply the rotation first, then the phase.
        x_tilde[q] = [b.prim("u3", (), q, math.pi / 2), b.prim("w3", (), q, math.pi)]
    for s in sorted(range(7), key=lambda i: (bin(i).count("1"), i)):
        zeros = [q for q in DATA if not (s >> (2 - q)) & 1]
        t = zeros[-1]
        controls = [q for q in DATA if q != t]
        flips = [q for q in controls if not (s >> (2 - q)) & 1]
        # Locate the pair after the conjugating X gates (controls set to 1).
        if abs(cur[s]) < _TINY:
            continue
        for q in flips:
            for p in x_tilde[q]:
                emit(p)
        p0, p1 = 7 ^ (1 << (2 - t)), 7
        a0, a1 = cur[p0], cur[p1]
        if abs(a1) > _TINY:
            emit(b.prim("w3", controls, t, np.angle(a0) - np.angle(a1)))
        beta = math.atan2(-abs(cur[p0]), abs(cur[p1]))
        emit(b.prim("u3", controls, t, beta))
        for q in reversed(flips):
            for p in x_tilde[q]:
                emit(p)
    return prims


def _global_phase(angle: float, b: _Builder) -> list:
    """e^{i angle} on the whole data block: P . (R P R^-1) on qubit 0, where P is the
    phase on |1> and the quarter turn R moves it onto |0>."""
    phase = b.prim("w3", (), 0, angle)
    if phase is None:
        return []
    turn = b.prim("u3", (), 0, math.pi / 2)
    steps = [phase, b.inverse(turn), phase, turn]
    return [p for p in steps if p is not None]


def _build(T: np.ndarray, b: _Builder) -> list:
    tri, vecs = schur(T, output="complex")
    lam = np.angle(np.diag(tri))
    steps = _global_phase(lam[0], b)
    for k in range(1, 8):
        dl = (lam[k] - lam[0]) % (2 * math.pi)
        if min(dl, 2 * math.pi - dl) < 1e-13:
            continue
        fwd = _rotate_to_top(vecs[:, k], b)
        steps.extend(fwd)
        p = b.prim("w3", (0, 1), 2, dl)
        if p is not None:
            steps.append(p)
        for q in reversed(fwd):
            inv = b.inverse(q)
            if inv is not None:
                steps.append(inv)
    return steps


def synthesize_uw(target, eps: float, config: SynthesisConfig | None = None) -> UWSynthesis:
    """U3/W3 program whose data block is within ``eps`` of ``target`` in operator norm.

    The error budget is split evenly over the primitives; the result is
    verified by multiplying out the 32x32 product, and the per-primitive
    tolerance is tightened and the build repeated if verification fails.
    """
    config = config or SynthesisConfig()
    if not eps > 0:
        raise DomainError("eps must be positive")
    T = np.asarray(getattr(target, "matrix", target), dtype=complex)
    if T.shape != (8, 8):
        raise DomainError("synthesize_uw approximates three-qubit (8x8) unitaries")
    GateMatrix(T)  # unitarity check
    for name in ("w3", "u3"):
        if approximation_distance(T, named_gate(name)) < 1e-12:
            res = UWSynthesis(T, eps, [(name, DATA, 1)], attempts=1)
            res.distance = approximation_distance(res.unitary(), T)
            return res
    budget = config.primitive_budget
    res = None
    for attempt in range(1, config.max_attempts + 1):
        delta = eps / (4 * math.pi * budget)
        cap = int(math.ceil(config.cap_factor / delta))
        steps = _build(T, _Builder(_table(cap), delta))
        res = UWSynthesis(T, eps, steps, delta=delta, cap=cap, attempts=attempt)
        res.distance = approximation_distance(res.unitary(), T)
        if res.distance <= eps:
            return res
        budget *= 4
    raise ResourceError(f"synthesis reached distance {res.distance:.3g} > eps={eps} ({res.report()})")
