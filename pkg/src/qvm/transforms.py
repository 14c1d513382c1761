"""Fourier transforms over Z_2^n and Z_Q, Fourier-state preparation and phase estimation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .circuit import Circuit, GateOp, run_unitary
from .errors import DomainError, ValidationError
from .gates import named_gate
from .state import StateVector, apply_diagonal, apply_gate, apply_matrix, as_rng

TWO_PI = 2 * math.pi


def circle_distance(a: float, b: float) -> float:
    d = (a - b) % TWO_PI
    return min(d, TWO_PI - d)


# -- transforms over Z_2^n and Z_{2^m} -------------------------------------

def qft_z2n(state: StateVector, qubits: Sequence[int]) -> StateVector:
    """Fourier transform over Z_2^n: a Hadamard on every listed qubit."""
    h = named_gate("h")
    for q in qubits:
        state = apply_gate(state, h, [q])
    return state


def qfft_circuit(m: int, qubits: Sequence[int] | None = None, cutoff: int | None = None,
                 num_qubits: int | None = None) -> Circuit:
    """H / controlled-R_k array for the transform over Z_{2^m}, then bit reversal.

    Controlled R_k gates with k > cutoff are left out (approximate transform).
    """
    qubits = list(range(m)) if qubits is None else list(qubits)
    if len(qubits) != m:
        raise DomainError("need exactly m qubits")
    circ = Circuit(num_qubits or (max(qubits) + 1))
    for j in range(m):
        circ.add("h", qubits[j])
        for k in range(2, m - j + 1):
            if cutoff is None or k <= cutoff:
                circ.add("crk", qubits[j + k - 1], qubits[j], params=(k,))
    for j in range(m // 2):
        circ.add("swap", qubits[j], qubits[m - 1 - j])
    return circ


def qfft_mod2m(state: StateVector, qubits: Sequence[int] | None = None) -> StateVector:
    """|a> -> 2^{-m/2} sum_b e^{2 pi i a b / 2^m} |b> on the listed register (first = MSB)."""
    qubits = list(range(state.num_qubits)) if qubits is None else list(qubits)
    return run_unitary(qfft_circuit(len(qubits), qubits, num_qubits=state.num_qubits), state)


def approx_qfft(state: StateVector, qubits: Sequence[int] | None, cutoff: int) -> StateVector:
    if cutoff < 1:
        raise DomainError("cutoff must be >= 1")
    qubits = list(range(state.num_qubits)) if qubits is None else list(qubits)
    circ = qfft_circuit(len(qubits), qubits, cutoff, num_qubits=state.num_qubits)
    return run_unitary(circ, state)


def inverse_qfft(state: StateVector, qubits: Sequence[int] | None = None) -> StateVector:
    qubits = list(range(state.num_qubits)) if qubits is None else list(qubits)
    return run_unitary(qfft_circuit(len(qubits), qubits, num_qubits=state.num_qubits).inverse(), state)


def approx_qfft_bound(m: int, cutoff: int) -> float:
    """Sum over omitted gates of ||R_k - I|| = |1 - e^{2 pi i / 2^k}|."""
    return float(sum((m - k + 1) * abs(1 - np.exp(2j * math.pi / 2 ** k)) for k in range(cutoff + 1, m + 1)))


def dft_matrix(Q: int) -> np.ndarray:
    a = np.arange(Q)
    return np.exp(2j * math.pi * np.outer(a, a) / Q) / math.sqrt(Q)


def fourier_state(Q: int, a: int, width: int | None = None) -> StateVector:
    """|Psi_{Q,a}> = Q^{-1/2} sum_{b<Q} e^{2 pi i a b / Q} |b>."""
    width = max(1, math.ceil(math.log2(Q))) if width is None else width
    amps = np.zeros(1 << width, dtype=complex)
    b = np.arange(Q)
    amps[:Q] = np.exp(2j * math.pi * a * b / Q) / math.sqrt(Q)
    return StateVector(width, amps)


# -- Fourier states over arbitrary Z_Q --------------------------------------

def _split_gate(q0: int, q: int) -> np.ndarray:
    a, b = math.sqrt(q0 / q), math.sqrt((q - q0) / q)
    return np.array([[a, -b], [b, a]], dtype=complex)


def prepare_fourier_zero(Q: int, width: int | None = None) -> StateVector:
    """Uniform superposition over 0..Q-1, built by the recursive split Q = Q0 + Q1.

    Each qubit, conditioned on the value of the qubits before it, gets the
    one-qubit gate |0> -> sqrt(Q0/Q)|0> + sqrt(Q1/Q)|1>.
    """
    if Q < 2:
        raise DomainError("Q must be >= 2")
    width = max(1, math.ceil(math.log2(Q))) if width is None else width
    if Q > 1 << width:
        raise DomainError("register too small for Q")
    amps = np.zeros(1 << width, dtype=complex)
    amps[0] = 1.0
    # counts[p] = how many values remain to spread under prefix p
    counts = {0: Q}
    for level in range(width):
        half = 1 << (width - level - 1)
        view = amps.reshape(1 << level, 2, -1)
        nxt = {}
        for prefix, q in counts.items():
            q0 = min(q, half)
            if q - q0 > 0:
                view[prefix] = _split_gate(q0, q) @ view[prefix]
            nxt[2 * prefix] = q0
            if q - q0:
                nxt[2 * prefix + 1] = q - q0
        counts = nxt
    out = StateVector(width, amps)
    out.check_norm()
    return out


def phase_kick(state: StateVector, Q: int, a_qubits: Sequence[int], b_qubits: Sequence[int]) -> StateVector:
    """|a, b> -> e^{2 pi i a b / Q} |a, b>."""
    qubits = list(a_qubits) + list(b_qubits)
    k = len(qubits)
    vals = np.arange(1 << k)
    a = vals >> len(b_qubits)
    b = vals & ((1 << len(b_qubits)) - 1)
    return apply_diagonal(state, np.exp(2j * math.pi * a * b / Q), qubits)


# -- phase estimation ------------------------------------------------------

@dataclass
class PhaseEstimate:
    theta: float
    precision_bits: int
    levels: list = field(default_factory=list)  # (j, ones_cos, ones_sin, m)
    coarse: list = field(default_factory=list)
    failure_bound: float = 1.0
    state: np.ndarray | None = None
    trials: int = 0

    def report(self) -> dict:
        return {
            "theta": self.theta,
            "precision_bits": self.precision_bits,
            "samples_per_level": self.levels[0][3] if self.levels else 0,
            "failure_bound": self.failure_bound,
            "levels": [list(x) for x in self.levels],
        }


def default_samples(n: int, safety: int) -> int:
    return 48 * (n + safety)


def level_failure_bound(m: int) -> float:
    """Hoeffding bound that a level's angle misses by more than pi/8.

    Each of the two frequencies is off by at most t = 0.135 except with
    probability 2 exp(-2 m t^2); both within t keeps the atan2 angle error
    below pi/8.
    """
    return min(1.0, 4 * math.exp(-2 * m * 0.135 ** 2))


def reconstruct_theta(coarse: Sequence[float], tol: float = math.pi / 8) -> float:
    """Refine theta from estimates of 2^j theta (j = 0..n), highest level first.

    Each halving step picks between x/2 and x/2 + pi whichever lands closer
    to the coarse value one level down.
    """
    if not len(coarse):
        raise DomainError("need at least one level")
    x = coarse[-1] % TWO_PI
    err = tol
    for j in range(len(coarse) - 2, -1, -1):
        c1, c2 = x / 2, x / 2 + math.pi
        d1, d2 = circle_distance(c1, coarse[j]), circle_distance(c2, coarse[j])
        x, d = (c1, d1) if d1 <= d2 else (c2, d2)
        err /= 2
        if d > tol + err + 1e-9:
            raise ValidationError(f"level {j} is inconsistent with higher levels (off by {d:.3g})")
    return x % TWO_PI


def _as_power(op) -> Callable:
    if callable(op):
        return op
    mat = np.asarray(op, dtype=complex)
    cache = {}

    def apply(v, j):
        if j not in cache:
            cache[j] = np.linalg.matrix_power(mat, 2 ** j)
        return cache[j] @ v

    return apply


def estimate_phase(controlled_powers, state, n: int, m: int | None = None, safety: int = 7,
                   rng=None) -> PhaseEstimate:
    """Estimate theta with U|v> = e^{i theta}|v>, from biased single-qubit interferometers.

    ``controlled_powers(v, j)`` returns U^{2^j} v (a matrix is also accepted).
    Level j runs m trials with control phase 0, whose one-frequency is
    (1 - cos 2^j theta)/2, and m with an extra i phase, giving
    (1 + sin 2^j theta)/2.  Each trial collapses the register as a real
    control measurement would, so superpositions of eigenvectors behave
    physically.
    """
    rng = as_rng(rng)
    apply = _as_power(controlled_powers)
    if m is None:
        m = default_samples(n, safety)
    v = np.asarray(getattr(state, "amplitudes", state), dtype=complex).copy()
    levels, coarse, trials = [], [], 0
    for j in range(n + 1):
        w = apply(v, j)
        ov = np.vdot(v, w)
        eigen = abs(abs(ov) - 1.0) < 1e-9
        ones = []
        for chi in (1.0, 1j):
            if eigen:
                p1 = (1 - (chi * ov).real) / 2
                k = int(rng.binomial(m, min(max(p1, 0.0), 1.0)))
            else:
                k = 0
                for _ in range(m):
                    w = apply(v, j)
                    minus = (v - chi * w) / 2
                    p1 = float(np.vdot(minus, minus).real)
                    if rng.random() < p1:
                        k += 1
                        v = minus / math.sqrt(p1)
                    else:
                        plus = (v + chi * w) / 2
                        v = plus / np.linalg.norm(plus)
            ones.append(k)
            trials += m
        c = 1 - 2 * ones[0] / m
        s = 2 * ones[1] / m - 1
        levels.append((j, ones[0], ones[1], m))
        coarse.append(math.atan2(s, c) % TWO_PI)
    theta = reconstruct_theta(coarse)
    bound = min(1.0, (n + 1) * level_failure_bound(m))
    return PhaseEstimate(theta, n, levels, coarse, bound, v, trials)


def counting_register_ones(unitary, v, j: int, m: int, chi: complex = 1.0) -> np.ndarray:
    """Distribution of the number of 1s when m control qubits each drive U^{2^j}.

    Explicit unitary construction on m + k qubits (m <= 12): controls in
    |+>, optional phase chi on |1>, controlled powers, Hadamards, read out.
    """
    if m > 12:
        raise DomainError("explicit counting register limited to m <= 12")
    U = np.linalg.matrix_power(np.asarray(unitary, dtype=complex), 2 ** j)
    v = np.asarray(v, dtype=complex)
    k = int(round(math.log2(len(v))))
    n = m + k
    amps = np.kron(np.ones(1 << m) / math.sqrt(1 << m), v).astype(complex)
    cu = np.eye(2 * len(v), dtype=complex)
    cu[len(v):, len(v):] = chi * U
    reg = list(range(m, n))
    for c in range(m):
        amps = apply_matrix(amps, n, cu, [c] + reg)
    h = named_gate("h").matrix
    for c in range(m):
        amps = apply_matrix(amps, n, h, [c])
    probs = np.abs(amps.reshape(1 << m, -1)) ** 2
    per_value = probs.sum(axis=1)
    ones = np.array([bin(x).count("1") for x in range(1 << m)])
    return np.bincount(ones, weights=per_value, minlength=m + 1)


# -- garbage-free wrapping -------------------------------------------------

def garbage_free(compute: Circuit, result_qubits: Sequence[int]) -> Circuit:
    """compute, CNOT-copy the result onto fresh qubits, then undo compute.

    The returned circuit acts on compute.num_qubits + len(result_qubits)
    qubits; the copy lands on the appended ones.
    """
    base = compute.num_qubits
    out = Circuit(base + len(result_qubits), oracles=dict(compute.oracles))
    out.ops.extend(compute.ops)
    for k, q in enumerate(result_qubits):
        out.ops.append(GateOp("cnot", (q, base + k)))
    out.ops.extend(compute.inverse().ops)
    return out
