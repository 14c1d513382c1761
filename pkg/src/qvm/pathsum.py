"""Polynomial-space path-sum amplitudes and the stochastic-circuit comparator.

An amplitude <j|C|i> is the sum over classical configuration sequences of
the product of the gate matrix entries along the way.  The evaluator walks
that tree depth first, branching over 2^k outputs of each k-qubit gate, so
only one configuration per time step is alive at any moment.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import Circuit, GateOp, Measure, query_permutation
from .errors import DomainError, ResourceError, ValidationError
from .state import apply_matrix, as_rng


@dataclass
class PathStats:
    paths: int = 0  # complete paths reaching the end with nonzero weight
    nodes: int = 0
    max_frames: int = 0  # deepest simultaneous recursion (configuration records)


def _bit(x: int, q: int, n: int) -> int:
    return (x >> (n - 1 - q)) & 1


def _steps(circuit: Circuit) -> list:
    """Each op as (targets, matrix) or (None, permutation over the full index)."""
    out = []
    n = circuit.num_qubits
    for op in circuit.ops:
        if isinstance(op, Measure):
            raise DomainError("path sums need a measurement-free circuit")
        if isinstance(op, GateOp):
            out.append((op.targets, op.gate.matrix))
        else:
            table = circuit.oracles[op.oracle_id]
            out.append((op.qubits, query_permutation(n, table, op.inputs, op.outputs)))
    return out


def path_amplitude(circuit: Circuit, i: int, j: int, stats: PathStats | None = None) -> complex:
    circuit.validate()
    n = circuit.num_qubits
    if not (0 <= i < 1 << n and 0 <= j < 1 << n):
        raise DomainError("basis index out of range")
    steps = _steps(circuit)
    depth = len(steps)
    # Qubits whose last use is at step t must already agree with j afterwards.
    last = {}
    for t, (qs, _) in enumerate(steps):
        for q in qs:
            last[q] = t
    settle = [[] for _ in range(depth)]
    for q, t in last.items():
        settle[t].append(q)
    for q in range(n):
        if q not in last and _bit(i, q, n) != _bit(j, q, n):
            return 0j
    stats = stats if stats is not None else PathStats()
    frames = 0

    def walk(t: int, x: int) -> complex:
        nonlocal frames
        frames += 1
        stats.max_frames = max(stats.max_frames, frames)
        stats.nodes += 1
        try:
            if t == depth:
                stats.paths += 1
                return 1.0 + 0j
            qs, m = steps[t]
            if m.ndim == 1:  # oracle permutation: exactly one successor
                y = int(m[x])
                if any(_bit(y, q, n) != _bit(j, q, n) for q in settle[t]):
                    return 0j
                return walk(t + 1, y)
            k = len(qs)
            col = 0
            for q in qs:
                col = (col << 1) | _bit(x, q, n)
            base = x
            for q in qs:
                base &= ~(1 << (n - 1 - q))
            total = 0j
            for row in range(1 << k):
                w = m[row, col]
                if w == 0:
                    continue
                y = base
                for pos, q in enumerate(qs):
                    if (row >> (k - 1 - pos)) & 1:
                        y |= 1 << (n - 1 - q)
                if any(_bit(y, q, n) != _bit(j, q, n) for q in settle[t]):
                    continue
                total += w * walk(t + 1, y)
            return total
        finally:
            frames -= 1

    return complex(walk(0, i))


def path_distribution(circuit: Circuit, i: int, max_qubits: int = 12) -> np.ndarray:
    n = circuit.num_qubits
    if n > max_qubits:
        raise ResourceError(f"enumerating 2^{n} outcomes exceeds the {max_qubits}-qubit limit")
    return np.array([abs(path_amplitude(circuit, i, j)) ** 2 for j in range(1 << n)])


def random_circuit(n: int, depth: int, rng=None) -> Circuit:
    """Random gate-only circuit over the named gate set."""
    rng = as_rng(rng)
    one = ["h", "x", "y", "z", "u", "w"]
    circ = Circuit(n)
    for _ in range(depth):
        kind = rng.integers(5) if n >= 3 else rng.integers(4)
        if kind == 0 or n == 1:
            circ.add(str(rng.choice(one)), int(rng.integers(n)))
        elif kind == 1:
            circ.add("g", int(rng.integers(n)), params=(float(rng.uniform(0, math.pi)), float(rng.uniform(0, 2 * math.pi))))
        elif kind == 2:
            a, b = rng.choice(n, 2, replace=False)
            circ.add(str(rng.choice(["cnot", "swap"])), int(a), int(b))
        elif kind == 3:
            a, b = rng.choice(n, 2, replace=False)
            circ.add("crk", int(a), int(b), params=(int(rng.integers(1, 5)),))
        else:
            a, b, c = rng.choice(n, 3, replace=False)
            circ.add("toffoli", int(a), int(b), int(c))
    return circ


# -- stochastic circuits ------------------------------------------------------------

R_MATRIX = np.full((2, 2), 0.5)
_NAMED_STOCHASTIC = {
    "r": R_MATRIX,
    "i": np.eye(2),
    "x": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "not": np.array([[0.0, 1.0], [1.0, 0.0]]),
}


@dataclass
class StochasticCircuit:
    num_qubits: int
    nodes: list = field(default_factory=list)  # (name, matrix, targets)

    def add(self, matrix, targets: Sequence[int], name: str = "matrix") -> "StochasticCircuit":
        m = np.asarray(matrix, dtype=float)
        check_stochastic(m)
        targets = tuple(int(t) for t in targets)
        if m.shape[0] != 1 << len(targets):
            raise DomainError("matrix size does not match the target count")
        if any(not 0 <= t < self.num_qubits for t in targets) or len(set(targets)) != len(targets):
            raise DomainError(f"bad targets {targets}")
        self.nodes.append((name, m, targets))
        return self

    def add_named(self, name: str, *targets: int) -> "StochasticCircuit":
        if name not in _NAMED_STOCHASTIC:
            raise DomainError(f"unknown stochastic gate {name!r}")
        return self.add(_NAMED_STOCHASTIC[name], targets, name)


def check_stochastic(m: np.ndarray, tol: float = 1e-12) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError("stochastic matrix must be square")
    if (m < 0).any():
        raise ValidationError("stochastic matrix has a negative entry")
    if np.max(np.abs(m.sum(axis=0) - 1)) > tol:
        raise ValidationError("stochastic matrix columns must sum to 1")


def stochastic_simulate(sc: StochasticCircuit, initial) -> np.ndarray:
    """Propagate a distribution (or a basis index) through the matrix chain."""
    n = sc.num_qubits
    if np.isscalar(initial):
        p = np.zeros(1 << n)
        p[int(initial)] = 1.0
    else:
        p = np.asarray(initial, dtype=float).copy()
        if p.shape != (1 << n,):
            raise DomainError("distribution has the wrong length")
    for _, m, targets in sc.nodes:
        p = apply_matrix(p, n, m, targets)
    return p


_MATRIX_RE = re.compile(r"^matrix\(([^)]*)\)$")


def parse_stochastic(text: str) -> StochasticCircuit:
    """``stochastic N`` header, then ``r q``, ``x q`` or ``matrix(a,b;c,d) q ...`` lines."""
    sc = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            if tokens[0] == "stochastic":
                sc = StochasticCircuit(int(tokens[1]))
                continue
            if sc is None:
                raise ValidationError("missing 'stochastic N' header")
            targets = [int(t) for t in tokens[1:]]
            m = _MATRIX_RE.match(tokens[0])
            if m:
                rows = [[float(v) for v in row.split(",")] for row in m.group(1).split(";")]
                sc.add(rows, targets)
            else:
                sc.add_named(tokens[0], *targets)
        except (ValueError, IndexError) as exc:
            raise ValidationError(f"line {lineno}: {exc}") from exc
    if sc is None:
        raise ValidationError("empty stochastic circuit text")
    return sc


def render_stochastic(sc: StochasticCircuit) -> str:
    lines = [f"stochastic {sc.num_qubits}"]
    for name, m, targets in sc.nodes:
        head = name if name in _NAMED_STOCHASTIC else (
            "matrix(" + ";".join(",".join(repr(float(v)) for v in row) for row in m) + ")"
        )
        lines.append(head + " " + " ".join(map(str, targets)))
    return "\n".join(lines) + "\n"


def interference_example() -> tuple:
    """Three Hadamards (second qubit, first qubit, second qubit) on |11>, and
    the same wiring with the fair-coin matrix R in place of H."""
    quantum = Circuit(2).add("h", 1).add("h", 0).add("h", 1)
    classical = StochasticCircuit(2).add_named("r", 1).add_named("r", 0).add_named("r", 1)
    return quantum, classical
