"""Oracles and the query algorithms: Deutsch-Jozsa, Simon, Grover and its variants."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .circuit import Circuit, apply_query, execute, sample
from .errors import DomainError, ValidationError
from .state import StateVector, as_rng
from .transforms import estimate_phase, default_samples, level_failure_bound


# -- oracles ---------------------------------------------------------------

@dataclass(frozen=True)
class Oracle:
    table: tuple
    input_width: int
    output_width: int

    @property
    def size(self) -> int:
        return len(self.table)

    def __call__(self, i: int) -> int:
        return self.table[i]

    def query(self, state: StateVector, inputs: Sequence[int], outputs: Sequence[int]) -> StateVector:
        """|i>|j> -> |i>|j xor f(i)> on the given registers."""
        if len(inputs) != self.input_width or len(outputs) != self.output_width:
            raise DomainError("register widths do not match the oracle")
        return apply_query(state, self.table, inputs, outputs)


def make_oracle(table: Sequence[int], output_width: int | None = None) -> Oracle:
    table = tuple(int(v) for v in table)
    n = len(table).bit_length() - 1
    if len(table) == 0 or 1 << n != len(table):
        raise DomainError("oracle table length must be a power of two")
    if min(table) < 0:
        raise DomainError("oracle values must be nonnegative")
    need = max(1, max(table).bit_length())
    width = need if output_width is None else output_width
    if width < need:
        raise DomainError(f"values need {need} output bits")
    return Oracle(table, n, width)


def load_oracle_table(path) -> Oracle:
    """Read ``index value`` lines; an optional ``format binary|decimal`` line comes first.

    Binary files give indices and values as bit strings and the value width
    is the length of the longest value string.
    """
    fmt, entries, width = "decimal", {}, 0
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "format":
            if entries or len(tokens) != 2 or tokens[1] not in ("binary", "decimal"):
                raise ValidationError(f"line {lineno}: bad format line")
            fmt = tokens[1]
            continue
        if len(tokens) != 2:
            raise ValidationError(f"line {lineno}: expected 'index value'")
        base = 2 if fmt == "binary" else 10
        try:
            idx, val = int(tokens[0], base), int(tokens[1], base)
        except ValueError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from exc
        if idx in entries:
            raise ValidationError(f"line {lineno}: index {idx} repeated")
        entries[idx] = val
        if fmt == "binary":
            width = max(width, len(tokens[1]))
    if sorted(entries) != list(range(len(entries))):
        raise ValidationError("table indices must be exactly 0..N-1")
    return make_oracle([entries[i] for i in range(len(entries))], width or None)


@dataclass(frozen=True)
class PromiseTag:
    kind: str  # "constant", "balanced", "one_to_one", "two_to_one"
    s: int | None = None

    def __post_init__(self):
        if self.kind == "two_to_one" and not self.s:
            raise DomainError("two-to-one promise needs s != 0")


CONSTANT = PromiseTag("constant")
BALANCED = PromiseTag("balanced")
ONE_TO_ONE = PromiseTag("one_to_one")


def two_to_one(s: int) -> PromiseTag:
    return PromiseTag("two_to_one", s)


# -- Deutsch-Jozsa -----------------------------------------------------------

@dataclass
class DJResult:
    tag: PromiseTag
    outcome: str
    queries: int
    qubits: int
    zero_probability: float


def deutsch_jozsa_circuit(oracle: Oracle) -> Circuit:
    n = oracle.input_width
    c = Circuit(n + 1).add_oracle("f", oracle.table)
    c.add("x", n)
    for q in range(n + 1):
        c.add("h", q)
    c.query("f", range(n), [n])
    for q in range(n):
        c.add("h", q)
    return c


def deutsch_jozsa(oracle: Oracle, rng=None) -> DJResult:
    """One query; the first register reads 0^n iff f is constant (under the promise)."""
    if oracle.output_width != 1:
        raise DomainError("Deutsch-Jozsa needs a one-bit oracle")
    n = oracle.input_width
    circ = deutsch_jozsa_circuit(oracle).measure(range(n), "x")
    res = execute(circ, 0, rng)
    # Exact weight on 0^n, read from the pre-measurement state.
    pre = execute(deutsch_jozsa_circuit(oracle), 0).final_state
    p0 = float(np.sum(np.abs(pre.amplitudes[:2]) ** 2))
    outcome = res.outcome("x")
    tag = CONSTANT if int(outcome, 2) == 0 else BALANCED
    return DJResult(tag, outcome, res.queries, n + 1, p0)


# -- Simon ------------------------------------------------------------------

def _bits(row, n: int) -> int:
    return int(row, 2) if isinstance(row, str) else int(row)


def f2_nullspace(rows: Sequence, n: int) -> list:
    """Basis of {s in F2^n : row . s = 0 for every row} (bit 0 of a string is the MSB)."""
    pivots = {}  # pivot column -> reduced row
    for r in rows:
        r = _bits(r, n)
        for col, prow in pivots.items():
            if (r >> (n - 1 - col)) & 1:
                r ^= prow
        if r == 0:
            continue
        col = n - r.bit_length()
        for c2 in list(pivots):
            if (pivots[c2] >> (n - 1 - col)) & 1:
                pivots[c2] ^= r
        pivots[col] = r
    basis = []
    for free in range(n):
        if free in pivots:
            continue
        s = 1 << (n - 1 - free)
        for col, prow in pivots.items():
            if (prow >> (n - 1 - free)) & 1:
                s |= 1 << (n - 1 - col)
        basis.append(s)
    return basis


def dot2(a: int, b: int) -> int:
    return bin(a & b).count("1") & 1


@dataclass
class SimonResult:
    tag: PromiseTag | None  # None when the samples leave more than one candidate
    samples: list
    nullspace: list
    queries: int
    qubits: int


def simon_circuit(oracle: Oracle) -> Circuit:
    n = oracle.input_width
    m = oracle.output_width
    c = Circuit(n + m).add_oracle("f", oracle.table)
    for q in range(n):
        c.add("h", q)
    c.query("f", range(n), range(n, n + m))
    for q in range(n):
        c.add("h", q)
    c.measure(range(n, n + m), "y").measure(range(n), "k")
    return c


def simon_samples(oracle: Oracle, count: int, rng=None) -> list:
    res = sample(simon_circuit(oracle), 0, count, rng)
    out = []
    rng = as_rng(rng)
    for key, c in res.registers["k"].items():
        out.extend([int(key, 2)] * c)
    rng.shuffle(out)
    return out


def simon(oracle: Oracle, c: int = 4, rng=None) -> SimonResult:
    """c*n repetitions, then Gauss elimination on the sampled k's."""
    n = oracle.input_width
    reps = c * n
    ks = simon_samples(oracle, reps, rng)
    basis = f2_nullspace(ks, n)
    if not basis:
        tag = ONE_TO_ONE
    elif len(basis) == 1:
        tag = two_to_one(basis[0])
    else:
        tag = None
    return SimonResult(tag, ks, basis, reps, n + oracle.output_width)


def random_two_to_one(n: int, s: int, rng=None) -> list:
    """Random table with f(i) = f(i xor s) and distinct values across pairs."""
    rng = as_rng(rng)
    reps = sorted({min(i, i ^ s) for i in range(1 << n)})
    labels = rng.permutation(1 << n)[: len(reps)]
    table = [0] * (1 << n)
    for r, v in zip(reps, labels):
        table[r] = table[r ^ s] = int(v)
    return table


# -- Grover -------------------------------------------------------------------

@dataclass
class GroverGeometry:
    N: int
    t: int
    iterations: int = 0

    @property
    def theta(self) -> float:
        return math.asin(math.sqrt(self.t / self.N))

    def success_probability(self, q: int | None = None) -> float:
        q = self.iterations if q is None else q
        return math.sin((2 * q + 1) * self.theta) ** 2


def grover_iterations(N: int, t: int) -> int:
    return int(math.floor(math.pi / 4 * math.sqrt(N / t)))


def reflection_zero(n: int) -> np.ndarray:
    """R_0 = 2|0><0| - I."""
    d = -np.ones(1 << n, dtype=complex)
    d[0] = 1
    return np.diag(d)


def grover_circuit(oracle: Oracle, q: int, measure: bool = True) -> Circuit:
    """|a> = H^n|0>; q rounds of R_a R_b; R_b is a query on a |-> ancilla."""
    if oracle.output_width != 1:
        raise DomainError("Grover needs a one-bit oracle")
    n = oracle.input_width
    c = Circuit(n + 1).add_oracle("f", oracle.table)
    c.add("x", n).add("h", n)
    for k in range(n):
        c.add("h", k)
    r0 = reflection_zero(n)
    for _ in range(q):
        c.query("f", range(n), [n])
        for k in range(n):
            c.add("h", k)
        c.add_matrix(r0, range(n), "r0")
        for k in range(n):
            c.add("h", k)
    c.add("h", n).add("x", n)
    if measure:
        c.measure(range(n), "i")
    return c


def grover_states(oracle: Oracle, q: int) -> list:
    """Data-register state after each round 0..q (ancilla returned to |0>)."""
    states = []
    for k in range(q + 1):
        st = execute(grover_circuit(oracle, k, measure=False)).final_state
        states.append(st.amplitudes[0::2].copy())
    return states


@dataclass
class GroverResult:
    index: int
    found: bool
    iterations: int
    success_probability: float
    queries: int
    qubits: int
    histogram: dict = field(default_factory=dict)


def grover_search(oracle: Oracle, t: int, rng=None, shots: int = 1,
                  iterations: int | None = None) -> GroverResult:
    """Run the boxed search ``shots`` times and return the most frequent outcome."""
    if t < 1:
        raise DomainError("grover_search needs at least one marked item")
    N = oracle.size
    q = grover_iterations(N, t) if iterations is None else iterations
    geo = GroverGeometry(N, t, q)
    res = sample(grover_circuit(oracle, q), 0, shots, rng)
    hist = {int(k, 2): v for k, v in res.registers["i"].items()}
    index = max(sorted(hist), key=hist.get)
    return GroverResult(index, oracle(index) == 1, q, geo.success_probability(), res.queries,
                        oracle.input_width + 1, hist)


def _grover_vector(marked: np.ndarray, q: int) -> np.ndarray:
    """Amplitudes after q rounds, via sign flip then inversion about the mean.

    Matches grover_circuit on the data register (checked in the tests) and is
    used inside the hot loops of the minimum search.
    """
    N = len(marked)
    a = np.full(N, 1 / math.sqrt(N))
    for _ in range(q):
        a = np.where(marked, -a, a)
        a = 2 * a.mean() - a
    return a


# -- minimum finding ----------------------------------------------------------

@dataclass
class MinimumResult:
    index: int
    value: int
    queries: int
    thresholds: list = field(default_factory=list)


def _threshold_search(marked: np.ndarray, rng, passes: int = 2):
    """Find a marked index with unknown marked count; returns (index or None, queries).

    A ladder of iteration caps 1, 2, 4, ... up to sqrt(N); each rung runs a
    random number of rounds below the cap and checks the outcome classically.
    """
    N = len(marked)
    queries = 0
    top = int(math.ceil(math.sqrt(N)))
    for _ in range(passes):
        cap = 1
        while True:
            q = int(rng.integers(0, cap))
            p = _grover_vector(marked, q) ** 2
            i = int(rng.choice(N, p=p / p.sum()))
            queries += q + 1  # q rounds plus the classical check query
            if marked[i]:
                return i, queries
            if cap >= top:
                break
            cap = min(2 * cap, top)
    return None, queries


def find_minimum(values: Sequence[int], rng=None) -> MinimumResult:
    """Index of the smallest value (smallest index on ties) by threshold binary search.

    Keys f(i) * N + i are distinct, so the tie rule is built in.  The search
    keeps lo <= min key <= hi; each step asks for an index below the midpoint.
    """
    rng = as_rng(rng)
    vals = np.asarray(values, dtype=np.int64)
    N = len(vals)
    if N == 0 or N & (N - 1):
        raise DomainError("table length must be a power of two")
    if vals.min() < 0:
        raise DomainError("values must be nonnegative")
    keys = vals * N + np.arange(N)
    best = 0
    lo, hi = 0, int(keys[best])
    queries, trace = 0, []
    while lo < hi:
        theta = (lo + hi + 1) // 2
        i, q = _threshold_search(keys < theta, rng)
        queries += q
        trace.append((theta, i))
        if i is not None:
            best, hi = i, int(keys[i])
        else:
            lo = theta
    return MinimumResult(best, int(vals[best]), queries, trace)


# -- amplitude estimation, median and mean -------------------------------------

def grover_plane(fraction: float) -> tuple:
    """Grover operator and start state in the plane (|bad>, |good>).

    With sin^2 theta = fraction the start |a> = (cos theta, sin theta) and
    R_a R_b is the rotation by 2 theta.
    """
    th = math.asin(math.sqrt(min(max(fraction, 0.0), 1.0)))
    a = np.array([math.cos(th), math.sin(th)], dtype=complex)
    rb = np.diag([1.0, -1.0]).astype(complex)
    ra = 2 * np.outer(a, a.conj()) - np.eye(2)
    return ra @ rb, a


@dataclass
class FractionEstimate:
    value: float
    queries: int
    precision_bits: int
    failure_bound: float


def estimate_fraction(marked: np.ndarray, precision: float, failure: float, rng=None) -> FractionEstimate:
    """Estimate t/N for the marked set by phase estimation on the Grover operator.

    The eigenphases are +-2 theta with sin^2 theta = t/N; either sign gives the
    same sin^2.  Resolving 2 theta to 2 pi / 2^{n+1} keeps the fraction within
    pi / 2^{n+1}, so n = ceil(log2(pi / precision)) - 1 suffices.
    """
    rng = as_rng(rng)
    marked = np.asarray(marked, dtype=bool)
    frac = marked.mean()
    G, a = grover_plane(frac)
    n = max(1, math.ceil(math.log2(math.pi / precision)) - 1)
    m = default_samples(n, 0)
    while (n + 1) * level_failure_bound(m) > failure:
        m += 48
    powers = {}

    def apply(v, j):
        if j not in powers:
            powers[j] = np.linalg.matrix_power(G, 2 ** j)
        return powers[j] @ v

    est = estimate_phase(apply, a, n, m=m, rng=rng)
    value = math.sin(est.theta / 2) ** 2
    queries = sum(2 * m * 2 ** j for j in range(n + 1))
    return FractionEstimate(value, queries, n, (n + 1) * level_failure_bound(m))


@dataclass
class MedianResult:
    value: int
    queries: int
    estimates: list = field(default_factory=list)


def estimate_median(values: Sequence[int], eps: float, rng=None, failure: float = 0.01) -> MedianResult:
    """Value M with at most (1 + eps) N / 2 entries strictly below and strictly above it.

    Binary search for the smallest M whose estimated fraction of f <= M
    reaches 1/2 - eps/4, each fraction estimated within eps / 8.  The slack
    makes the search stop on a value that occurs in the table when the true
    fraction sits exactly at 1/2.
    """
    if not 0 < eps < 0.5:
        raise DomainError("eps must lie in (0, 1/2)")
    rng = as_rng(rng)
    vals = np.asarray(values, dtype=np.int64)
    if len(vals) == 0 or len(vals) & (len(vals) - 1):
        raise DomainError("table length must be a power of two")
    if vals.min() < 0:
        raise DomainError("median search expects nonnegative table values")
    lo = -1  # fraction of f <= lo is exactly 0 for nonnegative values
    hi = (1 << max(1, int(vals.max()).bit_length())) - 1  # fraction of f <= hi is 1
    steps = max(1, math.ceil(math.log2(hi - lo)))
    queries, trace = 0, []
    while hi - lo > 1:
        mid = (lo + hi) // 2
        est = estimate_fraction(vals <= mid, eps / 8, failure / steps, rng)
        queries += est.queries
        trace.append((mid, est.value))
        if est.value >= 0.5 - eps / 4:
            hi = mid
        else:
            lo = mid
    return MedianResult(hi, queries, trace)


@dataclass
class MeanResult:
    value: float
    queries: int
    digits: list = field(default_factory=list)


def estimate_mean(values: Sequence[float], eps: float, rng=None, failure: float = 0.01) -> MeanResult:
    """Mean of values in [-1/2, 1/2] from the binary digits of f + 1/2.

    D = ceil(log2(2/eps)) digits truncate by at most eps/2; each digit's
    fraction of ones is estimated within eps/2, and sum 2^{-j} < 1 keeps the
    combined digit error below eps/2.
    """
    if not 0 < eps < 0.5:
        raise DomainError("eps must lie in (0, 1/2)")
    rng = as_rng(rng)
    y = np.asarray(values, dtype=float) + 0.5
    if y.min() < -1e-12 or y.max() > 1 + 1e-12:
        raise DomainError("values must lie in [-1/2, 1/2]")
    D = math.ceil(math.log2(2 / eps))
    scaled = np.minimum(np.floor(np.clip(y, 0, 1) * 2 ** D), 2 ** D - 1).astype(np.int64)
    total, queries, digits = 0.0, 0, []
    for j in range(1, D + 1):
        marked = ((scaled >> (D - j)) & 1).astype(bool)
        est = estimate_fraction(marked, eps / 2, failure / D, rng)
        digits.append(est.value)
        queries += est.queries
        total += est.value / 2 ** j
    return MeanResult(total - 0.5, queries, digits)
