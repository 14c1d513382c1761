"""Local Pauli noise, CSS codes (Steane's in particular) and the threshold recursion."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DomainError, ValidationError
from .gates import named_gate
from .oracles import dot2, f2_nullspace
from .state import (
    StateVector,
    apply_gate,
    apply_matrix,
    as_rng,
    discard,
    measure_qubits,
    tensor,
    basis_state,
)

_PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, 1], [-1, 0]], dtype=complex),  # i sigma_y = XZ
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
KINDS = ("X", "Y", "Z")


# -- noise ------------------------------------------------------------------------

@dataclass
class NoiseModel:
    """Each qubit independently suffers an error with probability eta; the kind
    is drawn from (px, py, pz)."""

    eta: float
    px: float = 1 / 3
    py: float = 1 / 3
    pz: float = 1 / 3

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError("eta must lie in [0, 1]")
        if min(self.px, self.py, self.pz) < 0 or abs(self.px + self.py + self.pz - 1) > 1e-12:
            raise DomainError("error-kind distribution must be nonnegative and sum to 1")

    @classmethod
    def bit_flip(cls, eta: float) -> "NoiseModel":
        return cls(eta, 1.0, 0.0, 0.0)

    @property
    def kind_probs(self) -> np.ndarray:
        return np.array([self.px, self.py, self.pz])

    def sample_patterns(self, shots: int, m: int, rng=None) -> np.ndarray:
        """(shots, m) array of 0 = I, 1 = X, 2 = Y, 3 = Z."""
        rng = as_rng(rng)
        hit = rng.random((shots, m)) < self.eta
        kind = rng.choice(3, size=(shots, m), p=self.kind_probs) + 1
        return np.where(hit, kind, 0).astype(np.int8)


@dataclass(frozen=True)
class PauliError:
    qubit: int
    kind: str

    def __post_init__(self):
        if self.kind not in _PAULI:
            raise DomainError(f"unknown Pauli kind {self.kind!r}")

    @property
    def matrix(self) -> np.ndarray:
        return _PAULI[self.kind]


def apply_pauli(state: StateVector, errors: Sequence[PauliError]) -> StateVector:
    amps = state.amplitudes
    for e in errors:
        amps = apply_matrix(amps, state.num_qubits, e.matrix, [e.qubit])
    return StateVector(state.num_qubits, amps)


def apply_noise(state: StateVector, model: NoiseModel, rng=None, qubits: Sequence[int] | None = None):
    """Independent Pauli errors on ``qubits`` (default: all); returns (state, errors)."""
    rng = as_rng(rng)
    qubits = range(state.num_qubits) if qubits is None else qubits
    errors = []
    for q in qubits:
        if rng.random() < model.eta:
            errors.append(PauliError(q, KINDS[int(rng.choice(3, p=model.kind_probs))]))
    return apply_pauli(state, errors), errors


def apply_gate_noise(state: StateVector, targets: Sequence[int], eta: float, rng=None):
    """Correlated error on a gate's qubits: with probability eta a uniformly
    random non-identity Pauli string over ``targets``."""
    rng = as_rng(rng)
    if rng.random() >= eta:
        return state, []
    choices = [p for p in itertools.product("IXYZ", repeat=len(targets)) if set(p) != {"I"}]
    pick = choices[int(rng.integers(len(choices)))]
    errors = [PauliError(q, k) for q, k in zip(targets, pick) if k != "I"]
    return apply_pauli(state, errors), errors


def discretization_expand(eta: float, m: int, cutoff: int) -> tuple:
    """Binomial mass C(m, j) eta^j (1-eta)^(m-j) for j <= cutoff, and the tail beyond."""
    if not 0 <= cutoff <= m:
        raise DomainError("need 0 <= cutoff <= m")
    masses = [math.comb(m, j) * eta ** j * (1 - eta) ** (m - j) for j in range(cutoff + 1)]
    tail = sum(math.comb(m, j) * eta ** j * (1 - eta) ** (m - j) for j in range(cutoff + 1, m + 1))
    return masses, tail


# -- classical codes over F2 --------------------------------------------------------

def _word(v, m: int) -> int:
    if isinstance(v, str):
        if len(v) != m or set(v) - {"0", "1"}:
            raise DomainError(f"{v!r} is not a length-{m} bit string")
        return int(v, 2)
    return int(v)


def f2_rank(rows: Sequence[int]) -> int:
    lead = {}  # highest set bit -> basis row
    for r in rows:
        while r:
            top = r.bit_length()
            if top not in lead:
                lead[top] = r
                break
            r ^= lead[top]
    return len(lead)


def weight(v: int) -> int:
    return bin(v).count("1")


@dataclass
class LinearCodeF2:
    length: int
    rows: list

    def __post_init__(self):
        self.rows = [_word(r, self.length) for r in self.rows]
        if any(r >> self.length for r in self.rows):
            raise DomainError("generator row longer than the code length")
        if f2_rank(self.rows) != len(self.rows):
            raise ValidationError("generator rows are not linearly independent")

    @property
    def dim(self) -> int:
        return len(self.rows)

    def codewords(self) -> list:
        out = []
        for mask in range(1 << self.dim):
            w = 0
            for k, r in enumerate(self.rows):
                if (mask >> k) & 1:
                    w ^= r
            out.append(w)
        return sorted(out)

    def contains(self, v) -> bool:
        v = _word(v, self.length)
        return f2_rank(self.rows + [v]) == self.dim

    def min_distance(self) -> int:
        return min((weight(w) for w in self.codewords() if w), default=self.length + 1)

    def bitstrings(self) -> list:
        return [format(r, f"0{self.length}b") for r in self.rows]


def dual_code(code: LinearCodeF2) -> LinearCodeF2:
    """{v : v . c = 0 for all c in C}."""
    return LinearCodeF2(code.length, f2_nullspace(code.rows, code.length))


def load_code(path) -> LinearCodeF2:
    """Generator matrix file: one row of 0/1 characters per line, # comments."""
    rows = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line)
    if not rows:
        raise ValidationError("no generator rows")
    if len({len(r) for r in rows}) != 1:
        raise ValidationError("generator rows have different lengths")
    return LinearCodeF2(len(rows[0]), rows)


HAMMING_DUAL_ROWS = ["1010101", "0110011", "0001111"]


def hamming_code() -> LinearCodeF2:
    """The [7,4] Hamming code, the dual of the span of the three rows above."""
    return dual_code(LinearCodeF2(7, HAMMING_DUAL_ROWS))


# -- CSS codes -----------------------------------------------------------------------

@dataclass
class CssCode:
    code: LinearCodeF2
    dual: LinearCodeF2 = None
    representatives: list = field(default_factory=list)
    correctable: int = 0
    _decoder: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.dual = dual_code(self.code)
        if not all(self.code.contains(r) for r in self.dual.rows):
            raise ValidationError("the dual code must be contained in the code")
        # Extend a basis of C-perp to one of C; the extra rows label the cosets.
        basis = list(self.dual.rows)
        extra = []
        for r in self.code.rows:
            if f2_rank(basis + [r]) > len(basis):
                basis.append(r)
                extra.append(r)
        self.representatives = extra
        self.correctable = (self.code.min_distance() - 1) // 2
        self._decoder = self._build_decoder()

    @property
    def length(self) -> int:
        return self.code.length

    @property
    def logical_qubits(self) -> int:
        return self.code.dim - self.dual.dim

    @property
    def checks(self) -> list:
        """Parity checks of C: the generator rows of C-perp."""
        return self.dual.rows

    def syndrome(self, v: int) -> int:
        s = 0
        for h in self.checks:
            s = (s << 1) | dot2(h, v)
        return s

    def _build_decoder(self) -> dict:
        m = self.length
        if m > 15:
            raise DomainError("brute-force decoding limited to length <= 15")
        table = {}
        for wt in range(m + 1):
            for pos in itertools.combinations(range(m), wt):
                e = sum(1 << (m - 1 - p) for p in pos)
                table.setdefault(self.syndrome(e), e)
            if len(table) == 1 << len(self.checks):
                break
        return table

    def decode(self, syndrome: int) -> int:
        """Lowest-weight error pattern with this syndrome."""
        return self._decoder[syndrome]

    def logical_word(self, index: int) -> int:
        """Coset representative for logical basis value ``index`` (first rep = MSB)."""
        k = self.logical_qubits
        if not 0 <= index < 1 << k:
            raise DomainError("logical index out of range")
        w = 0
        for pos, r in enumerate(self.representatives):
            if (index >> (k - 1 - pos)) & 1:
                w ^= r
        return w

    def in_dual(self, v: int) -> bool:
        return self.dual.contains(v)


def steane_code() -> CssCode:
    return CssCode(hamming_code())


def css_encode(css: CssCode, w) -> StateVector:
    """|w_L> = |C-perp|^{-1/2} sum_{i in C-perp} |i + w>."""
    m = css.length
    w = _word(w, m)
    if not css.code.contains(w):
        raise DomainError("w is not a word of C")
    amps = np.zeros(1 << m, dtype=complex)
    words = css.dual.codewords()
    for i in words:
        amps[i ^ w] = 1.0
    return StateVector(m, amps / math.sqrt(len(words)))


def encode_logical(css: CssCode, logical_amps: Sequence[complex]) -> StateVector:
    """Encode sum_x a_x |x> over the logical basis."""
    logical_amps = np.asarray(logical_amps, dtype=complex)
    if len(logical_amps) != 1 << css.logical_qubits:
        raise DomainError("wrong number of logical amplitudes")
    amps = sum(a * css_encode(css, css.logical_word(x)).amplitudes for x, a in enumerate(logical_amps))
    return StateVector(css.length, amps / np.linalg.norm(amps))


@dataclass
class CorrectionReport:
    bit_syndrome: int = 0
    phase_syndrome: int = 0
    bit_flips: list = field(default_factory=list)
    phase_flips: list = field(default_factory=list)
    uncorrectable: bool = False


def _bit_stage(state: StateVector, css: CssCode, rng) -> tuple:
    """Parity checks into fresh ancillas, measure, discard, flip the decoded positions."""
    m = css.length
    checks = css.checks
    full = tensor(state, basis_state(len(checks), 0))
    n = full.num_qubits
    cx = named_gate("cnot").matrix
    amps = full.amplitudes
    for a, h in enumerate(checks):
        for i in range(m):
            if (h >> (m - 1 - i)) & 1:
                amps = apply_matrix(amps, n, cx, [i, m + a])
    full = StateVector(n, amps)
    anc = list(range(m, n))
    rec, full = measure_qubits(full, anc, rng)
    data = discard(full, anc)
    syndrome = rec.value
    err = css.decode(syndrome)
    flips = [i for i in range(m) if (err >> (m - 1 - i)) & 1]
    x = named_gate("x")
    for i in flips:
        data = apply_gate(data, x, [i])
    return data, syndrome, flips


def css_correct(state: StateVector, css: CssCode, rng=None) -> tuple:
    """Bit-flip stage, then the same stage conjugated by Hadamards on every qubit.

    Returns (corrected state, CorrectionReport).  A decoded pattern heavier
    than the code's correctable weight is flagged as uncorrectable; the
    state is still returned.
    """
    rng = as_rng(rng)
    m = css.length
    if state.num_qubits != m:
        raise DomainError("state width does not match the code length")
    report = CorrectionReport()
    state, report.bit_syndrome, report.bit_flips = _bit_stage(state, css, rng)
    h = named_gate("h")
    for i in range(m):
        state = apply_gate(state, h, [i])
    state, report.phase_syndrome, report.phase_flips = _bit_stage(state, css, rng)
    for i in range(m):
        state = apply_gate(state, h, [i])
    report.uncorrectable = max(len(report.bit_flips), len(report.phase_flips)) > css.correctable
    return state, report


def transversal_not(state: StateVector, block: Sequence[int] | None = None) -> StateVector:
    block = range(state.num_qubits) if block is None else block
    x = named_gate("x")
    for q in block:
        state = apply_gate(state, x, [q])
    return state


def transversal_cnot(state: StateVector, block_a: Sequence[int], block_b: Sequence[int]) -> StateVector:
    if len(block_a) != len(block_b):
        raise DomainError("blocks must have equal length")
    cx = named_gate("cnot")
    for a, b in zip(block_a, block_b):
        state = apply_gate(state, cx, [a, b])
    return state


def propagate_through_cnot(x_errors: set, block_a: Sequence[int], block_b: Sequence[int]) -> set:
    """X errors after a transversal CNOT: an X on a control copies to its partner."""
    out = set(x_errors)
    for a, b in zip(block_a, block_b):
        if a in x_errors:
            out ^= {b}
    return out


# -- classical repetition code and the recursion --------------------------------------

def majority3(bit: int) -> tuple:
    return (bit, bit, bit)


def majority3_decode(bits: Sequence[int]) -> int:
    if len(bits) != 3:
        raise DomainError("need three bits")
    return int(sum(bits) >= 2)


def eta_eff_majority(eta: float) -> float:
    """Probability that two or three of the three bits flip."""
    if not 0 <= eta <= 1:
        raise DomainError("eta must lie in [0, 1]")
    return 3 * eta ** 2 * (1 - eta) + eta ** 3


def effective_noise_bound(A: int, d: int, eta: float) -> float:
    """C(A, d+1) eta^(d+1): more than d faults among A locations."""
    if not A >= d + 1 >= 1:
        raise DomainError("need A >= d + 1 >= 1")
    return math.comb(A, d + 1) * eta ** (d + 1)


def concatenation_trajectory(eta0: float, A: int, d: int, levels: int) -> list:
    """eta_{j+1} = C(A, d+1) eta_j^(d+1), clipped to 1, for j < levels."""
    if levels < 0:
        raise DomainError("levels must be >= 0")
    out = [float(eta0)]
    for _ in range(levels):
        out.append(min(1.0, effective_noise_bound(A, d, out[-1])))
    return out


def threshold(A: int, d: int) -> float:
    """Positive fixed point C(A, d+1)^(-1/d) of the recursion."""
    if d < 1:
        raise DomainError("d must be >= 1 for a nontrivial threshold")
    return math.comb(A, d + 1) ** (-1.0 / d)


def levels_to_target(eta0: float, A: int, d: int, target: float, max_levels: int = 64) -> int | None:
    """Smallest r with eta_r <= target, or None when the recursion does not get there."""
    eta = eta0
    for r in range(max_levels + 1):
        if eta <= target:
            return r
        nxt = min(1.0, effective_noise_bound(A, d, eta))
        if nxt >= eta:
            return None
        eta = nxt
    return None


# -- memory experiments -----------------------------------------------------------------

_LOGICAL = ("I", "X", "Z", "Y")


def residual_logical(css: CssCode, x_err: int, z_err: int) -> str:
    """Logical Pauli left after ideal decoding of X errors x_err and Z errors z_err.

    Classical bookkeeping: the residual pattern lies in C; it is harmless
    exactly when it lies in C-perp.  Single-logical-qubit codes only.
    """
    if css.logical_qubits != 1:
        raise DomainError("residual_logical supports one logical qubit")
    rx = x_err ^ css.decode(css.syndrome(x_err))
    rz = z_err ^ css.decode(css.syndrome(z_err))
    return _LOGICAL[(not css.in_dual(rx)) + 2 * (not css.in_dual(rz))]


def _pattern_masks(pattern: Sequence[int], m: int) -> tuple:
    x = z = 0
    for i, k in enumerate(pattern):
        bit = 1 << (m - 1 - i)
        if k in (1, 2):
            x |= bit
        if k in (2, 3):
            z |= bit
    return x, z


def exact_failure_probability(css: CssCode, model: NoiseModel) -> float:
    """One noise round then ideal correction, summed over all 4^m Pauli patterns."""
    m = css.length
    p = np.array([1 - model.eta, model.eta * model.px, model.eta * model.py, model.eta * model.pz])
    total = 0.0
    for pattern in itertools.product(range(4), repeat=m):
        prob = float(np.prod(p[list(pattern)]))
        if prob == 0.0:
            continue
        if residual_logical(css, *_pattern_masks(pattern, m)) != "I":
            total += prob
    return total


@dataclass
class MemoryResult:
    failures: int
    shots: int
    rounds: int
    eta: float
    syndromes: list = field(default_factory=list)

    @property
    def rate(self) -> float:
        return self.failures / self.shots

    @property
    def sigma(self) -> float:
        p = self.rate
        return math.sqrt(max(p * (1 - p), 1e-300) / self.shots)

    def interval(self, z: float = 3.0) -> tuple:
        return max(0.0, self.rate - z * self.sigma), self.rate + z * self.sigma

    def report(self) -> dict:
        lo, hi = self.interval()
        doc = {"eta": self.eta, "rounds": self.rounds, "shots": self.shots, "failures": self.failures,
               "rate": self.rate, "ci3": [lo, hi]}
        if self.syndromes:
            doc["syndromes"] = self.syndromes
        return doc


def _logical_action(css: CssCode, pattern: tuple, rng) -> str:
    """Run the gate-level correction on reference code states to read off the
    logical Pauli that a given error pattern leaves behind."""
    m = css.length
    errors = [PauliError(i, "IXYZ"[k]) for i, k in enumerate(pattern) if k]
    zero, one = css_encode(css, 0), css_encode(css, css.logical_word(1))
    plus = StateVector(m, (zero.amplitudes + one.amplitudes) / math.sqrt(2))
    out0, _ = css_correct(apply_pauli(zero, errors), css, rng)
    outp, _ = css_correct(apply_pauli(plus, errors), css, rng)
    flip = abs(np.vdot(one.amplitudes, out0.amplitudes)) > 0.5
    minus = StateVector(m, (zero.amplitudes - one.amplitudes) / math.sqrt(2))
    phase = abs(np.vdot(minus.amplitudes, outp.amplitudes)) > 0.5
    return _LOGICAL[flip + 2 * phase]


def _compose(a: str, b: str) -> str:
    xa, za = a in ("X", "Y"), a in ("Z", "Y")
    xb, zb = b in ("X", "Y"), b in ("Z", "Y")
    return _LOGICAL[(xa ^ xb) + 2 * (za ^ zb)]


def logical_fidelity(psi: np.ndarray, op: str) -> float:
    mats = {"I": np.eye(2), "X": _PAULI["X"], "Z": _PAULI["Z"], "Y": _PAULI["Y"]}
    return float(abs(np.vdot(psi, mats[op] @ psi)) ** 2)


def memory_experiment(css: CssCode, model: NoiseModel | float, rounds: int = 1, shots: int = 1000,
                      rng=None, verbose: bool = False, fidelity_tol: float = 1e-9) -> MemoryResult:
    """Random logical state, then ``rounds`` of (noise, correction); count fidelity failures.

    Syndromes of Pauli errors on code states are deterministic, so the
    logical effect of each distinct error pattern is computed once with the
    gate-level corrector and reused across shots.
    """
    if isinstance(model, (int, float)):
        model = NoiseModel(float(model))
    rng = as_rng(rng)
    m = css.length
    cache: dict = {}
    patterns = model.sample_patterns(shots * rounds, m, rng).reshape(shots, rounds, m)
    failures = 0
    syndromes = []
    for s in range(shots):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        psi = v / np.linalg.norm(v)
        frame = "I"
        for r in range(rounds):
            key = tuple(int(k) for k in patterns[s, r])
            if key not in cache:
                cache[key] = _logical_action(css, key, rng)
            frame = _compose(frame, cache[key])
            if verbose:
                x, z = _pattern_masks(key, m)
                syndromes.append({"shot": s, "round": r, "bit": css.syndrome(x), "phase": css.syndrome(z)})
        if logical_fidelity(psi, frame) < 1 - fidelity_tol:
            failures += 1
    return MemoryResult(failures, shots, rounds, model.eta, syndromes)


def memory_experiment_statevector(css: CssCode, model: NoiseModel, rounds: int, shots: int, rng=None) -> MemoryResult:
    """The same experiment carried out on full state vectors (slow, for cross-checks)."""
    rng = as_rng(rng)
    failures = 0
    for _ in range(shots):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        start = encode_logical(css, v)
        state = start
        for _ in range(rounds):
            state, _ = apply_noise(state, model, rng)
            state, _ = css_correct(state, css, rng)
        if abs(np.vdot(start.amplitudes, state.amplitudes)) ** 2 < 1 - 1e-9:
            failures += 1
    return MemoryResult(failures, shots, rounds, model.eta)
