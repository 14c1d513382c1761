"""Number theory, order finding (Shor and Kitaev), factoring and toy RSA."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .circuit import Circuit, run_unitary
from .errors import AlgorithmFailure, DomainError, ValidationError
from .state import StateVector, as_rng, basis_state, measure_qubits, outcome_distribution
from .transforms import estimate_phase, qfft_circuit, qfft_mod2m


# -- classical number theory -----------------------------------------------------

def modpow(Y: int, x: int, N: int) -> int:
    """Y^x mod N by square-and-multiply over the binary digits of x."""
    if N < 1:
        raise DomainError("modulus must be >= 1")
    if x < 0:
        raise DomainError("exponent must be nonnegative")
    result, base = 1 % N, Y % N
    while x:
        if x & 1:
            result = result * base % N
        base = base * base % N
        x >>= 1
    return result


def extended_gcd(a: int, b: int) -> tuple:
    """(g, x, y) with a*x + b*y = g = gcd(a, b)."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def mod_inverse(E: int, phi: int) -> int:
    g, x, _ = extended_gcd(E % phi, phi)
    if g != 1:
        raise DomainError(f"{E} has no inverse modulo {phi} (gcd {g})")
    return x % phi


def convergents(k: int, Q: int) -> list:
    """Continued-fraction convergents of k/Q, in order."""
    out = []
    h0, h1, k0, k1 = 0, 1, 1, 0
    a, b = k, Q
    while b:
        q = a // b
        a, b = b, a - q * b
        h0, h1 = h1, q * h1 + h0
        k0, k1 = k1, q * k1 + k0
        out.append(Fraction(h1, k1))
    return out


def continued_fraction_approx(k: int, Q: int, bound: int) -> Fraction:
    """The convergent of k/Q with the largest denominator below ``bound``."""
    if not 0 <= k < Q:
        raise DomainError("need 0 <= k < Q")
    best = Fraction(0, 1)
    for c in convergents(k, Q):
        if c.denominator < bound:
            best = c
        else:
            break
    return best


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


def perfect_power(N: int):
    """(a, b) with a^b = N and b >= 2, or None."""
    for b in range(2, N.bit_length() + 1):
        a = round(N ** (1 / b))
        for c in (a - 1, a, a + 1):
            if c > 1 and c ** b == N:
                return c, b
    return None


def classical_order(Y: int, N: int) -> int:
    if math.gcd(Y, N) != 1:
        raise DomainError("Y must be coprime to N")
    r, x = 1, Y % N
    while x != 1 % N:
        x = x * Y % N
        r += 1
    return r


def is_exact_order(Y: int, r: int, N: int) -> bool:
    """Y^r = 1 and Y^d != 1 for every proper divisor d of r."""
    if r < 1 or modpow(Y, r, N) != 1 % N:
        return False
    return all(modpow(Y, d, N) != 1 for d in range(1, r) if r % d == 0)


# -- Shor order finding -------------------------------------------------------------

@dataclass
class OrderProblem:
    N: int
    Y: int
    Q: int = 0

    def __post_init__(self):
        if self.N < 2:
            raise DomainError("N must be >= 2")
        if not 2 <= self.Y < self.N or math.gcd(self.Y, self.N) != 1:
            raise DomainError(f"Y={self.Y} must lie in [2, N) and be coprime to N={self.N}")
        if not self.Q:
            self.Q = 1 << (self.N * self.N - 1).bit_length()
        if self.Q < self.N ** 2 or self.Q & (self.Q - 1):
            raise DomainError("Q must be a power of two >= N^2")

    @property
    def q_bits(self) -> int:
        return self.Q.bit_length() - 1

    @property
    def w_bits(self) -> int:
        return max(1, (self.N - 1).bit_length())

    def powers(self) -> np.ndarray:
        """Y^l mod N for l = 0..Q-1 (the modular exponentiation oracle's table)."""
        out = np.empty(self.Q, dtype=np.int64)
        x = 1
        for l in range(self.Q):
            out[l] = x
            x = x * self.Y % self.N
        return out


def shor_circuit(problem: OrderProblem) -> Circuit:
    """H on the first register, exponentiation query, transform of the first register."""
    q, w = problem.q_bits, problem.w_bits
    circ = Circuit(q + w).add_oracle("modexp", [int(v) for v in problem.powers()])
    for k in range(q):
        circ.add("h", k)
    circ.query("modexp", range(q), range(q, q + w))
    circ.extend(qfft_circuit(q, range(q), num_qubits=q + w))
    return circ


def shor_k_distribution(problem: OrderProblem) -> np.ndarray:
    """Exact probabilities of the measured k from the full two-register state."""
    circ = shor_circuit(problem)
    state = run_unitary(circ, basis_state(circ.num_qubits, 0))
    return outcome_distribution(state, range(problem.q_bits))


def good_k(k: int, r: int, Q: int) -> bool:
    """-r/2 <= k r mod Q <= r/2, with the residue taken in (-Q/2, Q/2]."""
    res = (k * r) % Q
    if res > Q // 2:
        res -= Q
    return -r / 2 <= res <= r / 2


def shor_sample_k(problem: OrderProblem, rng=None, powers: np.ndarray | None = None) -> tuple:
    """One quantum repeat: returns (k, measured second-register value).

    After the second register is measured the first register holds the
    uniform superposition over {l : Y^l = y}, a product with |y>, so the
    transform and final measurement act on the first register alone.
    """
    rng = as_rng(rng)
    powers = problem.powers() if powers is None else powers
    Q = problem.Q
    counts = np.bincount(powers, minlength=problem.N)
    y = int(rng.choice(problem.N, p=counts / Q))
    amps = (powers == y).astype(complex)
    state = StateVector(problem.q_bits, amps / math.sqrt(counts[y]))
    state = qfft_mod2m(state)
    rec, _ = measure_qubits(state, range(problem.q_bits), rng)
    return rec.value, y


@dataclass
class OrderResult:
    r: int
    repeats: int
    log: list = field(default_factory=list)

    def report(self) -> dict:
        return {"r": self.r, "repeats": self.repeats, "log": self.log}


def _accept(problem_N: int, Y: int, d: int, L: int, entry: dict) -> tuple:
    """Try the new denominator d and the running lcm L; returns (r or None, new L)."""
    if d > 1 and modpow(Y, d, problem_N) == 1:
        entry["accepted"] = d
        return d, L
    L = L * d // math.gcd(L, d)
    if L > 1 and modpow(Y, L, problem_N) == 1 and L < problem_N:
        entry["accepted"] = L
        entry["via_lcm"] = True
        return L, L
    entry["rejected"] = f"Y^{d} != 1 mod N"
    return None, L


def shor_order(problem: OrderProblem, rng=None, max_repeats: int = 20) -> OrderResult:
    """Repeat the quantum step until a continued-fraction denominator d has Y^d = 1.

    Denominators that fail are also combined by lcm, since each is r divided
    by gcd(m, r).
    """
    rng = as_rng(rng)
    powers = problem.powers()
    log, L = [], 1
    for rep in range(1, max_repeats + 1):
        k, y = shor_sample_k(problem, rng, powers)
        frac = continued_fraction_approx(k, problem.Q, problem.N)
        entry = {"k": k, "y": y, "convergent": f"{frac.numerator}/{frac.denominator}"}
        log.append(entry)
        r, L = _accept(problem.N, problem.Y, frac.denominator, L, entry)
        if r is not None:
            if not is_exact_order(problem.Y, r, problem.N):
                raise ValidationError(f"accepted r={r} is not the exact order")
            return OrderResult(r, rep, log)
    raise AlgorithmFailure(f"order of {problem.Y} mod {problem.N} not found in {max_repeats} repeats",
                           {"repeats": log})


# -- Kitaev order finding ---------------------------------------------------------

def multiplication_perm(N: int, Y: int, width: int) -> np.ndarray:
    """perm[g] = g * Y mod N for g < N, identity above."""
    g = np.arange(1 << width)
    return np.where(g < N, (g * Y) % N, g)


def multiplication_unitary(N: int, Y: int) -> np.ndarray:
    width = max(1, (N - 1).bit_length())
    perm = multiplication_perm(N, Y, width)
    U = np.zeros((1 << width, 1 << width))
    U[perm, np.arange(1 << width)] = 1
    return U


def kitaev_order(N: int, Y: int, n: int | None = None, rng=None, max_repeats: int = 20,
                 safety: int = 3) -> OrderResult:
    """Phase estimation of U|g> = |g Y mod N> started from |1>.

    |1> is the equal superposition of the eigenvectors with phases
    -2 pi a / r, so each run reads a/r for a random a; continued fractions
    with bound N give r / gcd(a, r), and denominators are combined by lcm.
    """
    OrderProblem(N, Y, 1 << (N * N - 1).bit_length())  # argument checks
    rng = as_rng(rng)
    width = max(1, (N - 1).bit_length())
    if n is None:
        n = 2 * width + 2
    mults = {}

    def apply(v, j):
        if j not in mults:
            mults[j] = multiplication_perm(N, modpow(Y, 2 ** j, N), width)
        out = np.empty_like(v)
        out[mults[j]] = v
        return out

    grid = 1 << (n + 1)
    log, L = [], 1
    for rep in range(1, max_repeats + 1):
        start = basis_state(width, 1)
        try:
            est = estimate_phase(apply, start, n, safety=safety, rng=rng)
        except ValidationError as exc:
            log.append({"rejected": f"inconsistent levels: {exc}"})
            continue
        x = (-est.theta / (2 * math.pi)) % 1.0
        k = int(round(x * grid)) % grid
        frac = continued_fraction_approx(k, grid, N)
        entry = {"theta": est.theta, "convergent": f"{frac.numerator}/{frac.denominator}"}
        log.append(entry)
        r, L = _accept(N, Y, frac.denominator, L, entry)
        if r is not None:
            if not is_exact_order(Y, r, N):
                raise ValidationError(f"accepted r={r} is not the exact order")
            return OrderResult(r, rep, log)
    raise AlgorithmFailure(f"order of {Y} mod {N} not found in {max_repeats} repeats", {"repeats": log})


# -- factoring ------------------------------------------------------------------

@dataclass
class FactorResult:
    N: int
    factor: int
    route: str
    quantum_repeats: int = 0
    attempts: list = field(default_factory=list)

    def report(self) -> dict:
        return {
            "N": self.N,
            "factor": self.factor,
            "cofactor": self.N // self.factor,
            "route": self.route,
            "quantum_repeats": self.quantum_repeats,
            "repeats": self.attempts,
        }


def factor(N: int, rng=None, max_repeats: int = 20, method: str = "shor") -> FactorResult:
    """A nontrivial factor of N via order finding of random Y (even-order gcd route)."""
    if N < 4:
        raise DomainError("N must be composite and >= 4")
    if method not in ("shor", "kitaev"):
        raise DomainError(f"unknown order-finding method {method!r}")
    if N % 2 == 0:
        return FactorResult(N, 2, "even")
    pp = perfect_power(N)
    if pp:
        return FactorResult(N, pp[0], "prime-power")
    if is_prime(N):
        raise DomainError(f"{N} is prime")
    rng = as_rng(rng)
    used, attempts = 0, []
    while used < max_repeats:
        Y = int(rng.integers(2, N))
        g = math.gcd(Y, N)
        if g > 1:
            attempts.append({"Y": Y, "gcd": g})
            return FactorResult(N, g, "gcd", used, attempts)
        try:
            if method == "kitaev":
                res = kitaev_order(N, Y, rng=rng, max_repeats=max_repeats - used)
            else:
                res = shor_order(OrderProblem(N, Y), rng, max_repeats - used)
        except AlgorithmFailure as exc:
            used = max_repeats
            attempts.append({"Y": Y, "failed": str(exc), "log": exc.report.get("repeats", [])})
            break
        used += res.repeats
        r = res.r
        entry = {"Y": Y, "r": r, "repeats": res.repeats}
        attempts.append(entry)
        if r % 2:
            entry["rejected"] = "odd order"
            continue
        half = modpow(Y, r // 2, N)
        if half == N - 1:
            entry["rejected"] = "Y^(r/2) = -1 mod N"
            continue
        for cand in (math.gcd(half - 1, N), math.gcd(half + 1, N)):
            if 1 < cand < N:
                return FactorResult(N, cand, method, used, attempts)
        entry["rejected"] = "trivial gcds"
    raise AlgorithmFailure(f"no factor of {N} within {max_repeats} quantum repeats",
                           {"N": N, "repeats": attempts})


# -- RSA ----------------------------------------------------------------------

@dataclass(frozen=True)
class RsaKey:
    N: int
    E: int
    P: int
    Q_prime: int
    D: int

    @property
    def public(self) -> tuple:
        return self.N, self.E


def rsa_keygen(P: int, Q_prime: int, E: int) -> RsaKey:
    if P == Q_prime or not (is_prime(P) and is_prime(Q_prime)):
        raise DomainError("P and Q must be distinct primes")
    phi = (P - 1) * (Q_prime - 1)
    if math.gcd(E, phi) != 1:
        raise DomainError(f"E={E} is not coprime to (P-1)(Q-1)={phi}")
    return RsaKey(P * Q_prime, E, P, Q_prime, mod_inverse(E, phi))


def rsa_encrypt(M: int, key) -> int:
    N, E = key.public if isinstance(key, RsaKey) else key
    if not 0 <= M < N:
        raise DomainError("message must satisfy 0 <= M < N")
    return modpow(M, E, N)


def rsa_decrypt(C: int, key: RsaKey) -> int:
    return modpow(C, key.D, key.N)


@dataclass
class CrackResult:
    message: int
    route: str
    order: int | None = None
    d_prime: int | None = None
    repeats: int = 0


def rsa_crack(C: int, public: tuple, rng=None, order_finder=None) -> CrackResult:
    """Recover M from C with the public key only: D' = E^{-1} mod ord(C), M = C^{D'}.

    ``order_finder(N, Y, rng)`` returns an OrderResult; Shor's routine by default.
    """
    N, E = public
    C %= N
    if C in (0, 1):
        return CrackResult(C, "fixed point")
    g = math.gcd(C, N)
    if g > 1:
        # C shares a prime with N, which hands over the factorization.
        phi = (g - 1) * (N // g - 1)
        return CrackResult(modpow(C, mod_inverse(E, phi), N), "gcd")
    if order_finder is None:
        res = shor_order(OrderProblem(N, C), rng)
    else:
        res = order_finder(N, C, rng)
    r = res.r
    d_prime = mod_inverse(E, r)
    return CrackResult(modpow(C, d_prime, N), "order", r, d_prime, res.repeats)
