import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qvm.errors import DomainError, ResourceError, ValidationError
from qvm.gates import named_gate
from qvm.state import (apply_gate, basis_state, branch_probability, discard, fidelity, from_amplitudes,
                       measure_qubits, outcome_distribution, overlap, project, random_state, reduced_purity,
                       tensor, to_real_doubled)


def dense_operator(u, targets, n):
    """Independent oracle: permute qubits so targets lead, kron with identity, permute back."""
    k = len(targets)
    full = np.kron(u, np.eye(1 << (n - k)))
    rest = [q for q in range(n) if q not in targets]
    order = list(targets) + rest  # position p of the permuted register holds qubit order[p]
    dim = 1 << n
    P = np.zeros((dim, dim))
    for x in range(dim):
        bits = [(x >> (n - 1 - q)) & 1 for q in range(n)]
        y = 0
        for q in order:
            y = (y << 1) | bits[q]
        P[y, x] = 1
    return P.T @ full @ P


@st.composite
def gate_case(draw):
    n = draw(st.integers(2, 5))
    name = draw(st.sampled_from(["h", "x", "y", "z", "cnot", "swap", "toffoli", "u", "w"]))
    arity = {"cnot": 2, "swap": 2, "toffoli": 3}.get(name, 1)
    if arity > n:
        name, arity = "h", 1
    targets = draw(st.permutations(range(n)))[:arity]
    seed = draw(st.integers(0, 2**32 - 1))
    return n, name, targets, seed


@given(gate_case())
def test_apply_gate_matches_dense_kron(case):
    n, name, targets, seed = case
    psi = random_state(n, np.random.default_rng(seed))
    g = named_gate(name)
    got = apply_gate(psi, g, targets).amplitudes
    want = dense_operator(g.matrix, targets, n) @ psi.amplitudes
    assert np.allclose(got, want, atol=1e-12)


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_unitary_preserves_norm(n, seed):
    rng = np.random.default_rng(seed)
    psi = random_state(n, rng)
    for _ in range(5):
        psi = apply_gate(psi, named_gate("g", rng.uniform(0, 3), rng.uniform(0, 6)), [int(rng.integers(n))])
    assert abs(psi.norm() - 1) < 1e-12


def test_qubit_zero_is_most_significant():
    psi = apply_gate(basis_state(3, 0), named_gate("x"), [0])
    assert psi.amplitudes[0b100] == 1


def test_bell_state_and_purity():
    psi = apply_gate(apply_gate(basis_state(2), named_gate("h"), [0]), named_gate("cnot"), [0, 1])
    assert np.allclose(psi.amplitudes, [1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)])
    assert reduced_purity(psi, 0) == pytest.approx(0.5)
    assert reduced_purity(basis_state(2, 1), 1) == pytest.approx(1.0)


@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_outcome_distribution_marginals(n, seed):
    rng = np.random.default_rng(seed)
    psi = random_state(n, rng)
    qs = sorted(rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False).tolist())
    dist = outcome_distribution(psi, qs)
    # oracle: brute-force summation over full indices
    want = np.zeros(1 << len(qs))
    for x, p in enumerate(psi.probabilities()):
        v = 0
        for q in qs:
            v = (v << 1) | ((x >> (n - 1 - q)) & 1)
        want[v] += p
    assert np.allclose(dist, want, atol=1e-12)
    assert dist.sum() == pytest.approx(1.0)


def test_measure_collapse_is_consistent():
    rng = np.random.default_rng(4)
    psi = random_state(3, rng)
    rec, after = measure_qubits(psi, [0, 2], rng)
    assert branch_probability(psi, [0, 2], rec.outcome) == pytest.approx(rec.outcome_probability)
    # measuring again yields the same outcome with certainty
    rec2, _ = measure_qubits(after, [0, 2], rng)
    assert rec2.outcome == rec.outcome and rec2.outcome_probability == pytest.approx(1.0)
    assert fidelity(after, project(psi, [0, 2], rec.value)) == pytest.approx(1.0)


def test_measurement_frequencies_follow_born_rule():
    psi = from_amplitudes([math.sqrt(0.2), math.sqrt(0.8)])
    rng = np.random.default_rng(0)
    ones = sum(measure_qubits(psi, [0], rng)[0].value for _ in range(4000))
    assert abs(ones / 4000 - 0.8) < 4 * math.sqrt(0.16 / 4000)


def test_discard_after_measurement():
    psi = tensor(from_amplitudes([0.6, 0.8]), basis_state(1, 1))
    out = discard(psi, [1])
    assert out.num_qubits == 1 and np.allclose(out.amplitudes, [0.6, 0.8])


def test_overlap_conjugates_first_argument():
    a = from_amplitudes([1, 1j], normalize=True)
    b = basis_state(1, 1)
    assert overlap(a, b) == pytest.approx(-1j / math.sqrt(2))


def test_real_doubling_preserves_probabilities():
    rng = np.random.default_rng(2)
    psi = random_state(2, rng)
    doubled = to_real_doubled(psi)
    assert np.all(doubled.amplitudes.imag == 0)
    assert np.allclose(outcome_distribution(doubled, [0, 1]), psi.probabilities())


def test_errors():
    with pytest.raises(DomainError):
        from_amplitudes([1, 0, 0])
    with pytest.raises(ValidationError):
        from_amplitudes([1, 1])
    with pytest.raises(DomainError):
        basis_state(2, 4)
    with pytest.raises(ResourceError):
        basis_state(40)
    with pytest.raises(DomainError):
        apply_gate(basis_state(2), named_gate("cnot"), [0, 0])
    with pytest.raises(ValidationError):
        project(basis_state(1, 0), [0], 1)
