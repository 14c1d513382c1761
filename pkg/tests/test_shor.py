import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qvm.errors import AlgorithmFailure, DomainError
from qvm.shor import (OrderProblem, classical_order, continued_fraction_approx, convergents, extended_gcd,
                      factor, good_k, is_exact_order, is_prime, kitaev_order, mod_inverse, modpow,
                      multiplication_unitary, perfect_power, rsa_crack, rsa_decrypt, rsa_encrypt, rsa_keygen,
                      shor_k_distribution, shor_order, shor_sample_k)


@given(st.integers(0, 10**6), st.integers(0, 500), st.integers(1, 10**6))
def test_modpow_matches_builtin(y, x, n):
    assert modpow(y, x, n) == pow(y, x, n)


@given(st.integers(1, 10**6), st.integers(1, 10**6))
def test_extended_gcd_bezout(a, b):
    g, x, y = extended_gcd(a, b)
    assert g == math.gcd(a, b) and a * x + b * y == g


@given(st.integers(2, 10**4), st.integers(1, 10**4))
def test_mod_inverse(phi, e):
    if math.gcd(e, phi) == 1:
        assert e * mod_inverse(e, phi) % phi == 1
    else:
        with pytest.raises(DomainError):
            mod_inverse(e, phi)


@given(st.integers(1, 2**12), st.integers(0, 2**12 - 1))
def test_convergents_end_at_value_and_respect_bound(Q, k):
    k %= Q
    cs = convergents(k, Q)
    assert cs[-1] == Fraction(k, Q)
    best = continued_fraction_approx(k, Q, 50)
    assert best.denominator < 50
    # every fraction with a smaller denominator is no closer (best-approximation property)
    for d in range(1, best.denominator):
        assert abs(Fraction(round(k * d / Q), d) - Fraction(k, Q)) >= abs(best - Fraction(k, Q))


def test_small_number_helpers():
    assert [n for n in range(30) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert perfect_power(27) == (3, 3) and perfect_power(15) is None
    assert classical_order(2, 21) == 6 and is_exact_order(2, 6, 21) and not is_exact_order(2, 12, 21)


def test_q_is_smallest_power_of_two_above_n_squared():
    assert OrderProblem(15, 7).Q == 256 and OrderProblem(21, 2).Q == 512


def _reduced_distribution(problem):
    """Independent oracle: sum over second-register values of |FFT of the periodic indicator|^2."""
    Q = problem.Q
    powers = np.array([pow(problem.Y, l, problem.N) for l in range(Q)])
    out = np.zeros(Q)
    for y in set(powers.tolist()):
        ind = (powers == y).astype(float)
        out += np.abs(np.fft.ifft(ind) * math.sqrt(Q)) ** 2 / Q
    return out


@pytest.mark.parametrize("N, Y", [(15, 7), (15, 2), (21, 2), (21, 5)])
def test_full_circuit_matches_reduced_simulation(N, Y):
    p = OrderProblem(N, Y)
    assert np.allclose(shor_k_distribution(p), _reduced_distribution(p), atol=1e-10)


def test_good_k_mass_for_21():
    p = OrderProblem(21, 2)
    dist = shor_k_distribution(p)
    mass = sum(dist[k] for k in range(p.Q) if good_k(k, 6, p.Q))
    assert mass >= 4 / math.pi ** 2 - 0.01


def test_sampled_k_follow_exact_distribution():
    p = OrderProblem(15, 7)
    rng = np.random.default_rng(0)
    ks = [shor_sample_k(p, rng)[0] for _ in range(400)]
    assert set(ks) <= {0, 64, 128, 192}


@pytest.mark.parametrize("N", [15, 21, 33, 35])
def test_shor_order_all_y(N):
    rng = np.random.default_rng(N)
    for Y in range(2, N):
        if math.gcd(Y, N) == 1:
            assert shor_order(OrderProblem(N, Y), rng).r == classical_order(Y, N)


def test_kitaev_unitary_is_permutation_with_order_r():
    U = multiplication_unitary(15, 7)
    assert np.allclose(U @ U.conj().T, np.eye(len(U)))
    assert np.allclose(np.linalg.matrix_power(U, 4)[:15, :15], np.eye(15))


def test_kitaev_order_n35():
    rng = np.random.default_rng(1)
    for Y in (2, 3, 4, 6):
        assert kitaev_order(35, Y, rng=rng).r == classical_order(Y, 35)


@pytest.mark.parametrize("N", [15, 21, 33, 35, 39, 9, 12])
@pytest.mark.parametrize("method", ["shor", "kitaev"])
def test_factor(N, method):
    res = factor(N, np.random.default_rng(N), method=method)
    assert 1 < res.factor < N and N % res.factor == 0


def test_factor_failure_carries_report():
    # one repeat is not enough for most seeds; the failure report lists what was tried
    fails = 0
    for seed in range(20):
        try:
            factor(21, np.random.default_rng(seed), max_repeats=1)
        except AlgorithmFailure as exc:
            fails += 1
            assert "repeats" in exc.report
    assert fails >= 1


def test_factor_rejects_bad_input():
    for bad in (13, 2):
        with pytest.raises(DomainError):
            factor(bad)
    with pytest.raises(DomainError):
        factor(15, method="magic")
    with pytest.raises(DomainError):
        OrderProblem(15, 5)


def test_rsa_round_trip_and_crack():
    key = rsa_keygen(5, 11, 3)
    rng = np.random.default_rng(0)
    for M in range(key.N):
        C = rsa_encrypt(M, key)
        assert rsa_decrypt(C, key) == M
        assert rsa_crack(C, key.public, rng).message == M
    with pytest.raises(DomainError):
        rsa_keygen(3, 11, 5)  # gcd(5, 20) != 1


def test_rsa_crack_with_kitaev_order_finder():
    key = rsa_keygen(3, 11, 7)
    finder = lambda N, C, rng: kitaev_order(N, C, rng=rng)
    rng = np.random.default_rng(4)
    for M in (2, 5, 7, 8):
        assert rsa_crack(rsa_encrypt(M, key), key.public, rng, finder).message == M
