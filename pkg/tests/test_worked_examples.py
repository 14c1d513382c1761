"""Small worked cases whose answers are checked by hand arithmetic."""
import math
from fractions import Fraction

import numpy as np
import pytest

from qvm import DomainError, ResourceError, basis_state
from qvm.gates import approximation_distance, matrix_sqrt_2x2, named_gate
from qvm.oracles import estimate_mean, find_minimum, make_oracle, simon
from qvm.qecc import concatenation_trajectory, discretization_expand, effective_noise_bound, threshold
from qvm.shor import (continued_fraction_approx, kitaev_order, mod_inverse, modpow, rsa_crack, rsa_encrypt,
                      rsa_keygen)
from qvm.state import from_amplitudes, measure_qubits, overlap
from qvm.transforms import estimate_phase, qfft_mod2m, reconstruct_theta


def test_basis_index_out_of_range():
    with pytest.raises(DomainError):
        basis_state(3, 8)


def test_first_qubit_zero_with_two_thirds():
    psi = from_amplitudes(np.array([1, 1, 0, -1]) / math.sqrt(3))
    hits = sum(measure_qubits(psi, [0], np.random.default_rng(s))[0].outcome == "0" for s in range(3000))
    assert abs(hits / 3000 - 2 / 3) < 0.03


def test_plus_overlap_with_zero():
    plus = from_amplitudes(np.array([1, 1]) / math.sqrt(2))
    assert abs(overlap(plus, basis_state(1, 0)) - 1 / math.sqrt(2)) < 1e-12


def test_too_many_qubits_is_a_resource_error():
    with pytest.raises(ResourceError):
        basis_state(64, 0)


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_rk_distance_from_identity(k):
    expected = abs(1 - np.exp(2j * math.pi / 2 ** k))
    assert abs(approximation_distance(named_gate("rk", k), np.eye(2)) - expected) < 1e-12


def test_r1_is_z_and_its_root_is_s():
    z = named_gate("rk", 1)
    assert np.allclose(z.matrix, np.diag([1, -1]))
    assert np.allclose(matrix_sqrt_2x2(z).matrix, np.diag([1, 1j]))


def test_identity_to_not_distance():
    assert abs(approximation_distance(np.eye(2), named_gate("x")) - 2) < 1e-12


def test_qfft_of_one_on_two_qubits():
    out = qfft_mod2m(basis_state(2, 1))
    assert np.allclose(out.amplitudes, np.array([1, 1j, -1, -1j]) / 2)


@pytest.mark.parametrize("U, theta", [(np.diag([1, -1]), math.pi), (np.diag([1, np.exp(1j * math.pi / 4)]), math.pi / 4)])
def test_phase_of_basis_eigenvector(U, theta):
    est = estimate_phase(U, np.array([0, 1], dtype=complex), 5, rng=np.random.default_rng(3))
    assert abs(est.theta - theta) < 2 * math.pi / 2 ** 5


def test_reconstruct_five_sixteenths():
    theta = 2 * math.pi * 5 / 16
    coarse = [(2 ** j * theta) % (2 * math.pi) for j in range(5)]
    assert abs(reconstruct_theta(coarse) - theta) < 1e-12


def test_simon_on_two_bits():
    res = simon(make_oracle([0, 1, 1, 0]), rng=np.random.default_rng(0))
    assert res.tag is not None and res.tag.s == 3


def test_minimum_examples():
    assert find_minimum([5, 3, 8, 1], rng=np.random.default_rng(1)).index == 3
    assert find_minimum([4] * 8, rng=np.random.default_rng(1)).index == 0


def test_mean_of_constant_quarter():
    res = estimate_mean([0.25] * 16, 0.05, rng=np.random.default_rng(2))
    assert abs(res.value - 0.25) <= 0.05


def test_number_theory_examples():
    assert modpow(2, 7, 33) == 29
    assert mod_inverse(7, 20) == 3
    assert continued_fraction_approx(192, 256, 15) == Fraction(3, 4)
    assert continued_fraction_approx(31, 64, 10) == Fraction(1, 2)


def test_kitaev_order_of_four_mod_fifteen():
    assert kitaev_order(15, 4, rng=np.random.default_rng(5)).r == 2


def test_rsa_round_trip_and_crack():
    key = rsa_keygen(3, 11, 7)
    assert key.D == 3
    C = rsa_encrypt(2, key)
    assert C == 29
    assert rsa_crack(C, key.public, rng=np.random.default_rng(0)).message == 2


def test_discretization_masses():
    masses, tail = discretization_expand(0.1, 3, 3)
    assert np.allclose(masses, [0.729, 0.243, 0.027, 0.001])
    assert abs(tail) < 1e-15


def test_effective_bound_and_fixed_point():
    assert abs(effective_noise_bound(10, 1, 0.01) - 4.5e-3) < 1e-15
    eta_c = threshold(10, 1)
    assert np.allclose(concatenation_trajectory(eta_c, 10, 1, 4), eta_c, rtol=1e-12)
