
import numpy as np
import pytest
from hypothesis import given, strategies as st

from qvm.circuit import Circuit, run_unitary
from qvm.errors import DomainError, ResourceError, ValidationError
from qvm.pathsum import (PathStats, StochasticCircuit, interference_example, parse_stochastic, path_amplitude,
                         path_distribution, random_circuit, render_stochastic, stochastic_simulate)
from qvm.state import basis_state


@given(st.integers(1, 5), st.integers(0, 10), st.integers(0, 2**32 - 1))
def test_path_sum_equals_state_engine(n, depth, seed):
    rng = np.random.default_rng(seed)
    c = random_circuit(n, depth, rng)
    i = int(rng.integers(1 << n))
    ref = run_unitary(c, basis_state(n, i)).amplitudes
    got = [path_amplitude(c, i, j) for j in range(1 << n)]
    assert np.allclose(got, ref, atol=1e-9)


def test_oracle_queries_are_followed():
    c = Circuit(3).add_oracle("f", [1, 0, 1, 1]).add("h", 0).query("f", [0, 1], [2])
    ref = run_unitary(c, basis_state(3, 0)).amplitudes
    assert np.allclose([path_amplitude(c, 0, j) for j in range(8)], ref)


def test_interference_example():
    q, sc = interference_example()
    amps = [path_amplitude(q, 3, j) for j in range(4)]
    assert amps[0] == 0 and amps[2] == 0
    assert np.allclose(np.abs(amps) ** 2, [0, 0.5, 0, 0.5])
    assert np.allclose(stochastic_simulate(sc, 3), 0.25)
    # each path into 00 has weight of magnitude 1/(2 sqrt 2); the two cancel
    stats = PathStats()
    path_amplitude(q, 3, 0, stats)
    assert stats.paths >= 2


@pytest.mark.parametrize("n", [4, 8, 14, 20])
def test_working_set_depends_on_depth_not_width(n):
    c = Circuit(n)
    for q in range(10):
        c.add("h", q % n)
    stats = PathStats()
    path_amplitude(c, 0, 0, stats)
    assert stats.max_frames <= len(c.ops) + 1


def test_distribution_and_limits():
    c = Circuit(2).add("h", 0).add("cnot", 0, 1)
    assert np.allclose(path_distribution(c, 0), [0.5, 0, 0, 0.5])
    with pytest.raises(ResourceError):
        path_distribution(Circuit(13), 0)
    with pytest.raises(DomainError):
        path_amplitude(Circuit(1).measure([0], "m"), 0, 0)


def test_stochastic_text_round_trip():
    text = "stochastic 2\nr 1\nmatrix(0.9,0.2;0.1,0.8) 0\nx 1\n"
    sc = parse_stochastic(text)
    again = parse_stochastic(render_stochastic(sc))
    assert np.allclose(stochastic_simulate(sc, 0), stochastic_simulate(again, 0))
    p = stochastic_simulate(sc, np.array([0.25, 0.25, 0.25, 0.25]))
    assert p.sum() == pytest.approx(1.0)


def test_stochastic_validation():
    with pytest.raises(ValidationError):
        StochasticCircuit(1).add([[0.5, 0.5], [0.6, 0.5]], [0])
    with pytest.raises(ValidationError):
        StochasticCircuit(1).add([[1.5, 0], [-0.5, 1]], [0])
    with pytest.raises(ValidationError, match="line 2"):
        parse_stochastic("stochastic 1\nmatrix(1,0;0) 0\n")
