import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qvm.circuit import (Circuit, exact_distribution, execute, parse_circuit, render_circuit, run_unitary,
                         sample)
from qvm.errors import DomainError, ValidationError
from qvm.gates import named_gate
from qvm.pathsum import random_circuit
from qvm.state import basis_state, random_state

BELL = """
qubits 2
# Bell pair, then read both qubits
h 0
cnot 0 1
measure 0 1 -> bell
"""


def test_bell_histogram_only_correlated_outcomes():
    res = sample(parse_circuit(BELL), shots=4000, rng=np.random.default_rng(1))
    assert set(res.histogram) <= {"00", "11"}
    assert abs(res.histogram["00"] / 4000 - 0.5) < 4 * math.sqrt(0.25 / 4000)
    assert res.shots == 4000


def test_mid_circuit_measurement_feeds_later_gates():
    # measure a |+> qubit, then copy it: the two registers always agree
    c = Circuit(2).add("h", 0).measure([0], "a").add("cnot", 0, 1).measure([1], "b")
    res = sample(c, shots=300, rng=np.random.default_rng(3))
    assert set(res.histogram) <= {"0 0", "1 1"}
    assert exact_distribution(c) == pytest.approx({"0 0": 0.5, "1 1": 0.5})


def test_sampling_is_seed_reproducible():
    c = random_circuit(3, 8, np.random.default_rng(0)).measure([0, 1, 2], "m")
    a = sample(c, shots=500, rng=np.random.default_rng(42))
    b = sample(c, shots=500, rng=np.random.default_rng(42))
    assert a.to_json() == b.to_json()


@given(st.integers(1, 4), st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_inverse_undoes_circuit(n, depth, seed):
    rng = np.random.default_rng(seed)
    c = random_circuit(n, depth, rng)
    psi = random_state(n, rng)
    back = run_unitary(c.inverse(), run_unitary(c, psi))
    assert np.allclose(back.amplitudes, psi.amplitudes, atol=1e-10)


@given(st.integers(1, 4), st.integers(0, 12), st.integers(0, 2**32 - 1))
def test_text_round_trip(n, depth, seed):
    c = random_circuit(n, depth, np.random.default_rng(seed))
    c.measure(list(range(n)), "out")
    again = parse_circuit(render_circuit(c))
    assert render_circuit(again) == render_circuit(c)
    body = Circuit(n, c.ops[:-1])
    body2 = Circuit(n, again.ops[:-1])
    assert np.allclose(body.unitary(), body2.unitary(), atol=1e-12)


def test_oracle_query_counts_and_round_trip():
    text = "qubits 3\noracle f 1 0 0 1\nquery f 0 1 : 2\nmeasure 2 -> y\n"
    c = parse_circuit(text)
    assert parse_circuit(render_circuit(c)).oracles == c.oracles
    for i, fi in enumerate([1, 0, 0, 1]):
        res = execute(c, input=i << 1)
        assert res.outcome("y") == str(fi) and res.queries == 1


def test_parametrised_gates_parse():
    c = parse_circuit("qubits 2\nrk(3) 1\ng(0.5,1.25) 0\ncrk(2) 0 1\n")
    assert [op.params for op in c.ops] == [(3,), (0.5, 1.25), (2,)]


def test_unitary_matches_gate_matrix():
    c = Circuit(3).add("toffoli", 0, 1, 2)
    assert np.allclose(c.unitary(), named_gate("toffoli").matrix)


def test_run_result_serialisation():
    res = sample(parse_circuit(BELL), shots=10, rng=np.random.default_rng(0))
    doc = json.loads(res.to_json())
    assert sum(doc["histogram"].values()) == 10
    assert res.to_csv().splitlines()[0] == "outcome,count"
    one = execute(parse_circuit(BELL), rng=np.random.default_rng(0))
    amps = one.to_dict(amplitudes=True)["amplitudes"]
    assert complex(float(amps[0][0]), float(amps[0][1])) in (1, 0)


@pytest.mark.parametrize("text, fragment", [
    ("h 0\n", "line 1"),
    ("qubits 2\nh 2\n", "line 2"),
    ("qubits 2\ncnot 0\n", "line 2"),
    ("qubits 2\nbogus 0\n", "line 2"),
    ("qubits 1\nmeasure 0 -> a\nmeasure 0 -> a\n", "line 3"),
    ("", "empty"),
])
def test_parse_errors_name_the_line(text, fragment):
    with pytest.raises(ValidationError, match=fragment):
        parse_circuit(text)


def test_misc_errors():
    with pytest.raises(ValidationError):
        Circuit(1).add("h", 0).measure([0], "m").inverse()
    with pytest.raises(DomainError):
        sample(Circuit(1).add("h", 0), shots=0)
    with pytest.raises(DomainError):
        execute(Circuit(2), initial=basis_state(1))
