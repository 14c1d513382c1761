"""Acceptance suite: one recorded PASS/FAIL line per criterion, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v`` and read the
``acceptance criteria`` section of the terminal summary.
"""
import itertools
import math
import time

import numpy as np
from scipy.stats import unitary_group

from qvm import oracles, pathsum, qecc, reversible, shor, synthesis, transforms
from qvm.circuit import run_unitary
from qvm.gates import approximation_distance, barenco_decompose, named_gate
from qvm.state import basis_state, fidelity


# -- Shor ----------------------------------------------------------------------------

def _factor_check(N, seed):
    t0 = time.perf_counter()
    res = shor.factor(N, np.random.default_rng(seed), max_repeats=20, method="shor")
    elapsed = time.perf_counter() - t0
    again = shor.factor(N, np.random.default_rng(seed), max_repeats=20, method="shor")
    ok = (1 < res.factor < N and N % res.factor == 0 and res.quantum_repeats <= 20
          and again.report() == res.report())
    return ok, elapsed, res


def test_shor_end_to_end(criterion):
    details, ok = [], True
    for N in (15, 21):
        worst = 0.0
        for seed in range(10):
            good, elapsed, res = _factor_check(N, seed)
            ok &= good and elapsed < 10
            worst = max(worst, elapsed)
        details.append(f"N={N} last={res.factor}x{N // res.factor} worst={worst:.2f}s")
    # the order-finding core itself, with a random-Y route bypassed
    for N, Y in ((15, 7), (21, 2)):
        r = shor.shor_order(shor.OrderProblem(N, Y), np.random.default_rng(3), max_repeats=20).r
        ok &= r == shor.classical_order(Y, N)
    dist = shor.shor_k_distribution(shor.OrderProblem(15, 7, 256))
    r = shor.classical_order(7, 15)
    mass = float(sum(p for k, p in enumerate(dist) if shor.good_k(k, r, 256)))
    ok &= mass >= 0.40
    criterion("shor-end-to-end", ok, "; ".join(details) + f"; good-k mass={mass:.4f}")
    assert ok


# -- Deutsch-Jozsa -----------------------------------------------------------------------

def test_deutsch_jozsa_exhaustive(criterion):
    t0 = time.perf_counter()
    ok, counts = True, {}
    for n in (1, 2, 3):
        N = 1 << n
        tables = [[0] * N, [1] * N]
        for ones in itertools.combinations(range(N), N // 2):
            tables.append([1 if i in ones else 0 for i in range(N)])
        counts[n] = len(tables) - 2
        for t in tables:
            res = oracles.deutsch_jozsa(oracles.make_oracle(t, 1), np.random.default_rng(0))
            truth = "constant" if len(set(t)) == 1 else "balanced"
            exact = res.zero_probability > 1 - 1e-12 if truth == "constant" else res.zero_probability < 1e-12
            ok &= res.tag.kind == truth and res.queries == 1 and exact
    elapsed = time.perf_counter() - t0
    # independent count of balanced tables: choose which half maps to 1
    ok &= all(counts[n] == math.comb(1 << n, 1 << (n - 1)) for n in counts)
    ok &= elapsed < 5
    criterion("deutsch-jozsa-exact", ok, f"balanced counts {counts}, {elapsed:.2f}s")
    assert ok


# -- Simon -----------------------------------------------------------------------------------

def test_simon_recovery(criterion):
    worst, ok = 1.0, True
    for n in (2, 3, 4):
        for s in range(1, 1 << n):
            hits = 0
            for seed in range(200):
                rng = np.random.default_rng([n, s, seed])
                o = oracles.make_oracle(oracles.random_two_to_one(n, s, rng))
                res = oracles.simon(o, 4, rng)
                hits += res.tag is not None and res.tag.s == s
            worst = min(worst, hits / 200)
    ok &= worst >= 0.95
    violations, total = 0, 0
    rng = np.random.default_rng(11)
    for n in (2, 3, 4):
        for s in range(1, 1 << n):
            o = oracles.make_oracle(oracles.random_two_to_one(n, s, rng))
            for k in oracles.simon_samples(o, 10_000 // 25 + 1, rng):
                violations += oracles.dot2(k, s)
                total += 1
    ok &= violations == 0 and total >= 10_000
    criterion("simon", ok, f"worst recovery {worst:.3f}; {violations} violations in {total} samples")
    assert ok


# -- Grover -----------------------------------------------------------------------------------

def test_grover_law(criterion):
    shots, ok, parts = 10_000, True, []
    for N, t, q in ((4, 1, 1), (8, 1, 2), (16, 2, 2), (64, 1, 6)):
        marked = set(range(1, 1 + t))
        o = oracles.make_oracle([int(i in marked) for i in range(N)], 1)
        res = oracles.grover_search(o, t, np.random.default_rng(N + q), shots=shots, iterations=q)
        p = math.sin((2 * q + 1) * math.asin(math.sqrt(t / N))) ** 2
        freq = sum(v for k, v in res.histogram.items() if k in marked) / shots
        sigma = math.sqrt(max(p * (1 - p), 1e-300) / shots)
        ok &= abs(freq - p) <= 3 * sigma + 1e-12 and abs(res.success_probability - p) < 1e-9
        if (N, t, q) == (4, 1, 1):
            ok &= abs(res.success_probability - 1.0) < 1e-12 and freq == 1.0
        parts.append(f"({N},{t},{q}) {freq:.4f}~{p:.4f}")
    criterion("grover-law", ok, "; ".join(parts))
    assert ok


# -- QFFT ----------------------------------------------------------------------------------------

def test_qfft(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for m in range(1, 9):
        U = np.column_stack([transforms.qfft_mod2m(basis_state(m, i)).amplitudes for i in range(1 << m)])
        worst = max(worst, float(np.max(np.abs(U - transforms.dft_matrix(1 << m)))))
    exact = transforms.qfft_circuit(8).unitary()
    approx = transforms.qfft_circuit(8, cutoff=4).unitary()
    dist = approximation_distance(exact, approx)
    bound = transforms.approx_qfft_bound(8, 4)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and dist <= bound and elapsed < 10
    criterion("qfft", ok, f"max dev {worst:.2e}; (8,4) distance {dist:.4f} <= bound {bound:.4f}; {elapsed:.2f}s")
    assert ok


# -- phase estimation / Kitaev ---------------------------------------------------------------------

def test_phase_estimation_and_kitaev(criterion):
    runs = hits = 0
    for k in range(64):
        theta = 2 * math.pi * k / 64
        U = np.diag([1.0, np.exp(1j * theta)])
        for seed in range(5):
            est = transforms.estimate_phase(U, np.array([0, 1], complex), 6, rng=np.random.default_rng([k, seed]))
            runs += 1
            hits += transforms.circle_distance(est.theta, theta) <= 2 * math.pi / 128
    ok = hits / runs >= 0.95
    wrong = []
    for N in (15, 21):
        for Y in range(2, N):
            if math.gcd(Y, N) != 1:
                continue
            r = shor.kitaev_order(N, Y, rng=np.random.default_rng(Y)).r
            if r != shor.classical_order(Y, N):
                wrong.append((N, Y))
    ok &= not wrong
    criterion("phase-estimation", ok, f"{hits}/{runs} within 2pi/128; kitaev mismatches {wrong}")
    assert ok


# -- Steane -----------------------------------------------------------------------------------------

def test_steane(criterion):
    css = qecc.steane_code()
    logical = [np.array([1, 0]), np.array([0, 1]), np.array([1, 1]) / math.sqrt(2)]
    worst = 1.0
    rng = np.random.default_rng(5)
    for amps in logical:
        psi = qecc.encode_logical(css, amps)
        for q in range(7):
            for kind in qecc.KINDS:
                noisy = qecc.apply_pauli(psi, [qecc.PauliError(q, kind)])
                fixed, _ = qecc.css_correct(noisy, css, rng)
                worst = min(worst, fidelity(fixed, psi))
    tail = 1 - 0.99 ** 7 - 7 * 0.01 * 0.99 ** 6
    mem = qecc.memory_experiment(css, qecc.NoiseModel.bit_flip(0.01), 1, 100_000, np.random.default_rng(17))
    sigma = math.sqrt(tail * (1 - tail) / 100_000)
    ok = worst >= 1 - 1e-10 and abs(mem.rate - tail) <= 3 * sigma
    criterion("steane", ok, f"worst single-error fidelity {worst:.15f}; memory {mem.rate:.3e} vs {tail:.3e} (3 sigma {3 * sigma:.1e})")
    assert ok


# -- threshold recursion ----------------------------------------------------------------------------------

def test_threshold_recursion(criterion):
    ok = abs(qecc.eta_eff_majority(0.1) - 0.028) < 1e-15 and qecc.eta_eff_majority(0.5) == 0.5
    ok &= abs(qecc.threshold(10, 1) - 1 / 45) < 1e-15
    traj = qecc.concatenation_trajectory(0.01, 10, 1, 3)
    hand = [0.01]
    for _ in range(3):
        hand.append(45 * hand[-1] ** 2)
    ok &= all(abs(a - b) <= 1e-12 for a, b in zip(traj, hand))
    # The quoted values are printed to a few digits (the last one truncated,
    # 45 * 9.1125e-4**2 = 3.7366945e-5), so each is checked to one unit in its last printed place.
    quoted = ((0.01, 1e-14), (4.5e-3, 1e-4), (9.1125e-4, 1e-8), (3.736e-5, 1e-8))
    ok &= all(0 <= a - v < ulp or abs(a - v) <= 1e-12 for a, (v, ulp) in zip(traj, quoted))
    criterion("threshold-recursion", ok, f"trajectory {traj} vs hand iteration {hand}")
    assert ok


# -- path sums -----------------------------------------------------------------------------------------

def test_path_sum(criterion):
    rng = np.random.default_rng(9)
    worst = 0.0
    for c_idx in range(100):
        n = int(rng.integers(1, 7))
        circ = pathsum.random_circuit(n, int(rng.integers(1, 11)), rng)
        i = int(rng.integers(1 << n))
        ref = run_unitary(circ, basis_state(n, i)).amplitudes
        for j in range(1 << n):
            worst = max(worst, abs(pathsum.path_amplitude(circ, i, j) - ref[j]))
    q, sc = pathsum.interference_example()
    amps = [pathsum.path_amplitude(q, 3, j) for j in range(4)]
    stoch = pathsum.stochastic_simulate(sc, 3)
    frames = {}
    for n in (4, 8, 12, 16):
        c = pathsum.random_circuit(n, 10, np.random.default_rng(n))
        st = pathsum.PathStats()
        pathsum.path_amplitude(c, 0, 0, st)
        frames[n] = st.max_frames
    ok = (worst <= 1e-9 and amps[0] == 0 and amps[2] == 0 and np.allclose(stoch, 0.25, atol=1e-15)
          and all(f <= 11 for f in frames.values()))
    criterion("path-sum", ok, f"max dev {worst:.1e}; |11> -> {np.round(amps, 4).tolist()}; frames by n {frames}")
    assert ok


# -- universality --------------------------------------------------------------------------------------------

def _toffoli_suite():
    toffoli = named_gate("toffoli").matrix
    ccg = np.eye(8, dtype=complex)
    ccg[6:, 6:] = named_gate("g", math.pi / 7, 0.0).matrix
    haar = unitary_group.rvs(8, random_state=1234)
    return {"toffoli": toffoli, "ccg": ccg, "haar": haar}


def test_universality(criterion):
    bar = barenco_decompose(named_gate("not")).unitary()
    bdist = float(np.max(np.abs(bar - named_gate("toffoli").matrix)))
    ok = bdist <= 1e-9
    parts = [f"barenco {bdist:.1e}"]
    for name, target in _toffoli_suite().items():
        for eps in (0.1, 0.05):
            res = synthesis.synthesize_uw(target, eps)
            verified = approximation_distance(res.unitary(), target)
            ok &= verified <= eps and abs(verified - res.distance) < 1e-9
            parts.append(f"{name}@{eps}:{verified:.1e}")
    # reversible compilation, exhaustive on |0^b, i, j>
    and_c = reversible.ClassicalCircuit(2)
    and_c.outputs = [and_c.add("and", 0, 1)]
    rand_c = reversible.ClassicalCircuit(3)
    a = rand_c.add("xor", 0, 2)
    b = rand_c.add("not", 1)
    c = rand_c.add("and", a, b)
    d = rand_c.add("or", c, 0)
    rand_c.outputs = [d, a]
    for cc in (and_c, reversible.parity_circuit(3), rand_c):
        circ = reversible.compile_reversible(cc)
        n_in, m_out = cc.num_inputs, cc.num_outputs
        b_w = circ.num_qubits - n_in - m_out
        for i in range(1 << n_in):
            for j in range(1 << m_out):
                idx = (i << m_out) | j
                out = run_unitary(circ, basis_state(circ.num_qubits, idx)).amplitudes
                want = (i << m_out) | (j ^ cc.evaluate(i))
                ok &= abs(out[want] - 1) < 1e-12 and b_w >= 0
    criterion("universality", ok, "; ".join(parts))
    assert ok


# -- RSA -------------------------------------------------------------------------------------------------------

def test_rsa_demo(criterion):
    t0 = time.perf_counter()
    key = shor.rsa_keygen(3, 11, 7)
    rng = np.random.default_rng(33)
    ok, routes = True, {}
    for M in range(33):
        C = shor.rsa_encrypt(M, key)
        ok &= shor.rsa_decrypt(C, key) == M
        crack = shor.rsa_crack(C, key.public, rng)
        ok &= crack.message == M
        routes[crack.route] = routes.get(crack.route, 0) + 1
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 5
    criterion("rsa-demo", ok, f"routes {routes}; {elapsed:.2f}s")
    assert ok
