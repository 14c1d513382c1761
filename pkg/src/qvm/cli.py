"""``qvm`` command line: seeded runs of every algorithm with structured reports.

Exit status: 0 on success, 1 when an algorithm reports failure, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import circuit as circ_mod
from . import oracles, pathsum, qecc, shor, transforms
from .errors import AlgorithmFailure, QvmError
from .gates import approximation_distance
from .state import basis_state


@dataclass
class RunConfig:
    seed: int = 0
    shots: int = 1000
    format: str = "json"
    verbose: bool = False


class UsageError(Exception):
    pass


def _rng(cfg: RunConfig) -> np.random.Generator:
    return np.random.default_rng(cfg.seed)


# -- output ----------------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def _flatten(prefix: str, x, out: list) -> None:
    if isinstance(x, dict):
        for k in sorted(x, key=str):
            _flatten(f"{prefix}.{k}" if prefix else str(k), x[k], out)
    elif isinstance(x, list) and any(isinstance(v, (dict, list)) for v in x):
        for i, v in enumerate(x):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out.append((prefix, x))


def render_report(report: dict, fmt: str) -> str:
    report = _jsonable(report)
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if "histogram" in report:
            w.writerow(["outcome", "count"])
            for k, v in sorted(report["histogram"].items()):
                w.writerow([k, v])
        else:
            w.writerow(["key", "value"])
            rows: list = []
            _flatten("", report, rows)
            for k, v in rows:
                w.writerow([k, json.dumps(v) if isinstance(v, list) else v])
        return buf.getvalue()
    rows = []
    _flatten("", report, rows)
    return "".join(f"{k}: {v}\n" for k, v in rows)


# -- helpers -----------------------------------------------------------------------

def _load_or_random(args, rng, default_qubits: int, max_value: int | None = None) -> oracles.Oracle:
    if args.oracle:
        return oracles.load_oracle_table(args.oracle)
    n = args.qubits or default_qubits
    hi = max_value if max_value is not None else 1 << n
    return oracles.make_oracle(rng.integers(0, hi, 1 << n).tolist())


def _base(cfg: RunConfig, command: str, **extra) -> dict:
    doc = {"command": command, "seed": cfg.seed}
    doc.update(extra)
    return doc


# -- subcommands -------------------------------------------------------------------

def cmd_dj(args, cfg):
    rng = _rng(cfg)
    if args.oracle:
        o = oracles.load_oracle_table(args.oracle)
    else:
        n = args.qubits or 3
        N = 1 << n
        if args.kind == "constant":
            table = [args.value] * N
        elif args.kind == "parity":
            table = [bin(i).count("1") & 1 for i in range(N)]
        else:
            table = [0] * N
            for i in rng.permutation(N)[: N // 2]:
                table[int(i)] = 1
        o = oracles.make_oracle(table, 1)
    res = oracles.deutsch_jozsa(o, rng)
    truth = "constant" if len(set(o.table)) == 1 else "balanced" if sum(o.table) * 2 == o.size else "neither"
    return _base(cfg, "dj", n=o.input_width, tag=res.tag.kind, outcome=res.outcome, queries=res.queries,
                 qubits=res.qubits, zero_probability=res.zero_probability, promise=truth,
                 correct=res.tag.kind == truth), 0


def cmd_simon(args, cfg):
    rng = _rng(cfg)
    if args.oracle:
        o = oracles.load_oracle_table(args.oracle)
        s = None
    else:
        n = args.qubits or 3
        s = args.s
        table = oracles.random_two_to_one(n, s, rng) if s else rng.permutation(1 << n).tolist()
        o = oracles.make_oracle(table)
    res = oracles.simon(o, args.c, rng)
    n = o.input_width
    doc = _base(cfg, "simon", n=n, tag=res.tag.kind if res.tag else "undetermined",
                s=format(res.tag.s, f"0{n}b") if res.tag and res.tag.s else None,
                samples=[format(k, f"0{n}b") for k in res.samples], queries=res.queries, qubits=res.qubits)
    if s is not None:
        doc["expected_s"] = format(s, f"0{n}b") if s else None
        doc["correct"] = (res.tag is not None) and (res.tag.s or 0) == s
    return doc, 0 if res.tag is not None else 1


def cmd_grover(args, cfg):
    rng = _rng(cfg)
    n = args.qubits or 3
    marked = args.marked or [0]
    if any(not 0 <= m < 1 << n for m in marked):
        raise UsageError("--marked index out of range for --n")
    table = [1 if i in set(marked) else 0 for i in range(1 << n)]
    o = oracles.make_oracle(table, 1)
    res = oracles.grover_search(o, len(set(marked)), rng, shots=cfg.shots, iterations=args.iterations)
    hits = sum(v for k, v in res.histogram.items() if table[k])
    geo = oracles.GroverGeometry(1 << n, len(set(marked)), res.iterations)
    return _base(cfg, "grover", n=n, marked=sorted(set(marked)), iterations=res.iterations, theta=geo.theta,
                 success_probability=res.success_probability, success_frequency=hits / cfg.shots,
                 shots=cfg.shots, histogram={format(k, f"0{n}b"): v for k, v in sorted(res.histogram.items())},
                 queries=res.queries, qubits=res.qubits), 0


def cmd_min(args, cfg):
    rng = _rng(cfg)
    o = _load_or_random(args, rng, 6)
    res = oracles.find_minimum(o.table, rng)
    truth = min(o.table)
    return _base(cfg, "min", n=o.input_width, index=res.index, value=res.value, queries=res.queries,
                 qubits=o.input_width + 1, classical_minimum=truth,
                 thresholds=[[t, i] for t, i in res.thresholds]), 0 if res.value == truth else 1


def cmd_median(args, cfg):
    rng = _rng(cfg)
    o = _load_or_random(args, rng, 6)
    res = oracles.estimate_median(o.table, args.eps, rng)
    vals = np.asarray(o.table)
    below, above = int((vals < res.value).sum()), int((vals > res.value).sum())
    ok = max(below, above) <= (1 + args.eps) * len(vals) / 2
    return _base(cfg, "median", n=o.input_width, eps=args.eps, median=res.value, below=below, above=above,
                 within_band=bool(ok), queries=res.queries, qubits=o.input_width + 1), 0 if ok else 1


def cmd_mean(args, cfg):
    rng = _rng(cfg)
    o = _load_or_random(args, rng, 6)
    scale = 1 << o.output_width
    vals = [v / scale - 0.5 for v in o.table]
    res = oracles.estimate_mean(vals, args.eps, rng)
    true = float(np.mean(vals))
    ok = abs(res.value - true) <= args.eps
    return _base(cfg, "mean", n=o.input_width, eps=args.eps, mean=res.value, direct_sum=true,
                 digits=res.digits, queries=res.queries, qubits=o.input_width + 1), 0 if ok else 1


def _factor(args, cfg, method):
    rng = _rng(cfg)
    N = args.n
    try:
        res = shor.factor(N, rng, args.max_repeats, method=method)
    except AlgorithmFailure as exc:
        return _base(cfg, method, N=N, error=str(exc), repeats=exc.report.get("repeats", [])), 1
    doc = res.report()
    doc.update(_base(cfg, "shor" if method == "shor" else "kitaev-factor"))
    width = max(1, (N - 1).bit_length())
    if method == "shor":
        doc["qubits"] = (N * N - 1).bit_length() + width
    else:
        doc["qubits"] = 1 + width  # one reused control qubit plus the work register
    doc["queries"] = res.quantum_repeats
    return doc, 0


def cmd_shor(args, cfg):
    return _factor(args, cfg, "shor")


def cmd_kitaev(args, cfg):
    return _factor(args, cfg, "kitaev")


def cmd_rsa(args, cfg):
    rng = _rng(cfg)
    key = shor.rsa_keygen(args.p, args.q, args.e)
    messages = [args.message] if args.message is not None else list(range(key.N))
    rows, ok = [], True
    for M in messages:
        C = shor.rsa_encrypt(M, key)
        crack = shor.rsa_crack(C, key.public, rng)
        good = crack.message == M and shor.rsa_decrypt(C, key) == M
        ok &= good
        rows.append({"M": M, "C": C, "cracked": crack.message, "route": crack.route,
                     "order": crack.order, "d_prime": crack.d_prime, "repeats": crack.repeats})
    width = (key.N - 1).bit_length()
    return _base(cfg, "rsa-demo", N=key.N, E=key.E, D=key.D, all_recovered=bool(ok), repeats=rows,
                 qubits=(key.N * key.N - 1).bit_length() + width,
                 queries=sum(r["repeats"] for r in rows)), 0 if ok else 1


def cmd_qecc(args, cfg):
    rng = _rng(cfg)
    code = qecc.load_code(args.code) if args.code else qecc.hamming_code()
    css = qecc.CssCode(code)
    model = qecc.NoiseModel.bit_flip(args.eta) if args.channel == "bitflip" else qecc.NoiseModel(args.eta)
    res = qecc.memory_experiment(css, model, args.levels or 1, cfg.shots, rng, verbose=cfg.verbose)
    doc = _base(cfg, "qecc-demo", channel=args.channel, code_length=css.length,
                logical_qubits=css.logical_qubits, qubits=css.length + len(css.checks))
    doc.update(res.report())
    m = css.length
    doc["bound"] = qecc.effective_noise_bound(m, css.correctable, args.eta)
    if (args.levels or 1) == 1 and css.logical_qubits == 1:
        doc["exact_one_round"] = qecc.exact_failure_probability(css, model)
    doc["queries"] = 0
    return doc, 0


def cmd_threshold(args, cfg):
    traj = qecc.concatenation_trajectory(args.eta, args.area, args.d, args.levels)
    return _base(cfg, "threshold", area=args.area, d=args.d, eta0=args.eta, threshold=qecc.threshold(args.area, args.d),
                 trajectory=traj, majority_eta_eff=qecc.eta_eff_majority(min(args.eta, 1.0)),
                 below_threshold=args.eta < qecc.threshold(args.area, args.d), qubits=0, queries=0), 0


def cmd_pathsum(args, cfg):
    rng = _rng(cfg)
    if args.circuit:
        with open(args.circuit) as fh:
            circuits = [circ_mod.parse_circuit(fh.read())]
    else:
        circuits = [pathsum.random_circuit(args.qubits or 4, args.depth, rng) for _ in range(args.count)]
    worst, frames = 0.0, 0
    for c in circuits:
        ref = circ_mod.run_unitary(c, basis_state(c.num_qubits, 0)).amplitudes
        for j in range(1 << c.num_qubits):
            st = pathsum.PathStats()
            a = pathsum.path_amplitude(c, 0, j, st)
            worst = max(worst, abs(a - ref[j]))
            frames = max(frames, st.max_frames)
    ok = worst <= 1e-9
    q, sc = pathsum.interference_example()
    return _base(cfg, "pathsum-verify", circuits=len(circuits), max_deviation=worst, max_frames=frames,
                 agrees=ok, example_quantum=[abs(pathsum.path_amplitude(q, 3, j)) ** 2 for j in range(4)],
                 example_stochastic=pathsum.stochastic_simulate(sc, 3).tolist(),
                 qubits=max(c.num_qubits for c in circuits), queries=0), 0 if ok else 1


def cmd_run(args, cfg):
    with open(args.circuit) as fh:
        c = circ_mod.parse_circuit(fh.read())
    measured = c
    if not any(isinstance(op, circ_mod.Measure) for op in c.ops):
        # no readout in the file: read every qubit at the end
        measured = circ_mod.Circuit(c.num_qubits, list(c.ops), c.oracles).measure(list(range(c.num_qubits)), "out")
    res = circ_mod.sample(measured, args.input, cfg.shots, _rng(cfg))
    doc = _base(cfg, "run", qubits=c.num_qubits)
    doc.update(res.to_dict())
    if args.amplitudes:
        final = circ_mod.execute(c, args.input, _rng(cfg)).final_state
        doc["amplitudes"] = [["%.17g" % a.real, "%.17g" % a.imag] for a in final.amplitudes]
    return doc, 0


def cmd_qfft(args, cfg):
    m_max = args.qubits or 8
    devs = {}
    for m in range(1, m_max + 1):
        U = transforms.qfft_circuit(m).unitary()
        devs[m] = float(np.max(np.abs(U - transforms.dft_matrix(1 << m))))
    m, c = m_max, args.cutoff
    dist = approximation_distance(transforms.qfft_circuit(m).unitary(), transforms.qfft_circuit(m, cutoff=c).unitary())
    bound = transforms.approx_qfft_bound(m, c)
    ok = max(devs.values()) <= 1e-10 and dist <= bound + 1e-12
    return _base(cfg, "qfft-verify", max_deviation=devs, cutoff=c, approx_distance=dist, approx_bound=bound,
                 ok=ok, qubits=m_max, queries=0), 0 if ok else 1


# -- parser ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--shots", type=int, default=1000)
    common.add_argument("--format", choices=["json", "csv", "text"], default="json")
    common.add_argument("--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="qvm", description="Quantum circuit simulation toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    sp = add("dj", cmd_dj, "Deutsch-Jozsa on a constant or balanced oracle")
    sp.add_argument("--qubits", "--n", type=int, dest="qubits")
    sp.add_argument("--kind", choices=["constant", "balanced", "parity"], default="balanced")
    sp.add_argument("--value", type=int, choices=[0, 1], default=0)
    sp.add_argument("--oracle")

    sp = add("simon", cmd_simon, "Simon's algorithm")
    sp.add_argument("--qubits", "--n", type=int, dest="qubits")
    sp.add_argument("--s", type=lambda v: int(v, 2), default=0b101, help="hidden string in binary, 0 for one-to-one")
    sp.add_argument("--c", type=int, default=4)
    sp.add_argument("--oracle")

    sp = add("grover", cmd_grover, "Grover search with known marked count")
    sp.add_argument("--qubits", "--n", type=int, dest="qubits")
    sp.add_argument("--marked", type=int, nargs="+")
    sp.add_argument("--iterations", type=int)

    for name, func, help_ in (("min", cmd_min, "minimum finding"), ("median", cmd_median, "median estimation"),
                              ("mean", cmd_mean, "mean estimation")):
        sp = add(name, func, help_)
        sp.add_argument("--qubits", "--n", type=int, dest="qubits")
        sp.add_argument("--oracle")
        sp.add_argument("--eps", type=float, default=0.1)

    for name, func in (("shor", cmd_shor), ("kitaev-factor", cmd_kitaev)):
        sp = add(name, func, f"factor N with {name.split('-')[0]} order finding")
        sp.add_argument("--n", type=int, required=True)
        sp.add_argument("--max-repeats", type=int, default=20)

    sp = add("rsa-demo", cmd_rsa, "toy RSA round trip and crack by order finding")
    sp.add_argument("--p", type=int, default=3)
    sp.add_argument("--q", type=int, default=11)
    sp.add_argument("--e", type=int, default=7)
    sp.add_argument("--message", type=int)

    sp = add("qecc-demo", cmd_qecc, "CSS memory experiment")
    sp.add_argument("--eta", type=float, default=0.01)
    sp.add_argument("--levels", type=int, default=1, help="correction rounds")
    sp.add_argument("--channel", choices=["depolarizing", "bitflip"], default="depolarizing")
    sp.add_argument("--code", help="generator matrix file")

    sp = add("threshold", cmd_threshold, "concatenation recursion and threshold")
    sp.add_argument("--eta", type=float, default=0.01)
    sp.add_argument("--area", type=int, default=10)
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--levels", type=int, default=3)

    sp = add("pathsum-verify", cmd_pathsum, "path-sum amplitudes against the state engine")
    sp.add_argument("circuit", nargs="?")
    sp.add_argument("--qubits", type=int)
    sp.add_argument("--depth", type=int, default=10)
    sp.add_argument("--count", type=int, default=20)

    sp = add("run", cmd_run, "run a circuit file")
    sp.add_argument("circuit")
    sp.add_argument("--input", type=int, default=0)
    sp.add_argument("--amplitudes", action="store_true")

    sp = add("qfft-verify", cmd_qfft, "QFT against the dense DFT")
    sp.add_argument("--qubits", type=int)
    sp.add_argument("--cutoff", type=int, default=4)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.shots < 1:
        parser.error("--shots must be >= 1")
    cfg = RunConfig(args.seed, args.shots, args.format, args.verbose)
    try:
        report, status = args.func(args, cfg)
    except UsageError as exc:
        parser.error(str(exc))
    except (QvmError, OSError) as exc:
        sys.stderr.write(f"qvm {args.command}: {exc}\n")
        return 2
    sys.stdout.write(render_report(report, cfg.format))
    return status


if __name__ == "__main__":
    sys.exit(main())
