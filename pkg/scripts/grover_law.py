"""Empirical Grover success rate against sin^2((2q+1) theta) over a grid of (N, t, q)."""
import argparse
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from qvm import oracles


@dataclass
class Config:
    shots: int = 10_000
    seed: int = 0
    max_qubits: int = 6


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--shots", type=int, default=Config.shots)
    ap.add_argument("--seed", type=int, default=Config.seed)
    ap.add_argument("--max-qubits", type=int, default=Config.max_qubits)
    cfg = Config(**{k.replace("-", "_"): v for k, v in vars(ap.parse_args()).items()})
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for n in range(2, cfg.max_qubits + 1):
        N = 1 << n
        for t in (1, 2):
            o = oracles.make_oracle([int(i < t) for i in range(N)], 1)
            for q in range(0, oracles.grover_iterations(N, t) + 2):
                res = oracles.grover_search(o, t, rng, shots=cfg.shots, iterations=q)
                freq = sum(v for k, v in res.histogram.items() if k < t) / cfg.shots
                p = res.success_probability
                z = (freq - p) / max(math.sqrt(p * (1 - p) / cfg.shots), 1e-12)
                rows.append({"N": N, "t": t, "q": q, "predicted": p, "observed": freq, "z": z})
                print(f"N={N:3d} t={t} q={q:2d}  predicted {p:.4f}  observed {freq:.4f}  z={z:+.2f}")
    print(json.dumps({"config": asdict(cfg), "max_abs_z": max(abs(r["z"]) for r in rows)}))


if __name__ == "__main__":
    main()
