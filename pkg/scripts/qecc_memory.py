"""Steane-code memory failure rate versus eta, next to the exact enumeration and the weight>=2 tail."""
import argparse
import json
from dataclasses import asdict, dataclass

import numpy as np

from qvm import qecc


@dataclass
class Config:
    shots: int = 20_000
    rounds: int = 1
    seed: int = 0
    channel: str = "depolarizing"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--shots", type=int, default=Config.shots)
    ap.add_argument("--rounds", type=int, default=Config.rounds)
    ap.add_argument("--seed", type=int, default=Config.seed)
    ap.add_argument("--channel", choices=["depolarizing", "bitflip"], default=Config.channel)
    cfg = Config(**vars(ap.parse_args()))
    css = qecc.steane_code()
    rng = np.random.default_rng(cfg.seed)
    out = []
    for eta in (0.002, 0.005, 0.01, 0.02, 0.05):
        model = qecc.NoiseModel.bit_flip(eta) if cfg.channel == "bitflip" else qecc.NoiseModel(eta)
        res = qecc.memory_experiment(css, model, cfg.rounds, cfg.shots, rng)
        tail = 1 - (1 - eta) ** 7 - 7 * eta * (1 - eta) ** 6
        row = {"eta": eta, "rate": res.rate, "sigma": res.sigma, "tail": tail}
        if cfg.rounds == 1:
            row["exact"] = qecc.exact_failure_probability(css, model)
        out.append(row)
        print("  ".join(f"{k}={v:.3e}" for k, v in row.items()))
    print(json.dumps({"config": asdict(cfg), "rows": out}))


if __name__ == "__main__":
    main()
