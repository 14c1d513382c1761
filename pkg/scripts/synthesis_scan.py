"""U3/W3 synthesis length and verified distance as eps shrinks."""
import argparse
import math
import time

import numpy as np
from scipy.stats import unitary_group

from qvm.gates import named_gate
from qvm.synthesis import synthesize_uw


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    ccg = np.eye(8, dtype=complex)
    ccg[6:, 6:] = named_gate("g", math.pi / 7, 0.0).matrix
    targets = {"toffoli": named_gate("toffoli").matrix, "ccg": ccg,
               "haar": unitary_group.rvs(8, random_state=args.seed)}
    for name, T in targets.items():
        for eps in (0.2, 0.1, 0.05, 0.02):
            t0 = time.perf_counter()
            res = synthesize_uw(T, eps)
            rep = res.report()
            print(f"{name:8s} eps={eps:<5} distance={rep['distance']:.2e} steps={rep['steps']:4d} "
                  f"applications={rep['applications']:>12d} scan_cap={rep['scan_cap']} "
                  f"{time.perf_counter() - t0:.2f}s")


if __name__ == "__main__":
    main()
