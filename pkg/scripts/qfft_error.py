"""Exact versus approximate QFT: operator distance against the omitted-phase bound."""
import argparse

from qvm.gates import approximation_distance, phase_distance
from qvm.transforms import approx_qfft_bound, qfft_circuit


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-m", type=int, default=8)
    args = ap.parse_args()
    print(f"{'m':>2} {'c':>2} {'distance':>10} {'up to phase':>12} {'bound':>10}")
    for m in range(2, args.max_m + 1):
        exact = qfft_circuit(m).unitary()
        for c in range(1, m):
            approx = qfft_circuit(m, cutoff=c).unitary()
            d = approximation_distance(exact, approx)
            print(f"{m:2d} {c:2d} {d:10.4f} {phase_distance(exact, approx):12.4f} {approx_qfft_bound(m, c):10.4f}")


if __name__ == "__main__":
    main()
