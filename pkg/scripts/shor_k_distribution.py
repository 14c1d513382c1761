"""Exact measured-k distribution for order finding, and the mass on good k."""
import argparse
import math

from qvm.shor import OrderProblem, classical_order, good_k, shor_k_distribution


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=15)
    ap.add_argument("--y", type=int, default=7)
    ap.add_argument("--top", type=int, default=12, help="number of most likely k to print")
    args = ap.parse_args()
    p = OrderProblem(args.n, args.y)
    r = classical_order(args.y, args.n)
    dist = shor_k_distribution(p)
    good = sum(dist[k] for k in range(p.Q) if good_k(k, r, p.Q))
    print(f"N={p.N} Y={p.Y} Q={p.Q} order r={r}")
    print(f"mass on good k: {good:.6f}  (reference 4/pi^2 = {4 / math.pi ** 2:.6f})")
    for k in sorted(range(p.Q), key=lambda k: -dist[k])[: args.top]:
        print(f"  k={k:5d}  P={dist[k]:.6f}  k*r mod Q={k * r % p.Q:5d}  good={good_k(k, r, p.Q)}")


if __name__ == "__main__":
    main()
