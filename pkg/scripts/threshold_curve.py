"""Concatenation trajectories around the threshold C(A, d+1)^(-1/d)."""
import argparse

from qvm.qecc import concatenation_trajectory, levels_to_target, threshold


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--area", type=int, default=10)
    ap.add_argument("--d", type=int, default=1)
    ap.add_argument("--levels", type=int, default=5)
    ap.add_argument("--target", type=float, default=1e-9)
    args = ap.parse_args()
    th = threshold(args.area, args.d)
    print(f"A={args.area} d={args.d} threshold={th:.6g}")
    for frac in (0.25, 0.5, 0.9, 0.99, 1.01, 1.5):
        eta0 = frac * th
        traj = concatenation_trajectory(eta0, args.area, args.d, args.levels)
        need = levels_to_target(eta0, args.area, args.d, args.target)
        print(f"eta0={eta0:.4e} ({frac:4.2f} x threshold) levels-to-target={need}  "
              + " ".join(f"{e:.3e}" for e in traj))


if __name__ == "__main__":
    main()
