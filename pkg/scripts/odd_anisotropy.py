"""Seed-averaged odd normal-derivative moments against the semicircle values
across several eigenvalue levels, on both fixed circles of the torus."""
import argparse

import numpy as np

from qnodal.experiments import odd_moment_table
from qnodal.config import ExperimentConfig
from qnodal.specfun import semicircle_moment
from qnodal.spectra import lattice_directions


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--levels", type=int, nargs="+", default=[325, 1105, 5525, 9425])
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--m", type=int, nargs="+", default=[0, 1, 2])
    args = p.parse_args()
    cfg = ExperimentConfig()
    print("n      D    " + "  ".join(f"m={m} rel_err" for m in args.m))
    for n in args.levels:
        data = odd_moment_table(n, range(args.seeds), args.m, cfg)
        vals = np.array([v for *_, v in data]).mean(axis=0)
        rel = [v / semicircle_moment(m) - 1 for v, m in zip(vals, args.m)]
        print(f"{n:<6d} {lattice_directions(n).size:<4d} " + "  ".join(f"{r:+11.4f}" for r in rel))


if __name__ == "__main__":
    main()
