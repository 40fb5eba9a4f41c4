"""Sup-distance on [0, 2 pi] between characteristic functions of surrogate
traces and the Mixture(a) reference, along a sequence of growing lambda."""
import argparse

import numpy as np

from qnodal.bochner import char_function, mixture_trace, reference_char
from qnodal.specfun import ReferenceLaw

SEQUENCE = ((10, 3), (40, 4), (160, 6), (640, 9))


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--a", type=float, nargs="+", default=[0.3, 0.5, 0.7])
    p.add_argument("--seeds", type=int, default=8)
    args = p.parse_args()
    t = np.linspace(0, 2 * np.pi, 129)
    print("a     " + "  ".join(f"lam=2pi*{k:<4d}" for k, _ in SEQUENCE))
    for a in args.a:
        target = reference_char(ReferenceLaw.mixture(a), t)
        errs = []
        for k, terms in SEQUENCE:
            e = [np.abs(char_function(mixture_trace(a, 2 * np.pi * k, terms, s), t) - target).max()
                 for s in range(args.seeds)]
            errs.append(np.mean(e))
        print(f"{a:<5.2f} " + "  ".join(f"{e:12.5f}" for e in errs))


if __name__ == "__main__":
    main()
