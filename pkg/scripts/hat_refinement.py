"""Modular of one coarse nodal hat, evaluated on the coarse grid and on refinements.

The hat is piecewise linear on every refinement, so the refined values
converge to its exact modular.  Shows how far the coarse node-pair
quadrature sits from that limit.
"""
import argparse

import numpy as np

from fglap.energy import modular
from fglap.lattice import LatticeFunction
from fglap.young import make_power


def hat(m, node, refine):
    H = 2 / (m - 1)
    mf = (m - 1) * refine + 1
    x = np.linspace(-1, 1, mf)
    return LatticeFunction(np.maximum(0.0, 1 - np.abs(x + 1 - node * H) / H), (-1.0,), 2 / (mf - 1))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=64)
    ap.add_argument("--refine", type=int, nargs="+", default=[1, 2, 4, 8, 16])
    args = ap.parse_args()
    for p, s in ((3.0, 0.5), (4.0, 0.3), (3.0, 0.8)):
        vals = [modular(make_power(p), hat(args.nodes, args.nodes // 2 - 1, r), s) for r in args.refine]
        gaps = [abs(vals[0] - v) / v for v in vals]
        print(f"p={p:g} s={s:g}: " + "  ".join(f"r{r}={v:.4g}" for r, v in zip(args.refine, vals))
              + f"  coarse vs finest {gaps[-1]:.1%}")


if __name__ == "__main__":
    main()
