"""Compare the fixed-point and shooting profiles over eps and grid resolution.

    python3 scripts/cross_solver.py --n 3
"""
import argparse

import numpy as np

from nrdirac.core import Grid, Nonlinearity
from nrdirac.groundstate import hat_pair, solve_groundstate
from nrdirac.solver import solve_profile_fixed_point, solve_profile_shooting


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--k", type=float, default=1.0)
    a = p.parse_args()
    nl = Nonlinearity(a.k)
    print(f"{'dt':>7} {'eps':>6} {'sup diff':>10} {'res fp':>10} {'res shoot':>10}")
    for N in (1501, 3001, 6001):
        grid = Grid(30.0, N, a.n)
        hat = hat_pair(solve_groundstate(a.n, a.k, 1.0, grid))
        for eps in (0.1, 0.05):
            fp = solve_profile_fixed_point(eps, hat, nl)
            sh = solve_profile_shooting(eps, a.n, 1.0, nl, grid, hat=hat)
            diff = max(np.max(np.abs(fp.V.values - sh.V.values)),
                       np.max(np.abs(fp.U.values - sh.U.values)))
            print(f"{grid.dt:7.4f} {eps:6.3f} {diff:10.3e} {fp.residual:10.3e} "
                  f"{sh.residual:10.3e}")


if __name__ == "__main__":
    main()
