"""Sign of dQ/domega near the nonrelativistic limit over several (n, k).

    python3 scripts/vk_scan.py
"""
import argparse

import numpy as np

from nrdirac.analysis import vk_classify
from nrdirac.core import Grid, Nonlinearity
from nrdirac.groundstate import hat_pair, solve_groundstate
from nrdirac.solver import continue_branch

CASES = ((1, 1.0), (1, 2.0), (1, 3.0), (2, 0.5), (3, 0.5), (3, 1.0))


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--steps", type=int, default=13)
    p.add_argument("--n-points", type=int, default=3001)
    a = p.parse_args()
    eps = np.geomspace(0.1, 0.01, a.steps)
    print(f"{'n':>2} {'k':>4} {'regime':>14} {'expected':>9} {'measured':>13} {'slope':>7}")
    for n, k in CASES:
        t_max = 30.0 / min(k, 1.0)
        hat = hat_pair(solve_groundstate(n, k, 1.0, Grid(t_max, a.n_points, n)))
        branch = continue_branch(eps, hat, Nonlinearity(k))
        v = vk_classify(Nonlinearity(k), n, branch)
        print(f"{n:2d} {k:4g} {v.regime:>14} {v.expected_sign:>9} {v.measured_sign:>13} "
              f"{v.slope:7.3f}")


if __name__ == "__main__":
    main()
