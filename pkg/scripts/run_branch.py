"""Continue a Dirac branch from the NLS groundstate and print a summary table.

    python3 scripts/run_branch.py --n 1 --k 1 --eps-max 0.1 --eps-min 0.005 --steps 12
"""
import argparse

import numpy as np

from nrdirac.analysis import error_scaling_fit, positivity_report
from nrdirac.core import Grid, Nonlinearity, norm_X
from nrdirac.groundstate import hat_pair, solve_groundstate
from nrdirac.solver import continue_branch


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--t-max", type=float, default=30.0)
    p.add_argument("--n-points", type=int, default=3001)
    p.add_argument("--eps-max", type=float, default=0.1)
    p.add_argument("--eps-min", type=float, default=0.005)
    p.add_argument("--steps", type=int, default=12)
    a = p.parse_args()

    nl = Nonlinearity(a.k)
    hat = hat_pair(solve_groundstate(a.n, a.k, a.m, Grid(a.t_max, a.n_points, a.n)))
    branch = continue_branch(np.geomspace(a.eps_max, a.eps_min, a.steps), hat, nl)
    print(f"{'eps':>10} {'omega':>12} {'Q':>14} {'E':>14} {'|W~|_X':>11} {'iter':>4} pos")
    for prof, pt in zip(branch.profiles, branch.points):
        size = norm_X((prof.tilde_V, prof.tilde_U))
        print(f"{pt.eps:10.5f} {pt.omega:12.9f} {pt.charge:14.8e} {pt.energy:14.8e} "
              f"{size:11.3e} {prof.iterations:4d} {positivity_report(prof).passed}")
    if branch.truncated:
        print("truncated:", branch.failure)
    if len(branch) >= 4:
        print(f"weighted correction slope in eps: {error_scaling_fit(branch):.3f}")


if __name__ == "__main__":
    main()
