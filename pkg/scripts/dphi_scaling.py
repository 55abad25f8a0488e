"""Log-log slope of ||d phi/d omega||^2 against eps for pure powers in one dimension.

The measured slope is compared with -n + 2/k - 4.

    python3 scripts/dphi_scaling.py
"""
import numpy as np

from nrdirac.analysis import dphi_domega_scaling
from nrdirac.core import Grid, Nonlinearity
from nrdirac.groundstate import hat_pair, solve_groundstate
from nrdirac.solver import continue_branch


def main():
    eps = np.geomspace(0.1, 0.01, 13)
    for k in (0.5, 1.0, 2.0, 3.0):
        hat = hat_pair(solve_groundstate(1, k, 1.0, Grid(30.0 / min(k, 1.0), 3001)))
        sc = dphi_domega_scaling(continue_branch(eps, hat, Nonlinearity(k)))
        print(f"k={k:g}: slope {sc.slope:.3f}, -n+2/k-4 = {-1 + 2 / k - 4:.3f}")


if __name__ == "__main__":
    main()
