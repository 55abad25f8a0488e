"""Solitary waves of the nonlinear Dirac equation in the nonrelativistic limit."""

from .core import (Branch, DiracProfile, Grid, GridFunction, HatPair, Nonlinearity,
                   eval_F, eval_f, eval_f_prime, kappa, norm_X, norm_X1_weighted)
from .groundstate import hat_pair, solve_groundstate
from .solver import (ShootingOptions, SolverOptions, continue_branch,
                     solve_profile_fixed_point, solve_profile_shooting)

__all__ = [
    "Branch", "DiracProfile", "Grid", "GridFunction", "HatPair", "Nonlinearity",
    "ShootingOptions", "SolverOptions", "continue_branch", "eval_F", "eval_f",
    "eval_f_prime", "hat_pair", "kappa", "norm_X", "norm_X1_weighted",
    "solve_groundstate", "solve_profile_fixed_point", "solve_profile_shooting",
]
