"""Solitary-wave profiles of the rescaled radial Dirac system.

Two independent solvers are provided:

* :func:`solve_profile_fixed_point` iterates W~ <- A(eps)^{-1} G(eps, W~)
  around the NLS hat pair on the finite-difference grid;
* :func:`solve_profile_shooting` integrates the radial ODE from t=0 and
  bisects on V(0), serving as an oracle for the first.

:func:`continue_branch` walks a decreasing eps sequence with warm starts.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._shooting import bracket_and_bisect, splice_tail
from .core import (EVEN, ODD, Branch, BranchPoint, ConvergenceError, DiracProfile,
                   DomainError, Grid, GridFunction, GridMismatchError, HatPair,
                   Nonlinearity, check_exponent, norm_X, norm_X1_weighted,
                   profile_from_tilde)
from .linops import BandedOperator, SingularOperatorError, assemble_A, solve_A

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverOptions:
    """Picard iteration controls.

    tolerance: stop once ||W~_{j+1} - W~_j||_X drops below this value.
    damping: relaxation factor in (0, 1]; 1 is plain Picard.
    warm_start: initial correction pair (tilde_V, tilde_U); zero if ``None``.
    """

    max_iterations: int = 200
    tolerance: float = 1e-12
    damping: float = 1.0
    warm_start: tuple[np.ndarray, np.ndarray] | None = None

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not (0.0 < self.damping <= 1.0):
            raise ValueError("damping must lie in (0, 1]")


@dataclass(frozen=True)
class ShootingOptions:
    """Bisection controls for the direct shooting solver.

    v0_bracket: bracket for V(0) as multiples of V^(0).
    bisection_tol: relative width at which bisection stops.
    blowup_threshold: a trajectory exceeding this multiple of V(0) is
        classified as undershooting.
    """

    v0_bracket: tuple[float, float] = (0.5, 2.0)
    bisection_tol: float = 1e-15
    blowup_threshold: float = 10.0
    substeps: int = 4
    cut_rel: float = 1e-6

    def __post_init__(self):
        lo, hi = self.v0_bracket
        if not (0.0 < lo < hi):
            raise ValueError("v0_bracket must be ordered and positive")
        if not (self.bisection_tol > 0 and self.blowup_threshold > 1):
            raise ValueError("tolerances must be positive, blowup_threshold > 1")


def _omega(eps: float, m: float) -> float:
    return float(np.sqrt(m * m - eps * eps))


def _values(x) -> np.ndarray:
    return np.asarray(x.values if isinstance(x, GridFunction) else x, dtype=float)


def scaled_nonlinearity(eps: float, nl: Nonlinearity, s: np.ndarray) -> np.ndarray:
    """g = f(eps^{2/k} s) / eps^2 without forming the tiny argument."""
    a = np.abs(s)
    g = a ** nl.k
    for c, K in nl.terms:
        g = g + c * eps ** (2.0 * K / nl.k - 2.0) * a ** K
    return g


def _check_positivity(eps: float, nl: Nonlinearity, s: np.ndarray) -> None:
    exps = [nl.k] + [K for c, K in nl.terms if c != 0.0]
    if min(exps) < 1.0 and np.any(s <= 0.0):
        bad = int(np.argmax(s <= 0.0))
        raise DomainError(
            f"V^2 - eps^2 U^2 <= 0 at node {bad} (eps={eps:g}); positivity regime lost")


def eval_G(eps: float, hat: HatPair, tilde, nl: Nonlinearity) -> tuple[GridFunction, GridFunction]:
    """Right-hand side G(eps, W~) of the fixed-point form A(eps) W~ = G.

    G1 = -g V + V^^{2k+1} + (1+2k) V^^{2k} V~ + (1/(m+w) - 1/(2m)) V^
    G2 = eps^2 g U + (m - w) U^,   g = f(eps^{2/k}(V^2 - eps^2 U^2)) / eps^2.
    """
    if not (0.0 < eps < hat.m):
        raise ValueError(f"eps must lie in (0, m), got {eps}")
    tV, tU = (_values(x) for x in tilde)
    grid = hat.grid
    if tV.shape != (grid.n_points,) or tU.shape != tV.shape:
        raise GridMismatchError("correction pair does not match the hat grid")
    m, k = hat.m, nl.k
    if k != hat.k:
        raise ValueError(f"nonlinearity exponent {k} differs from the hat pair's {hat.k}")
    omega = _omega(eps, m)
    vh, uh = hat.vhat.values, hat.uhat.values
    V = vh + tV
    U = uh + tU
    s = V * V - eps * eps * U * U
    _check_positivity(eps, nl, s)
    g = scaled_nonlinearity(eps, nl, s)
    vk = vh ** (2.0 * k)
    G1 = -g * V + vk * vh + (1.0 + 2.0 * k) * vk * tV + (1.0 / (m + omega) - 0.5 / m) * vh
    G2 = eps * eps * g * U + (m - omega) * uh
    G2[0] = 0.0
    return GridFunction(grid, G1, EVEN), GridFunction(grid, G2, ODD)


def stationary_residual(profile: DiracProfile, nl: Nonlinearity, n: int | None = None) -> float:
    """Max residual of the rescaled radial system over nodes 0..N-2.

    U' + (n-1)U/t + V/(m+w) - gV = 0 and V' + (m+w)U - eps^2 g U = 0, with
    U/t replaced by U'(0) at the origin.
    """
    n = profile.n if n is None else n
    eps, m = profile.eps, profile.m
    mpo = m + profile.omega
    grid = profile.grid
    dt, t = grid.dt, grid.t
    V, U = profile.V.values, profile.U.values
    s = V * V - eps * eps * U * U
    g = scaled_nonlinearity(eps, nl, s)
    dU = np.empty_like(U)
    dV = np.empty_like(V)
    dU[1:-1] = (U[2:] - U[:-2]) / (2 * dt)
    dV[1:-1] = (V[2:] - V[:-2]) / (2 * dt)
    dU[0] = U[1] / dt
    dV[0] = 0.0
    drift = np.empty_like(U)
    drift[0] = (n - 1) * dU[0]
    drift[1:] = (n - 1) * U[1:] / t[1:]
    r1 = dU + drift + V / mpo - g * V
    r2 = dV + mpo * U - eps * eps * g * U
    return float(max(np.max(np.abs(r1[:-1])), np.max(np.abs(r2[:-1]))))


def solve_profile_fixed_point(eps: float, hat: HatPair, nl: Nonlinearity,
                              opA: BandedOperator | None = None,
                              opts: SolverOptions | None = None) -> DiracProfile:
    """Picard iteration for A(eps) W~ = G(eps, W~)."""
    opts = opts or SolverOptions()
    check_exponent(hat.n, nl.k)
    if opA is None:
        opA = assemble_A(eps, hat)
    if not opA.grid.same_nodes(hat.grid):
        raise GridMismatchError("operator and hat pair grids differ")
    if opA.eps is None or abs(opA.eps - eps) > 1e-15 * max(1.0, eps):
        raise ValueError(f"operator assembled at eps={opA.eps}, requested {eps}")
    grid = hat.grid
    if opts.warm_start is not None:
        tV, tU = (np.array(_values(x), dtype=float) for x in opts.warm_start)
        if tV.shape != (grid.n_points,):
            raise GridMismatchError("warm start does not match the grid")
    else:
        tV = np.zeros(grid.n_points)
        tU = np.zeros(grid.n_points)
    tU[0] = 0.0
    ratios: list[float] = []
    prev = None
    for j in range(1, opts.max_iterations + 1):
        G1, G2 = eval_G(eps, hat, (tV, tU), nl)
        nV, nU = solve_A(opA, (G1, G2))
        if opts.damping != 1.0:
            nV = tV + opts.damping * (nV - tV)
            nU = tU + opts.damping * (nU - tU)
        delta = norm_X((GridFunction(grid, nV - tV, EVEN), GridFunction(grid, nU - tU, ODD)))
        if not np.isfinite(delta):
            raise ConvergenceError(f"iteration diverged at eps={eps:g} (step {j})")
        if prev is not None and prev > 0:
            ratios.append(delta / prev)
        prev = delta
        tV, tU = nV, nU
        if delta < opts.tolerance:
            prof = profile_from_tilde(eps, hat, tV, tU, iterations=j, method="fixed_point",
                                      contraction_ratios=tuple(ratios), k=nl.k)
            res = stationary_residual(prof, nl)
            log.debug("fixed point eps=%g: %d iterations, residual %.3e", eps, j, res)
            return profile_from_tilde(eps, hat, tV, tU, iterations=j, residual=res,
                                      method="fixed_point",
                                      contraction_ratios=tuple(ratios), k=nl.k)
    raise ConvergenceError(
        f"no convergence after {opts.max_iterations} iterations at eps={eps:g} "
        f"(last step {prev:.3e}); eps is likely outside the contraction regime")


def solve_profile_shooting(eps: float, n: int, m: float, nl: Nonlinearity, grid: Grid,
                           opts: ShootingOptions | None = None, *,
                           hat: HatPair | None = None) -> DiracProfile:
    """Shoot on V(0) for the rescaled radial system with U(0) = 0.

    The hat pair supplies the bracket centre and the tilde decomposition; it
    is computed from the NLS groundstate when not given.
    """
    opts = opts or ShootingOptions()
    check_exponent(n, nl.k)
    if not (0.0 < eps < m):
        raise ValueError(f"eps must lie in (0, m), got {eps}")
    grid = grid.with_dim(n)
    if hat is None:
        from .groundstate import hat_pair, solve_groundstate
        hat = hat_pair(solve_groundstate(n, nl.k, m, grid))
    if not hat.grid.same_nodes(grid) or hat.n != n or hat.m != m:
        raise GridMismatchError("hat pair does not match (grid, n, m)")
    omega = _omega(eps, m)
    mpo = m + omega
    c, K = nl.coefficients()
    cs = c * eps ** (2.0 * K / nl.k - 2.0)
    extra = grid.n_points

    def run(v0):
        return _kernels.shoot_dirac(float(v0), n, mpo, eps * eps, nl.k, cs, K, grid.dt,
                                    grid.n_points, opts.substeps, extra,
                                    opts.blowup_threshold)

    v_ref = float(hat.vhat.values[0])
    lo, hi = (f * v_ref for f in opts.v0_bracket)
    res = bracket_and_bisect(run, lo, hi, rel_tol=opts.bisection_tol, max_widen=0)
    V, U, cut, dV_tail = splice_tail(grid.t, res, n, opts.cut_rel)
    U[cut:] = -dV_tail / mpo
    V[0] = 0.5 * (res.lo + res.hi)
    U[0] = 0.0
    if not np.all(np.isfinite(V)) or not np.all(V > 0):
        raise ConvergenceError("shooting profile is not positive on the grid")
    tV = V - hat.vhat.values
    tU = U - hat.uhat.values
    prof = profile_from_tilde(eps, hat, tV, tU, iterations=res.iterations, method="shooting",
                              k=nl.k)
    return profile_from_tilde(eps, hat, tV, tU, iterations=res.iterations,
                              residual=stationary_residual(prof, nl), method="shooting",
                              k=nl.k)


def branch_point(profile: DiracProfile, nl: Nonlinearity, gamma: float) -> BranchPoint:
    from .analysis import charge, energy

    return BranchPoint(
        eps=profile.eps,
        omega=profile.omega,
        charge=charge(profile, nl.k),
        energy=energy(profile, nl),
        norm_tilde_weighted=norm_X1_weighted((profile.tilde_V, profile.tilde_U), gamma),
    )


def continue_branch(eps_values, hat: HatPair, nl: Nonlinearity, grid: Grid | None = None,
                    opts: SolverOptions | None = None, *, gamma: float = 0.1) -> Branch:
    """Solve along a strictly decreasing eps sequence with warm starts.

    The first failure truncates the branch; the partial branch is returned
    with ``truncated=True`` and the failure message.
    """
    opts = opts or SolverOptions()
    grid = hat.grid if grid is None else grid
    if not grid.same_nodes(hat.grid):
        raise GridMismatchError("branch grid differs from the hat grid")
    eps_values = [float(e) for e in eps_values]
    if any(not (0.0 < e < hat.m) for e in eps_values):
        raise ValueError("all eps values must lie in (0, m)")
    if any(b >= a for a, b in zip(eps_values, eps_values[1:])):
        raise ValueError("eps values must be strictly decreasing")
    branch = Branch(hat=hat, nonlinearity=nl, gamma=gamma)
    warm = opts.warm_start
    for eps in eps_values:
        step_opts = SolverOptions(opts.max_iterations, opts.tolerance, opts.damping, warm)
        try:
            prof = solve_profile_fixed_point(eps, hat, nl, assemble_A(eps, hat), step_opts)
        except (ConvergenceError, DomainError, SingularOperatorError) as exc:
            branch.truncated = True
            branch.failure = f"eps={eps:g}: {exc}"
            log.warning("branch truncated at %s", branch.failure)
            break
        branch.append(prof, branch_point(prof, nl, gamma))
        warm = (prof.tilde_V.values, prof.tilde_U.values)
    return branch


@dataclass(frozen=True, eq=False)
class PhysicalProfile:
    """Unscaled radial profile: v(r) = eps^{1/k} V(eps r), u(r) = eps^{1+1/k} U(eps r)."""

    r: np.ndarray
    v: np.ndarray
    u: np.ndarray
    eps: float
    omega: float
    k: float


def unscale(profile: DiracProfile, r_grid, k: float | None = None) -> PhysicalProfile:
    """Physical profiles sampled at ``r_grid`` (linear interpolation)."""
    k = profile.k if k is None else k
    if k is None:
        raise ValueError("exponent k is required to unscale this profile")
    r = np.asarray(r_grid, dtype=float)
    eps = profile.eps
    t = eps * np.abs(r)
    if np.any(t > profile.grid.t_max * (1 + 1e-12)):
        raise ValueError(f"eps*r exceeds the rescaled grid (t_max={profile.grid.t_max})")
    nodes = profile.grid.t
    Vi = np.interp(t, nodes, profile.V.values)
    Ui = np.interp(t, nodes, profile.U.values) * np.sign(r)
    return PhysicalProfile(r, eps ** (1.0 / k) * Vi, eps ** (1.0 + 1.0 / k) * Ui, eps,
                           profile.omega, float(k))
