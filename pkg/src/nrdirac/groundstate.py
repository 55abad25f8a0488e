"""Radial NLS groundstate by shooting, its 1D closed form, and the hat pair."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._shooting import bracket_and_bisect, splice_tail
from .core import (EVEN, ODD, ConvergenceError, Grid, GridFunction, GridMismatchError,
                   HatPair, check_exponent)


@dataclass(frozen=True)
class GroundstateOptions:
    """Shooting controls for the groundstate ODE.

    bracket: initial amplitude bracket; ``None`` uses
        [a, 10a] with a = (1/(2m))^{1/(2k)}, widened geometrically if needed.
    substeps: RK4 sub-steps per grid interval.
    cut_rel: relative disagreement of the bracketing trajectories at which the
        analytic linear tail takes over.
    tail_tol: required u(t_max)/u(0).
    """

    bracket: tuple[float, float] | None = None
    bisection_tol: float = 0.0
    substeps: int = 4
    cut_rel: float = 1e-6
    tail_tol: float = 1e-12


@dataclass(frozen=True, eq=False)
class GroundstateProfile:
    grid: Grid
    u: np.ndarray
    du: np.ndarray
    n: int
    k: float
    m: float
    u0: float
    cut_index: int | None = None

    def __post_init__(self):
        for name in ("u", "du"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def r(self) -> np.ndarray:
        return self.grid.t


def _run_factory(n, k, m, grid, substeps):
    h = grid.dt
    extra = grid.n_points

    def run(a):
        return _kernels.shoot_nls(float(a), n, k, m, h, grid.n_points, substeps, extra)

    return run


def solve_groundstate(n: int, k: float, m: float, grid: Grid,
                      opts: GroundstateOptions | None = None) -> GroundstateProfile:
    """Positive decreasing solution of u'' + (n-1)u'/r = u - 2m u^{2k+1}."""
    opts = opts or GroundstateOptions()
    check_exponent(n, k)
    if not m > 0:
        raise ValueError("mass m must be positive")
    base = (1.0 / (2.0 * m)) ** (1.0 / (2.0 * k))
    lo, hi = opts.bracket or (base, 10.0 * base)
    run = _run_factory(n, float(k), float(m), grid, opts.substeps)
    res = bracket_and_bisect(run, lo, hi, rel_tol=opts.bisection_tol)
    t = grid.t
    u, du, cut, du_tail = splice_tail(t, res, n, opts.cut_rel)
    du[cut:] = du_tail
    u0 = 0.5 * (res.lo + res.hi)
    u[0] = u0
    du[0] = 0.0
    if u[-1] > opts.tail_tol * u0:
        raise ConvergenceError(
            f"u(t_max)/u(0) = {u[-1] / u0:.2e} exceeds tail tolerance {opts.tail_tol:.0e}; "
            "increase t_max")
    return GroundstateProfile(grid.with_dim(n), u, du, n, float(k), float(m), u0, cut)


def closed_form_groundstate_1d(k: float, m: float, grid: Grid) -> GroundstateProfile:
    """u(x) = ((k+1)/(2m))^{1/(2k)} sech^{1/k}(k x)."""
    if not (k > 0 and m > 0):
        raise ValueError("k and m must be positive")
    amp = ((k + 1.0) / (2.0 * m)) ** (1.0 / (2.0 * k))
    x = grid.t
    sech = 1.0 / np.cosh(k * x)
    u = amp * sech ** (1.0 / k)
    du = -u * np.tanh(k * x)
    return GroundstateProfile(grid.with_dim(1), u, du, 1, float(k), float(m), amp)


def hat_pair(gs: GroundstateProfile, grid: Grid | None = None) -> HatPair:
    """V^(t) = u_k(|t|), U^ = -V^'/(2m) on the groundstate nodes."""
    grid = gs.grid if grid is None else grid
    if not grid.same_nodes(gs.grid) or grid.dim != gs.n:
        raise GridMismatchError("groundstate and target grid differ")
    uhat = -gs.du / (2.0 * gs.m)
    uhat = np.array(uhat)
    uhat[0] = 0.0
    return HatPair(GridFunction(grid, gs.u, EVEN), GridFunction(grid, uhat, ODD),
                   gs.m, gs.k)


def second_derivative(gs: GroundstateProfile) -> np.ndarray:
    """u'' from the ODE itself (exact on solutions, no differencing)."""
    r = gs.r
    src = gs.u - 2.0 * gs.m * np.abs(gs.u) ** (2 * gs.k) * gs.u
    out = np.empty_like(src)
    out[0] = src[0] / gs.n
    out[1:] = src[1:] - (gs.n - 1) * gs.du[1:] / r[1:]
    return out


def radial_laplacian(u: np.ndarray, grid: Grid, n: int) -> np.ndarray:
    """Second-order radial Laplacian with even reflection at r=0; the last
    node uses a zero ghost value (Dirichlet beyond t_max)."""
    dt = grid.dt
    r = grid.t
    up = np.concatenate([[u[1]], u, [0.0]])
    d2 = (up[2:] - 2 * up[1:-1] + up[:-2]) / dt ** 2
    lap = d2.copy()
    if n > 1:
        d1 = (up[2:] - up[:-2]) / (2 * dt)
        lap[1:] += (n - 1) * d1[1:] / r[1:]
        lap[0] = n * d2[0]
    return lap


def groundstate_residual(gs: GroundstateProfile) -> float:
    """Max over nodes 0..N-2 of |-u/(2m) + Lap u/(2m) + |u|^{2k} u|."""
    u = gs.u
    lap = radial_laplacian(u, gs.grid, gs.n)
    res = (-u + lap) / (2.0 * gs.m) + np.abs(u) ** (2 * gs.k) * u
    return float(np.max(np.abs(res[:-1])))


def lambda_k_values(vhat, uhat, m: float) -> float:
    """sup|V^| + m sup|U^| for raw arrays."""
    return float(np.max(np.abs(vhat)) + m * np.max(np.abs(uhat)))


def lambda_k(hat: HatPair) -> float:
    return lambda_k_values(hat.vhat.values, hat.uhat.values, hat.m)


def window_indices(grid: Grid, t_lo: float, t_hi: float) -> np.ndarray:
    if t_lo > t_hi:
        raise ValueError("window must satisfy t_lo <= t_hi")
    t = grid.t
    tol = 1e-9 * grid.dt
    if t_lo < -tol or t_hi > grid.t_max + tol:
        raise ValueError(f"window [{t_lo}, {t_hi}] outside [0, {grid.t_max}]")
    idx = np.nonzero((t >= t_lo - tol) & (t <= t_hi + tol))[0]
    if idx.size == 0:
        idx = np.array([int(np.argmin(np.abs(t - t_lo)))])
    return idx


def decay_envelope(values: np.ndarray, grid: Grid, n: int, t_lo: float, t_hi: float):
    idx = window_indices(grid, t_lo, t_hi)
    t = grid.t[idx]
    vals = values[idx]
    if np.any(vals <= np.finfo(float).tiny):
        raise ValueError("profile underflows inside the fit window")
    return t, vals, vals * (1.0 + t * t) ** ((n - 1) / 4.0) * np.exp(t)


def decay_constants(gs: GroundstateProfile, window=(5.0, 15.0)) -> tuple[float, float]:
    """min and max of u(t) <t>^{(n-1)/2} e^t over the window."""
    _, _, ratio = decay_envelope(gs.u, gs.grid, gs.n, *window)
    return float(ratio.min()), float(ratio.max())
