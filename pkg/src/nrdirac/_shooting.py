"""Amplitude bisection and tail splicing shared by both shooting solvers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import kve

from ._kernels import HIGH, LOW, UNDECIDED
from .core import ConvergenceError

Run = Callable[[float], tuple[np.ndarray, np.ndarray, int, int]]


@dataclass
class BisectionResult:
    lo: float
    hi: float
    run_lo: tuple
    run_hi: tuple
    iterations: int


def bracket_and_bisect(run: Run, lo: float, hi: float, *, rel_tol: float = 0.0,
                       max_widen: int = 40, max_iter: int = 200) -> BisectionResult:
    """Bisect an initial amplitude between a LOW and a HIGH trajectory.

    ``rel_tol=0`` keeps halving until the bracket is a single ulp wide.
    """
    r_lo, r_hi = run(lo), run(hi)
    for _ in range(max_widen):
        if r_lo[2] == LOW:
            break
        lo *= 0.5
        r_lo = run(lo)
    for _ in range(max_widen):
        if r_hi[2] == HIGH:
            break
        hi *= 2.0
        r_hi = run(hi)
    if r_lo[2] != LOW or r_hi[2] != HIGH:
        raise ConvergenceError(
            f"could not bracket the shooting amplitude (lo={lo:g}, hi={hi:g})")
    it = 0
    while it < max_iter:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= rel_tol * abs(mid):
            break
        r_mid = run(mid)
        it += 1
        if r_mid[2] == LOW:
            lo, r_lo = mid, r_mid
        elif r_mid[2] == HIGH:
            hi, r_hi = mid, r_mid
        else:
            # stayed undecided past the grid: both sides collapse onto it
            lo = hi = mid
            r_lo = r_hi = r_mid
            break
    else:
        raise ConvergenceError("amplitude bisection hit the iteration cap")
    return BisectionResult(lo, hi, r_lo, r_hi, it)


def decaying_mode(t: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Decaying radial solution of y'' + (n-1)y'/t = y and its derivative,
    scaled by e^{t} to stay finite: t^{-nu} K_nu(t), nu = (n-2)/2."""
    nu = 0.5 * (n - 2)
    t = np.asarray(t, dtype=float)
    g = t ** (-nu) * kve(nu, t)
    dg = -t ** (-nu) * kve(nu + 1.0, t)
    return g, dg


def splice_tail(t: np.ndarray, res: BisectionResult, n: int, cut_rel: float = 1e-6):
    """Average the bracketing trajectories while they agree, then continue
    with the decaying linear mode matched in value at the cut node.

    Returns ``(y, z, cut, dy_tail)``: the spliced leading component, the
    averaged second component (valid before ``cut``), the cut index and the
    derivative of the leading component on ``t[cut:]``.
    """
    y_lo, z_lo, _, stop_lo = res.run_lo
    y_hi, z_hi, _, stop_hi = res.run_hi
    last = min(stop_lo, stop_hi, len(t)) - 1
    y = 0.5 * (y_lo + y_hi)
    z = 0.5 * (z_lo + z_hi)
    dev = np.abs(y_hi - y_lo)
    bad = np.nonzero(dev[: last + 1] > cut_rel * np.abs(y[: last + 1]))[0]
    cut = int(bad[0]) - 1 if bad.size else last
    cut = max(cut, 1)
    tt = t[cut:]
    g, dg = decaying_mode(tt, n)
    scale = y[cut] / g[0]
    shift = np.exp(-(tt - tt[0]))
    y[cut:] = scale * g * shift
    return y, z, cut, scale * dg * shift
