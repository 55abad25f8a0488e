"""Observables and quantitative checks along solitary-wave branches.

Charge and energy, Vakhitov-Kolokolov sign classification, positivity,
cone trapping, decay envelopes, scaling exponents and the q1/q2 check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (Branch, DiracProfile, HatPair, Nonlinearity, eval_F, eval_f,
                   norm_X1_weighted, radial_weights, sphere_volume)
from .groundstate import window_indices
from .solver import scaled_nonlinearity, stationary_residual, unscale


class StaleProfileError(ValueError):
    """The profile does not solve the stationary system to the required residual."""


class TooFewPointsError(ValueError):
    """A branch is too short for the requested finite difference or fit."""


SUBCRITICAL = "subcritical"
CRITICAL = "critical"
SUPERCRITICAL = "supercritical"
NEGATIVE = "negative"
POSITIVE = "positive"
INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class VKVerdict:
    regime: str
    expected_sign: str
    measured_sign: str
    slope: float = float("nan")

    @property
    def agrees(self) -> bool:
        return self.measured_sign == self.expected_sign


@dataclass(frozen=True)
class DecayFit:
    window: tuple[float, float]
    ratio_min: float
    ratio_max: float
    rate_estimate: float

    @property
    def spread(self) -> float:
        return self.ratio_max / self.ratio_min


@dataclass(frozen=True)
class PositivityReport:
    min_ratio_UV: float
    min_scalar_ratio: float
    passed: bool


def _ball_integral(values: np.ndarray, grid) -> float:
    """int over R^n of a radial integrand sampled on the rescaled grid."""
    w = radial_weights(grid)
    # radial_weights folds the line; over R^n the half-line measure times |S^{n-1}|
    half = w.copy()
    half[1:] *= 0.5
    return float(sphere_volume(grid.dim) * np.sum(half * values))


def charge(profile: DiracProfile, k: float | None = None) -> float:
    """Q = eps^{2/k-n} |S^{n-1}| int_0^inf (V^2 + eps^2 U^2) t^{n-1} dt."""
    k = profile.k if k is None else k
    eps, n = profile.eps, profile.n
    V, U = profile.V.values, profile.U.values
    dens = V * V + eps * eps * U * U
    return eps ** (2.0 / k - n) * _ball_integral(dens, profile.grid)


def _stale_threshold(profile: DiracProfile, k: float) -> float:
    vmax = float(np.max(np.abs(profile.V.values)))
    return max(1e-6, 50.0 * profile.grid.dt ** 2 * vmax ** (2.0 * k + 1.0))


def energy(profile: DiracProfile, nl: Nonlinearity, *, max_residual: float | None = None) -> float:
    """E = omega Q + |S^{n-1}| int (f(s)s - F(s)) r^{n-1} dr with s = v^2 - u^2.

    The identity behind this form holds only on solutions, so a profile
    whose stationary residual exceeds ``max_residual`` is rejected.
    """
    k = nl.k
    if max_residual is None:
        max_residual = _stale_threshold(profile, k)
    res = stationary_residual(profile, nl)
    if res > max_residual:
        raise StaleProfileError(
            f"stationary residual {res:.3e} exceeds {max_residual:.3e}; not a solution")
    eps, n = profile.eps, profile.n
    V, U = profile.V.values, profile.U.values
    tau = eps ** (2.0 / k) * (V * V - eps * eps * U * U)
    dens = eval_f(nl, tau) * tau - eval_F(nl, tau)
    # dr r^{n-1} = eps^{-n} dt t^{n-1}
    return profile.omega * charge(profile, k) + eps ** (-n) * _ball_integral(dens, profile.grid)


def _require(branch: Branch, count: int) -> None:
    if len(branch) < count:
        raise TooFewPointsError(f"need at least {count} branch points, got {len(branch)}")


def dQ_domega(branch: Branch) -> tuple[np.ndarray, np.ndarray]:
    """Finite-difference dQ/domega at the recorded omegas (centred inside,
    one-sided at the ends)."""
    _require(branch, 3)
    om = branch.omega
    return om, np.gradient(branch.charge, om, edge_order=2)


def dQ_deps(branch: Branch) -> tuple[np.ndarray, np.ndarray]:
    _require(branch, 3)
    eps = branch.eps
    return eps, np.gradient(branch.charge, eps, edge_order=2)


def vk_regime(nl: Nonlinearity, n: int) -> tuple[str, str]:
    crit = 2.0 / n
    if np.isclose(nl.k, crit, rtol=1e-12, atol=0.0):
        if not nl.is_pure_power and nl.K_min <= 4.0 / n:
            raise ValueError(f"critical k=2/n requires every K > 4/n, got K={nl.K_min}")
        return CRITICAL, NEGATIVE
    if nl.k < crit:
        return SUBCRITICAL, NEGATIVE
    return SUPERCRITICAL, POSITIVE


def sign_label(values) -> str:
    values = np.asarray(values, dtype=float)
    if np.all(values < 0):
        return NEGATIVE
    if np.all(values > 0):
        return POSITIVE
    return INDETERMINATE


def fit_slope(x, y) -> float:
    """Least-squares slope of log|y| against log x."""
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive data")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def vk_classify_arrays(nl: Nonlinearity, n: int, eps, charge_values) -> VKVerdict:
    """VK verdict from raw (eps, Q) samples ordered by decreasing eps."""
    eps = np.asarray(eps, dtype=float)
    Q = np.asarray(charge_values, dtype=float)
    if eps.size < 3:
        raise TooFewPointsError("need at least 3 branch points")
    regime, expected = vk_regime(nl, n)
    dQe = np.gradient(Q, eps, edge_order=2)
    # d eps/d omega = -omega/eps < 0, so only the sign flips
    dQo = -dQe
    order = np.argsort(eps)
    measured = sign_label(dQo[order[:3]])
    slope = fit_slope(eps, dQe) if regime == CRITICAL else float("nan")
    return VKVerdict(regime, expected, measured, slope)


def vk_classify(nl: Nonlinearity, n: int, branch: Branch) -> VKVerdict:
    """Expected VK sign from (k, n) against the measured sign of dQ/domega at
    the three smallest eps; the critical case also reports the log-log slope
    of |dQ/deps| against eps."""
    _require(branch, 3)
    regime, expected = vk_regime(nl, n)
    om, dq = dQ_domega(branch)
    order = np.argsort(branch.eps)
    measured = sign_label(dq[order[:3]])
    slope = float("nan")
    if regime == CRITICAL:
        eps, dqe = dQ_deps(branch)
        slope = fit_slope(eps, dqe)
    return VKVerdict(regime, expected, measured, slope)


def positivity_report(profile: DiracProfile) -> PositivityReport:
    """min V/(2 eps |U|) over nodes with U != 0 and
    min (V^2 - eps^2 U^2) / ((V^2 + eps^2 U^2)/2); passes iff both >= 1."""
    eps = profile.eps
    V, U = profile.V.values, profile.U.values
    nz = U != 0.0
    ratio_uv = float(np.min(V[nz] / (2.0 * eps * np.abs(U[nz])))) if np.any(nz) else np.inf
    den = 0.5 * (V * V + eps * eps * U * U)
    pos = den > 0
    scalar = (V * V - eps * eps * U * U)[pos] / den[pos]
    ratio_s = float(np.min(scalar)) if scalar.size else np.inf
    return PositivityReport(ratio_uv, ratio_s, bool(ratio_uv >= 1.0 and ratio_s >= 1.0))


def cone_region_check(profile, T1: float, m: float | None = None) -> bool:
    """V > 0, U > 0 and V/(4m) < U < 2V/m at every node with t in [T1, t_cut].

    Accepts a :class:`DiracProfile` or a :class:`HatPair`.
    """
    if isinstance(profile, HatPair):
        V, U, grid, m = profile.vhat.values, profile.uhat.values, profile.grid, profile.m
    else:
        V, U, grid = profile.V.values, profile.U.values, profile.grid
        m = profile.m if m is None else m
    if T1 < 2 * grid.dim:
        raise ValueError(f"T1 must be at least 2n = {2 * grid.dim}")
    big = np.nonzero(V > 100.0 * np.finfo(float).eps)[0]
    if big.size == 0:
        return False
    t = grid.t
    sel = (t >= T1) & (np.arange(t.size) <= big[-1])
    v, u = V[sel], U[sel]
    return bool(np.all(v > 0) and np.all(u > 0) and np.all(v / (4 * m) < u)
                and np.all(u < 2 * v / m))


def cone_vector_field(V, U, t: float, eps: float, m: float, nl: Nonlinearity, n: int):
    """(V', U') of the rescaled radial system at time t."""
    omega = np.sqrt(m * m - eps * eps)
    mpo = m + omega
    V = np.asarray(V, dtype=float)
    U = np.asarray(U, dtype=float)
    g = scaled_nonlinearity(eps, nl, V * V - eps * eps * U * U)
    dV = -mpo * U + eps * eps * g * U
    dU = -(n - 1) * U / t - V / mpo + g * V
    return dV, dU


def cone_boundary_samples(delta: float, nu: float, m: float, count: int):
    """Boundary pieces of K+ and K- inside the delta-disk with inner normals.

    Yields ``(label, V, U, normal)`` per piece with ``count`` samples each.
    """
    pieces = []

    def seg(label, v0, v1, ufun, normal):
        V = np.linspace(v0, v1, count)
        U = ufun(V)
        keep = V * V + U * U <= delta * delta
        pieces.append((label, V[keep], U[keep], np.array(normal, dtype=float)))

    # K+ : U >= max(0, (V+nu)/m, 2V/m)
    seg("K+ U=0", -delta, -nu, lambda v: np.zeros_like(v), (0.0, 1.0))
    seg("K+ U=(V+nu)/m", -nu, nu, lambda v: (v + nu) / m, (-1.0, m))
    seg("K+ U=2V/m", nu, delta, lambda v: 2 * v / m, (-2.0, m))
    # K- : V >= 0, U <= min((V-nu)/(2m), V/(4m))
    Vz = np.zeros(count)
    Uz = np.linspace(-delta, -nu / (2 * m), count)
    pieces.append(("K- V=0", Vz, Uz, np.array([1.0, 0.0])))
    seg("K- U=(V-nu)/(2m)", 0.0, 2 * nu, lambda v: (v - nu) / (2 * m), (1.0, -2 * m))
    seg("K- U=V/(4m)", 2 * nu, delta, lambda v: v / (4 * m), (1.0, -4 * m))
    return pieces


def boundary_inflow_check(eps: float, nl: Nonlinearity, hat: HatPair, delta: float,
                          nu: float, sample_count: int = 100, t: float | None = None,
                          *, detail: bool = False):
    """Inner-normal components of the vector field on the cone boundaries are
    positive at every sample (the delta-circle arc excluded)."""
    n, m = hat.n, hat.m
    t = max(2.0 * n, 5.0) if t is None else t
    if t < 2 * n:
        raise ValueError(f"t must be at least 2n = {2 * n}")
    if not (0 < nu < delta):
        raise ValueError("need 0 < nu < delta")
    worst = {}
    ok = True
    for label, V, U, normal in cone_boundary_samples(delta, nu, m, sample_count):
        if V.size == 0:
            continue
        dV, dU = cone_vector_field(V, U, t, eps, m, nl, n)
        dots = normal[0] * dV + normal[1] * dU
        worst[label] = float(np.min(dots))
        ok = ok and bool(np.all(dots > 0))
    return (ok, worst) if detail else ok


def decay_fit(obj, window=(5.0, 15.0)) -> DecayFit:
    """Envelope V(t) <t>^{(n-1)/2} e^t over the window and the fitted log-slope."""
    if isinstance(obj, HatPair):
        V, grid = obj.vhat.values, obj.grid
    else:
        V, grid = obj.V.values, obj.grid
    lo, hi = window
    idx = window_indices(grid, lo, hi)
    t = grid.t[idx]
    v = V[idx]
    if np.any(v <= np.finfo(float).tiny):
        raise ValueError("profile underflows inside the fit window")
    n = grid.dim
    ratio = v * (1.0 + t * t) ** ((n - 1) / 4.0) * np.exp(t)
    rate = float(np.polyfit(t, np.log(v), 1)[0]) if t.size > 1 else float("nan")
    return DecayFit((float(lo), float(hi)), float(ratio.min()), float(ratio.max()), rate)


def error_scaling_fit(branch: Branch, gamma: float | None = None) -> float:
    """Slope of log ||e^{gamma<t>} W~||_{H^1} against log eps."""
    _require(branch, 4)
    gamma = branch.gamma if gamma is None else gamma
    norms = [norm_X1_weighted((p.tilde_V, p.tilde_U), gamma) for p in branch.profiles]
    return fit_slope(branch.eps, norms)


@dataclass(frozen=True)
class DphiScaling:
    eps: np.ndarray
    norm_sq: np.ndarray
    slope: float
    constant: float


def dphi_domega_scaling(branch: Branch) -> DphiScaling:
    """||d phi/d omega||_{L^2}^2 by centred differences of the unscaled
    profiles, with the fitted log-log slope against eps."""
    _require(branch, 4)
    prof = branch.profiles
    om = branch.omega
    k = branch.nonlinearity.k
    grid = prof[0].grid
    n = grid.dim
    vol = sphere_volume(n)
    out_eps, out_norm = [], []
    for i in range(1, len(prof) - 1):
        a, b = prof[i - 1], prof[i + 1]
        # physical nodes of the middle profile that every neighbour covers
        r = grid.t / prof[i].eps
        r = r[r * max(a.eps, b.eps) <= grid.t_max]
        pa, pb = unscale(a, r, k), unscale(b, r, k)
        dw = om[i + 1] - om[i - 1]
        dv = (pb.v - pa.v) / dw
        du = (pb.u - pa.u) / dw
        w = np.full(r.size, r[1] - r[0])
        w[0] *= 0.5
        w[-1] *= 0.5
        out_eps.append(prof[i].eps)
        out_norm.append(vol * float(np.sum(w * (dv * dv + du * du) * r ** (n - 1))))
    eps = np.array(out_eps)
    nsq = np.array(out_norm)
    slope, icpt = np.polyfit(np.log(eps), np.log(nsq), 1)
    return DphiScaling(eps, nsq, float(slope), float(np.exp(icpt)))


def q1_q2(hat: HatPair, n: int | None = None, k: float | None = None,
          m: float | None = None) -> tuple[float, float]:
    """q1 = int (4m V^^{2k} U^^2 + U^^2), q2 = int (V^^2/(4m^2) + 2m V^^{2k} U^^2 + U^^2) over R^n."""
    n = hat.n if n is None else n
    k = hat.k if k is None else k
    m = hat.m if m is None else m
    grid = hat.grid.with_dim(n)
    V, U = hat.vhat.values, hat.uhat.values
    vk = V ** (2.0 * k)
    q1 = _ball_integral(4 * m * vk * U * U + U * U, grid)
    q2 = _ball_integral(V * V / (4 * m * m) + 2 * m * vk * U * U + U * U, grid)
    return q1, q2


@dataclass(frozen=True)
class InnerProductCheck:
    eps: np.ndarray
    measured: np.ndarray
    predicted: np.ndarray
    rel_deviation: np.ndarray


def inner_product_crosscheck(branch: Branch, hat: HatPair | None = None) -> InnerProductCheck:
    """<V^, d_eps V~> against eps q1 + eps (1/k - n/2) q2 at interior points."""
    _require(branch, 3)
    hat = branch.hat if hat is None else hat
    k = branch.nonlinearity.k
    n = hat.n
    q1, q2 = q1_q2(hat)
    eps = branch.eps
    tv = np.array([p.tilde_V.values for p in branch.profiles])
    d = np.gradient(tv, eps, axis=0)[1:-1]
    e = eps[1:-1]
    meas = np.array([_ball_integral(hat.vhat.values * row, hat.grid) for row in d])
    pred = e * q1 + e * (1.0 / k - n / 2.0) * q2
    return InnerProductCheck(e, meas, pred, np.abs(meas - pred) / np.abs(pred))


@dataclass(frozen=True)
class ErrorBounds:
    h: float
    two_kappa: float


def predicted_error_bounds(nl: Nonlinearity, lambda_k: float, eps: float) -> ErrorBounds:
    """h(eps) = max(H(eps^{2/k} 4 Lambda^2), eps^{2k}, eps^2), H(tau) = sum |c| tau^{K-k}."""
    from .core import kappa

    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie in (0, 1)")
    tau = eps ** (2.0 / nl.k) * 4.0 * lambda_k ** 2
    H = sum(abs(c) * tau ** (K - nl.k) for c, K in nl.terms)
    h = max(H, eps ** (2.0 * nl.k), eps ** 2)
    return ErrorBounds(float(h), 2.0 * kappa(nl))
