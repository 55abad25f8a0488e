"""Compiled fixed-step RK4 integrators for the two shooting problems.

Both integrators march from t=0 on a uniform grid (optionally sub-stepped)
and stop as soon as the trajectory is classified:

* ``LOW``  -- the leading component turns back up while still positive
  (initial amplitude below the groundstate value);
* ``HIGH`` -- the leading component crosses zero (amplitude too large);
* ``UNDECIDED`` -- neither happened within the allowed number of steps.
"""

import numba
import numpy as np

LOW = -1
UNDECIDED = 0
HIGH = 1


@numba.njit(cache=True)
def _nls_rhs(r, u, w, n, k, m):
    src = u - 2.0 * m * abs(u) ** (2.0 * k) * u
    if r == 0.0:
        return w, src / n
    return w, src - (n - 1) * w / r


@numba.njit(cache=True)
def shoot_nls(u0, n, k, m, h, n_grid, substeps, extra_steps):
    """Integrate u'' + (n-1)u'/r = u - 2m|u|^{2k}u, u(0)=u0, u'(0)=0."""
    u_out = np.zeros(n_grid)
    w_out = np.zeros(n_grid)
    u_out[0] = u0
    hs = h / substeps
    u = u0
    w = 0.0
    total = n_grid - 1 + extra_steps
    for i in range(total):
        r0 = i * h
        for j in range(substeps):
            r = r0 + j * hs
            k1u, k1w = _nls_rhs(r, u, w, n, k, m)
            k2u, k2w = _nls_rhs(r + 0.5 * hs, u + 0.5 * hs * k1u, w + 0.5 * hs * k1w, n, k, m)
            k3u, k3w = _nls_rhs(r + 0.5 * hs, u + 0.5 * hs * k2u, w + 0.5 * hs * k2w, n, k, m)
            k4u, k4w = _nls_rhs(r + hs, u + hs * k3u, w + hs * k3w, n, k, m)
            u += hs * (k1u + 2.0 * k2u + 2.0 * k3u + k4u) / 6.0
            w += hs * (k1w + 2.0 * k2w + 2.0 * k3w + k4w) / 6.0
            if u < 0.0:
                return u_out, w_out, HIGH, i + 1
            if w > 0.0:
                return u_out, w_out, LOW, i + 1
        if i + 1 < n_grid:
            u_out[i + 1] = u
            w_out[i + 1] = w
    return u_out, w_out, UNDECIDED, total


@numba.njit(cache=True)
def _dirac_rhs(t, V, U, n, mpo, eps2, k, cs, Ks):
    s = V * V - eps2 * U * U
    a = abs(s)
    g = a ** k
    for i in range(cs.shape[0]):
        g += cs[i] * a ** Ks[i]
    dV = -mpo * U + eps2 * g * U
    src = -V / mpo + g * V
    if t == 0.0:
        return dV, src / n
    return dV, src - (n - 1) * U / t


@numba.njit(cache=True)
def shoot_dirac(V0, n, mpo, eps2, k, cs, Ks, h, n_grid, substeps, extra_steps, blowup):
    """Integrate the rescaled radial Dirac system from (V, U) = (V0, 0).

    ``mpo`` is m + omega; ``cs`` are the perturbation coefficients already
    multiplied by eps^{2K/k - 2} so that g = f(eps^{2/k} s) / eps^2.
    Growth beyond ``blowup * V0`` also counts as ``LOW``.
    """
    V_out = np.zeros(n_grid)
    U_out = np.zeros(n_grid)
    V_out[0] = V0
    hs = h / substeps
    V = V0
    U = 0.0
    total = n_grid - 1 + extra_steps
    for i in range(total):
        t0 = i * h
        for j in range(substeps):
            t = t0 + j * hs
            k1v, k1u = _dirac_rhs(t, V, U, n, mpo, eps2, k, cs, Ks)
            k2v, k2u = _dirac_rhs(t + 0.5 * hs, V + 0.5 * hs * k1v, U + 0.5 * hs * k1u,
                                  n, mpo, eps2, k, cs, Ks)
            k3v, k3u = _dirac_rhs(t + 0.5 * hs, V + 0.5 * hs * k2v, U + 0.5 * hs * k2u,
                                  n, mpo, eps2, k, cs, Ks)
            k4v, k4u = _dirac_rhs(t + hs, V + hs * k3v, U + hs * k3u, n, mpo, eps2, k, cs, Ks)
            V += hs * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0
            U += hs * (k1u + 2.0 * k2u + 2.0 * k3u + k4u) / 6.0
            if V < 0.0:
                return V_out, U_out, HIGH, i + 1
            dV, _ = _dirac_rhs(t + hs, V, U, n, mpo, eps2, k, cs, Ks)
            if dV > 0.0 or V > blowup * V0:
                return V_out, U_out, LOW, i + 1
        if i + 1 < n_grid:
            V_out[i + 1] = V
            U_out[i + 1] = U
    return V_out, U_out, UNDECIDED, total
