"""Finite-difference linearized operators A(eps) and l_+/l_- with parity
boundary conditions, direct sparse factorization, and operator diagnostics.

Unknowns of A(eps) are interleaved per node, ``[V_0, U_0, V_1, U_1, ...]``,
so the matrix is banded with three sub- and super-diagonals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .core import ConvergenceError, Grid, GridMismatchError, HatPair
from .groundstate import GroundstateProfile


class SingularOperatorError(np.linalg.LinAlgError):
    """The discretized operator has a (numerical) kernel."""


@dataclass(eq=False)
class BandedOperator:
    grid: Grid
    matrix: sp.csc_matrix
    kind: str
    eps: float | None = None
    m: float = 1.0
    block: int = 2
    meta: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def _lu(self):
        try:
            lu = spla.splu(self.matrix)
        except RuntimeError as exc:
            raise SingularOperatorError(str(exc)) from exc
        diag = np.abs(lu.U.diagonal())
        if diag.min() <= 1e-14 * diag.max():
            raise SingularOperatorError(f"{self.kind} operator is numerically singular")
        return lu

    def solve(self, b: np.ndarray) -> np.ndarray:
        return self._lu.solve(np.asarray(b, dtype=float))

    def solve_transpose(self, b: np.ndarray) -> np.ndarray:
        return self._lu.solve(np.asarray(b, dtype=float), trans="T")

    def __matmul__(self, x):
        return self.matrix @ x

    def scaled(self, a: float) -> "BandedOperator":
        return BandedOperator(self.grid, (a * self.matrix).tocsc(), self.kind, self.eps,
                              self.m, self.block, dict(self.meta))


def interleave(V: np.ndarray, U: np.ndarray) -> np.ndarray:
    w = np.empty(2 * len(V))
    w[0::2] = V
    w[1::2] = U
    return w


def split(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return w[0::2].copy(), w[1::2].copy()


def assemble_A(eps: float, hat: HatPair, grid: Grid | None = None) -> BandedOperator:
    """A(eps) = [[-1/(m+w) + (1+2k)|V^|^{2k}, -d/dt - (n-1)/t], [d/dt, m+w]].

    Row layout: node 0 carries the first equation (with U/t replaced by its
    limit U'(0), giving -n U_1/dt after odd reflection) and the odd condition
    U_0 = 0; the last node carries Dirichlet conditions.  The pure boundary
    rows are weighted by 1/(2 dt); weaker O(1) rows admit a boundary-layer mode whose singular
    value decays like sqrt(dt).
    """
    grid = hat.grid if grid is None else grid
    if not grid.same_nodes(hat.grid):
        raise GridMismatchError("hat pair and operator grid differ")
    m, k = hat.m, hat.k
    if not (0.0 <= eps < m):
        raise ValueError(f"eps must lie in [0, m), got {eps}")
    omega = np.sqrt(m * m - eps * eps)
    mpo = m + omega
    n = grid.dim
    N = grid.n_points
    dt = grid.dt
    t = grid.t
    a = -1.0 / mpo + (1.0 + 2.0 * k) * np.abs(hat.vhat.values) ** (2.0 * k)

    rows, cols, vals = [], [], []

    def put(r, c, v):
        rows.append(r)
        cols.append(c)
        vals.append(v)

    c = 0.5 / dt
    # node 0
    put(0, 0, a[0])
    put(0, 3, -n / dt)
    put(1, 1, c)
    # interior nodes, vectorised
    i = np.arange(1, N - 1)
    r1, r2 = 2 * i, 2 * i + 1
    # (n-1)U/t uses the neighbour average so that V_i only meets U_{i+-1}:
    # a pointwise U_i would couple the two checkerboard sublattices and give
    # the sawtooth branch a near-kernel when n > 1
    drift = 0.5 * (n - 1) / t[i]
    rows += [r1, r1, r1, r2, r2, r2]
    cols += [2 * i, 2 * i + 3, 2 * i - 1, 2 * i + 2, 2 * i - 2, 2 * i + 1]
    vals += [a[i], -c - drift, c - drift,
             np.full(i.size, c), np.full(i.size, -c), np.full(i.size, mpo)]
    # last node: Dirichlet, weighted like the difference stencil so the
    # condition is as stiff as the interior rows
    put(2 * N - 2, 2 * N - 2, c)
    put(2 * N - 1, 2 * N - 1, c)

    rows = np.concatenate([np.atleast_1d(x) for x in rows])
    cols = np.concatenate([np.atleast_1d(x) for x in cols])
    vals = np.concatenate([np.atleast_1d(np.asarray(x, dtype=float)) for x in vals])
    mat = sp.csc_matrix((vals, (rows, cols)), shape=(2 * N, 2 * N))
    return BandedOperator(grid, mat, "A", float(eps), m, 2,
                          {"omega": float(omega), "k": k, "n": n})


def rhs_vector(r1: np.ndarray, r2: np.ndarray) -> np.ndarray:
    """Right-hand side for A with the boundary rows zeroed."""
    b = interleave(r1, r2)
    b[1] = 0.0
    b[-2:] = 0.0
    return b


def solve_A(opA: BandedOperator, rhs) -> tuple[np.ndarray, np.ndarray]:
    """Solve A w = rhs for an (even, odd) right-hand side pair."""
    r1, r2 = (np.asarray(x.values if hasattr(x, "values") else x, dtype=float) for x in rhs)
    if r1.shape != (opA.grid.n_points,) or r2.shape != r1.shape:
        raise GridMismatchError("rhs does not match the operator grid")
    if opA.kind != "A":
        raise ValueError("solve_A expects an A(eps) operator")
    w = opA.solve(rhs_vector(r1, r2))
    V, U = split(w)
    U[0] = 0.0
    return V, U


def apply_A(opA: BandedOperator, V: np.ndarray, U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return split(opA @ interleave(V, U))


def _assemble_l(gs: GroundstateProfile, coupling: float, kind: str,
                grid: Grid | None) -> BandedOperator:
    grid = gs.grid if grid is None else grid
    if not grid.same_nodes(gs.grid):
        raise GridMismatchError("groundstate and operator grid differ")
    n, m, k = gs.n, gs.m, gs.k
    N = grid.n_points
    dt = grid.dt
    r = grid.t
    pot = 1.0 / (2 * m) - coupling * np.abs(gs.u) ** (2 * k)
    s = 1.0 / (2 * m * dt * dt)
    main = pot + 2 * s
    lower = np.zeros(N - 1)
    upper = np.zeros(N - 1)
    # interior: -(1/2m)(u'' + (n-1)u'/r)
    i = np.arange(1, N - 1)
    drift = (n - 1) / (2 * m) / (2 * dt) / r[i]
    lower[i - 1] = -s + drift
    upper[i] = -s - drift
    # r = 0: Lap u -> n u''(0), even reflection u_{-1} = u_1
    main[0] = pot[0] + 2 * n * s
    upper[0] = -2 * n * s
    # r = r_max: Dirichlet row
    main[-1] = pot[-1] + 2 * s
    lower[-1] = 0.0
    mat = sp.diags([lower, main, upper], [-1, 0, 1], format="csc")
    return BandedOperator(grid, mat, kind, None, m, 1, {"k": k, "n": n})


def assemble_l_plus(gs: GroundstateProfile, grid: Grid | None = None) -> BandedOperator:
    """l_+ = 1/(2m) - Lap/(2m) - (1+2k) u_k^{2k} on radial functions."""
    return _assemble_l(gs, 1.0 + 2.0 * gs.k, "l_plus", grid)


def assemble_l_minus(gs: GroundstateProfile, grid: Grid | None = None) -> BandedOperator:
    """l_- = 1/(2m) - Lap/(2m) - u_k^{2k} on radial functions."""
    return _assemble_l(gs, 1.0, "l_minus", grid)


def min_singular_value(op: BandedOperator, *, tol: float = 1e-10,
                       max_iter: int = 5000) -> float:
    """Smallest singular value in the plain l^2 sense, from the largest
    eigenvalue of (A^T A)^{-1} = A^{-1} A^{-T} by Lanczos iteration."""
    size = op.size
    lin = spla.LinearOperator((size, size), dtype=float,
                              matvec=lambda x: op.solve(op.solve_transpose(x)))
    v0 = np.ones(size) / np.sqrt(size)
    try:
        vals = spla.eigsh(lin, k=1, which="LM", tol=tol, maxiter=max_iter, v0=v0,
                          return_eigenvectors=False)
    except spla.ArpackNoConvergence as exc:
        raise ConvergenceError("singular value iteration did not converge") from exc
    return float(1.0 / np.sqrt(vals[0]))


def gamma0_estimate(norm_Ainv_sup: float, k: float) -> float:
    """Admissible weight bound (1/(1+2k)) / (1 + sup ||A(eps)^{-1}||)."""
    if norm_Ainv_sup < 0:
        raise ValueError("operator norm estimate must be non-negative")
    return (1.0 / (1.0 + 2.0 * k)) / (1.0 + norm_Ainv_sup)


def scaling_direction(gs: GroundstateProfile) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """xi = u/k + r u' together with xi' and the partner -xi'/(2m).

    Derivatives come from the ODE (u'' and u''' are exact on solutions).
    """
    from .groundstate import second_derivative

    r = gs.r
    u, du = gs.u, gs.du
    d2u = second_derivative(gs)
    xi = u / gs.k + r * du
    dxi = du / gs.k + du + r * d2u
    return xi, dxi, -dxi / (2.0 * gs.m)
