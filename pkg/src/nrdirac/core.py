"""Shared domain types: nonlinearity family, grids, profiles and norms."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gamma as _gamma_fn, pi

import numpy as np

EVEN = "even"
ODD = "odd"


class DomainError(ValueError):
    """Raised when a formula is evaluated outside its domain."""


class GridMismatchError(ValueError):
    """Raised when objects defined on different grids are combined."""


class InvalidExponentError(ValueError):
    """Raised for exponents outside the existence range of the groundstate."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative or shooting solve fails to converge."""


def check_exponent(n: int, k: float) -> None:
    if int(n) != n or n < 1:
        raise ValueError(f"dimension n must be a positive integer, got {n}")
    if not k > 0:
        raise InvalidExponentError(f"k must be positive, got {k}")
    if n >= 3 and not k < 2.0 / (n - 2):
        raise InvalidExponentError(
            f"k={k} violates k < 2/(n-2) = {2.0 / (n - 2):g} for n={n}; "
            "no H^1 groundstate exists")


# ---------------------------------------------------------------------------
# nonlinearity f(tau) = |tau|^k + sum_i c_i |tau|^K_i


@dataclass(frozen=True)
class Nonlinearity:
    k: float
    terms: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if not (np.isfinite(self.k) and self.k > 0):
            raise ValueError(f"leading exponent k must be positive, got {self.k}")
        terms = tuple((float(c), float(K)) for c, K in self.terms)
        for c, K in terms:
            if not np.isfinite(c):
                raise ValueError(f"coefficient must be finite, got {c}")
            if not K > self.k:
                raise ValueError(f"perturbation exponent K={K} must exceed k={self.k}")
        object.__setattr__(self, "k", float(self.k))
        object.__setattr__(self, "terms", terms)

    @property
    def is_pure_power(self) -> bool:
        return not any(c != 0.0 for c, _ in self.terms)

    @property
    def K_min(self) -> float:
        exps = [K for c, K in self.terms if c != 0.0]
        return min(exps) if exps else np.inf

    def coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        """Perturbation coefficients and exponents as float arrays."""
        c = np.array([c for c, _ in self.terms], dtype=float)
        K = np.array([K for _, K in self.terms], dtype=float)
        return c, K

    def to_dict(self) -> dict:
        return {"k": self.k, "terms": [[c, K] for c, K in self.terms]}


def eval_f(nl: Nonlinearity, tau):
    a = np.abs(tau)
    out = a ** nl.k
    for c, K in nl.terms:
        out = out + c * a ** K
    return out


def eval_f_prime(nl: Nonlinearity, tau):
    """Derivative of f; raises :class:`DomainError` at tau=0 when singular."""
    tau_arr = np.asarray(tau, dtype=float)
    exps = [nl.k] + [K for c, K in nl.terms if c != 0.0]
    if min(exps) < 1.0 and np.any(tau_arr == 0.0):
        raise DomainError("f' is singular at tau=0 for exponents below 1")
    a = np.abs(tau_arr)
    s = np.sign(tau_arr)
    out = nl.k * a ** (nl.k - 1.0) * s
    for c, K in nl.terms:
        out = out + c * K * a ** (K - 1.0) * s
    return out if out.ndim else float(out)


def eval_F(nl: Nonlinearity, tau):
    """Primitive F(tau) = int_0^tau f."""
    a = np.abs(tau)
    out = a ** nl.k * tau / (nl.k + 1.0)
    for c, K in nl.terms:
        out = out + c * a ** K * tau / (K + 1.0)
    return out


def kappa(nl: Nonlinearity) -> float:
    """Rate exponent min(1, K/k - 1); 1 for a pure power."""
    if nl.is_pure_power:
        return 1.0
    return min(1.0, nl.K_min / nl.k - 1.0)


def sphere_volume(n: int) -> float:
    """Surface measure of the unit sphere S^{n-1}; equals 2 for n = 1."""
    return 2.0 * pi ** (n / 2.0) / _gamma_fn(n / 2.0)


# ---------------------------------------------------------------------------
# grids and grid functions


@dataclass(frozen=True)
class Grid:
    t_max: float = 30.0
    n_points: int = 3001
    dim: int = 1

    def __post_init__(self):
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise ValueError("n_points must be an integer >= 3")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError("dim must be an integer >= 1")
        object.__setattr__(self, "n_points", int(self.n_points))
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "t_max", float(self.t_max))

    @property
    def dt(self) -> float:
        return self.t_max / (self.n_points - 1)

    @property
    def t(self) -> np.ndarray:
        t = np.linspace(0.0, self.t_max, self.n_points)
        t.setflags(write=False)
        return t

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.t_max, (self.n_points - 1) * factor + 1, self.dim)

    def with_dim(self, dim: int) -> "Grid":
        return Grid(self.t_max, self.n_points, dim)

    def same_nodes(self, other: "Grid") -> bool:
        return self.n_points == other.n_points and np.isclose(self.t_max, other.t_max)

    def to_dict(self) -> dict:
        return {"t_max": self.t_max, "n_points": self.n_points, "dim": self.dim}


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray
    parity: str = EVEN

    def __post_init__(self):
        vals = _frozen(self.values)
        if vals.shape != (self.grid.n_points,):
            raise GridMismatchError(
                f"expected {self.grid.n_points} samples, got shape {vals.shape}")
        if self.parity not in (EVEN, ODD):
            raise ValueError(f"parity must be 'even' or 'odd', got {self.parity!r}")
        if self.parity == ODD and vals[0] != 0.0:
            raise ValueError("odd grid function must vanish at t=0")
        object.__setattr__(self, "values", vals)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _check_same(self, other)
        return GridFunction(self.grid, self.values + other.values, self.parity)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _check_same(self, other)
        return GridFunction(self.grid, self.values - other.values, self.parity)

    def scaled(self, a: float) -> "GridFunction":
        return GridFunction(self.grid, a * self.values, self.parity)

    def full_line(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and values on [-t_max, t_max] extended by parity."""
        t = self.grid.t
        sign = 1.0 if self.parity == EVEN else -1.0
        return (np.concatenate([-t[:0:-1], t]),
                np.concatenate([sign * self.values[:0:-1], self.values]))


def _check_same(a: GridFunction, b: GridFunction) -> None:
    if not a.grid.same_nodes(b.grid):
        raise GridMismatchError("grid functions live on different grids")
    if a.parity != b.parity:
        raise ValueError("cannot combine functions of different parity")


def zeros(grid: Grid, parity: str = EVEN) -> GridFunction:
    return GridFunction(grid, np.zeros(grid.n_points), parity)


# ---------------------------------------------------------------------------
# profiles


@dataclass(frozen=True, eq=False)
class HatPair:
    vhat: GridFunction
    uhat: GridFunction
    m: float
    k: float
    residual_tol: float | None = None

    def __post_init__(self):
        if self.vhat.parity != EVEN or self.uhat.parity != ODD:
            raise ValueError("hat pair must be (even, odd)")
        if not self.vhat.grid.same_nodes(self.uhat.grid):
            raise GridMismatchError("vhat and uhat on different grids")
        if not np.all(self.vhat.values > 0.0):
            raise ValueError("vhat must be strictly positive on the grid")
        # centred-difference truncation is O(dt^2 * |V'''|)
        tol = self.residual_tol
        if tol is None:
            tol = 10.0 * self.grid.dt ** 2 * float(np.max(self.vhat.values)) + 1e-10
        res = hat_second_equation_residual(self)
        if res > tol:
            raise ValueError(f"V' + 2mU residual {res:.3e} exceeds {tol:.1e}")

    @property
    def grid(self) -> Grid:
        return self.vhat.grid

    @property
    def n(self) -> int:
        return self.grid.dim


def hat_second_equation_residual(hat: HatPair) -> float:
    """Max of |V' + 2m U| with V' from centred differences (even reflection)."""
    v = hat.vhat.values
    dt = hat.vhat.grid.dt
    dv = np.empty_like(v)
    dv[0] = 0.0
    dv[1:-1] = (v[2:] - v[:-2]) / (2 * dt)
    dv[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * dt)
    return float(np.max(np.abs(dv + 2 * hat.m * hat.uhat.values)))


@dataclass(frozen=True, eq=False)
class DiracProfile:
    eps: float
    m: float
    V: GridFunction
    U: GridFunction
    tilde_V: GridFunction
    tilde_U: GridFunction
    iterations: int = 0
    residual: float = float("nan")
    method: str = "fixed_point"
    contraction_ratios: tuple[float, ...] = ()
    k: float | None = None

    def __post_init__(self):
        if not (0.0 < self.eps < self.m):
            raise ValueError(f"eps must lie in (0, m), got {self.eps}")
        if self.V.parity != EVEN or self.tilde_V.parity != EVEN:
            raise ValueError("V components must be even")
        if self.U.parity != ODD or self.tilde_U.parity != ODD:
            raise ValueError("U components must be odd")
        if self.U.values[0] != 0.0:
            raise ValueError("U(0) must vanish")

    @property
    def omega(self) -> float:
        return float(np.sqrt(self.m ** 2 - self.eps ** 2))

    @property
    def grid(self) -> Grid:
        return self.V.grid

    @property
    def n(self) -> int:
        return self.grid.dim

    @property
    def vhat(self) -> np.ndarray:
        return self.V.values - self.tilde_V.values

    @property
    def uhat(self) -> np.ndarray:
        return self.U.values - self.tilde_U.values


def profile_from_tilde(eps: float, hat: HatPair, tV, tU, **meta) -> DiracProfile:
    grid = hat.grid
    tV = np.array(tV, dtype=float)
    tU = np.array(tU, dtype=float)
    tU[0] = 0.0
    tV_g = GridFunction(grid, tV, EVEN)
    tU_g = GridFunction(grid, tU, ODD)
    meta.setdefault("k", hat.k)
    return DiracProfile(eps=eps, m=hat.m, V=hat.vhat + tV_g, U=hat.uhat + tU_g,
                        tilde_V=tV_g, tilde_U=tU_g, **meta)


@dataclass
class BranchPoint:
    eps: float
    omega: float
    charge: float
    energy: float
    norm_tilde_weighted: float


@dataclass
class Branch:
    """Profiles along a decreasing eps sequence plus per-point diagnostics."""

    hat: HatPair
    nonlinearity: Nonlinearity
    gamma: float = 0.1
    profiles: list[DiracProfile] = field(default_factory=list)
    points: list[BranchPoint] = field(default_factory=list)
    truncated: bool = False
    failure: str | None = None

    def append(self, profile: DiracProfile, point: BranchPoint) -> None:
        if not profile.grid.same_nodes(self.hat.grid) or profile.m != self.hat.m:
            raise GridMismatchError("branch profiles must share grid and mass")
        if self.profiles and not profile.eps < self.profiles[-1].eps:
            raise ValueError("eps must be strictly decreasing along a branch")
        self.profiles.append(profile)
        self.points.append(point)

    def __len__(self) -> int:
        return len(self.profiles)

    @property
    def eps(self) -> np.ndarray:
        return np.array([p.eps for p in self.points])

    @property
    def omega(self) -> np.ndarray:
        return np.array([p.omega for p in self.points])

    @property
    def charge(self) -> np.ndarray:
        return np.array([p.charge for p in self.points])

    @property
    def energy(self) -> np.ndarray:
        return np.array([p.energy for p in self.points])


# ---------------------------------------------------------------------------
# norms


def radial_weights(grid: Grid, *, japanese: bool = False) -> np.ndarray:
    """Trapezoid weights for int_R g |t|^{n-1} dt of an even integrand, folded to t >= 0.

    With ``japanese=True`` the measure is <t>^{n-1} dt instead.
    """
    t = grid.t
    w = np.full(grid.n_points, grid.dt)
    w[-1] *= 0.5
    # [-t_max, t_max] folds onto [0, t_max]: every node counts twice except t=0
    w[1:] *= 2.0
    base = np.sqrt(1.0 + t * t) if japanese else t
    if grid.dim > 1:
        w = w * base ** (grid.dim - 1)
    return w


def _as_list(g) -> list[GridFunction]:
    if isinstance(g, GridFunction):
        return [g]
    return list(g)


def norm_X(g) -> float:
    """L^2(|t|^{n-1}dt) + L^inf norm; a pair combines components in l^2."""
    parts = _as_list(g)
    total = 0.0
    for gf in parts:
        w = radial_weights(gf.grid)
        l2 = np.sqrt(np.sum(w * gf.values ** 2))
        total += (l2 + np.max(np.abs(gf.values))) ** 2
    return float(np.sqrt(total))


def parity_derivative(values: np.ndarray, dt: float, parity: str) -> np.ndarray:
    """Centred first derivative; parity supplies the ghost node at t=0, one-sided at t_max."""
    d = np.empty_like(values)
    d[1:-1] = (values[2:] - values[:-2]) / (2 * dt)
    d[0] = 0.0 if parity == EVEN else values[1] / dt
    d[-1] = (3 * values[-1] - 4 * values[-2] + values[-3]) / (2 * dt)
    return d


def norm_X1_weighted(g, gamma: float = 0.0) -> float:
    """H^1(<t>^{n-1} dt) norm of exp(gamma <t>) g over the whole line."""
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    parts = _as_list(g)
    total = 0.0
    for gf in parts:
        grid = gf.grid
        t = grid.t
        jt = np.sqrt(1.0 + t * t)
        with np.errstate(over="raise"):
            try:
                weight = np.exp(gamma * jt)
            except FloatingPointError as exc:
                raise OverflowError(f"exp(gamma*<t>) overflows for gamma={gamma}") from exc
        if not np.all(np.isfinite(weight)):
            raise OverflowError(f"exp(gamma*<t>) overflows for gamma={gamma}")
        w = weight * gf.values
        dw = parity_derivative(w, grid.dt, gf.parity)
        q = radial_weights(grid, japanese=True)
        total += np.sum(q * (w * w + dw * dw))
    return float(np.sqrt(total))
