import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nrdirac.core import Grid, GridMismatchError
from nrdirac.groundstate import hat_pair, solve_groundstate
from nrdirac.linops import (apply_A, assemble_A, assemble_l_minus, assemble_l_plus,
                            gamma0_estimate, interleave, min_singular_value,
                            scaling_direction, solve_A)


def _interior(x):
    return np.max(np.abs(x[:-1]))


class TestAssembleA:
    def test_eps_zero_entries(self, hat111):
        A = assemble_A(0.0, hat111).matrix.toarray()
        # interior node 5: (2,2) block is m + omega = 2m, (1,1) carries -1/(2m)
        assert A[11, 11] == pytest.approx(2.0)
        assert A[10, 10] == pytest.approx(-0.5 + 3 * hat111.vhat.values[5] ** 2)

    def test_zero_pair(self, hat111):
        n = hat111.grid.n_points
        V, U = apply_A(assemble_A(0.0, hat111), np.zeros(n), np.zeros(n))
        assert not V.any() and not U.any()

    def test_range_and_grid(self, hat111):
        with pytest.raises(ValueError):
            assemble_A(1.0, hat111)
        with pytest.raises(GridMismatchError):
            assemble_A(0.0, hat111, Grid(30.0, 1001))

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_scaling_identity_second_order(self, n):
        errs = []
        for N in (3001, 6001):
            gs = solve_groundstate(n, 1.0, 1.0, Grid(30.0, N, n))
            hat = hat_pair(gs)
            xi, _, eta = scaling_direction(gs)
            V, U = solve_A(assemble_A(0.0, hat), (hat.vhat.values, np.zeros(N)))
            errs.append(max(np.max(np.abs(V - xi)), np.max(np.abs(U - eta))))
        assert 3.5 <= errs[0] / errs[1] <= 4.5

    def test_apply_identity(self, gs111, hat111):
        xi, _, eta = scaling_direction(gs111)
        r1, r2 = apply_A(assemble_A(0.0, hat111), xi, eta)
        dt2 = hat111.grid.dt ** 2
        assert _interior(r1 - gs111.u) < 10 * dt2
        assert np.max(np.abs(r2[1:-1])) < 10 * dt2

    def test_continuity_in_eps(self, hat111):
        A0 = assemble_A(0.0, hat111).matrix
        for eps in (0.1, 0.05):
            diff = abs(assemble_A(eps, hat111).matrix - A0).max()
            assert diff < eps ** 2


class TestSolveA:
    def test_zero_rhs(self, hat111):
        n = hat111.grid.n_points
        V, U = solve_A(assemble_A(0.05, hat111), (np.zeros(n), np.zeros(n)))
        assert not V.any() and not U.any()

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1))
    def test_round_trip(self, hat111, seed):
        rng = np.random.default_rng(seed)
        g = hat111.grid
        t = g.t
        a, b = rng.normal(size=2)
        r1 = a * np.exp(-t ** 2 / 4)
        r2 = b * t * np.exp(-t ** 2 / 4)
        op = assemble_A(0.03, hat111)
        V, U = solve_A(op, (r1, r2))
        assert U[0] == 0.0
        s1, s2 = apply_A(op, V, U)
        assert np.max(np.abs(s1[:-1] - r1[:-1])) < 1e-10
        assert np.max(np.abs(s2[1:-1] - r2[1:-1])) < 1e-10

    def test_shape_mismatch(self, hat111):
        with pytest.raises(GridMismatchError):
            solve_A(assemble_A(0.0, hat111), (np.zeros(5), np.zeros(5)))

    @settings(max_examples=10, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1))
    def test_weighted_symmetry(self, hat311, seed):
        # <A w1, w2> = <w1, A w2> with |t|^{n-1} weights, for smooth parity pairs
        rng = np.random.default_rng(seed)
        g = hat311.grid
        t = g.t
        c = rng.normal(size=4)
        V1, U1 = c[0] * np.exp(-t ** 2), c[1] * t * np.exp(-t ** 2)
        V2, U2 = c[2] * np.exp(-t ** 2 / 2), c[3] * t * np.exp(-t ** 2 / 2)
        op = assemble_A(0.05, hat311)
        a1, a2 = apply_A(op, V1, U1)
        b1, b2 = apply_A(op, V2, U2)
        w = g.dt * t ** 2
        lhs = np.sum(w[1:-1] * (a1 * V2 + a2 * U2)[1:-1])
        rhs = np.sum(w[1:-1] * (V1 * b1 + U1 * b2)[1:-1])
        scale = np.sum(w * (np.abs(a1 * V2) + np.abs(V1 * b1))) + 1e-12
        assert abs(lhs - rhs) < 1e-3 * scale


class TestEll:
    def test_l_minus_kernel_second_order(self):
        r = []
        for N in (3001, 6001):
            gs = solve_groundstate(1, 1.0, 1.0, Grid(30.0, N))
            r.append(_interior(assemble_l_minus(gs) @ gs.u))
        assert r[0] < 1e-3 * 0.01 ** 2 * 1e4  # C dt^2 with C = 0.3
        assert 3.5 <= r[0] / r[1] <= 4.5

    @pytest.mark.parametrize("n", [1, 3])
    def test_l_plus_identity_second_order(self, n):
        r = []
        for N in (3001, 6001):
            gs = solve_groundstate(n, 1.0, 1.0, Grid(30.0, N, n))
            xi, _, _ = scaling_direction(gs)
            r.append(_interior(assemble_l_plus(gs) @ xi + gs.u))
        assert 3.5 <= r[0] / r[1] <= 4.5

    def test_zero(self, gs111):
        assert not (assemble_l_plus(gs111) @ np.zeros(gs111.grid.n_points)).any()


class TestDiagnostics:
    def test_min_singular_value_stable(self):
        vals = []
        for N in (3001, 6001):
            gs = solve_groundstate(1, 1.0, 1.0, Grid(30.0, N))
            vals.append(min_singular_value(assemble_A(0.0, hat_pair(gs))))
        assert vals[0] > 0
        assert abs(vals[0] / vals[1] - 1) < 0.2

    def test_l_plus_positive(self, gs111):
        assert min_singular_value(assemble_l_plus(gs111)) > 0

    def test_homogeneity(self, hat111):
        op = assemble_A(0.0, hat111)
        assert min_singular_value(op.scaled(2.0)) == pytest.approx(2 * min_singular_value(op),
                                                                     rel=1e-6)

    def test_spectral_gap_edges(self, hat111):
        # with V^ = 0 no eigenvalue sits inside (-1/(m+w), m+w) beyond a grid margin
        import scipy.sparse as sp
        from nrdirac.core import EVEN, ODD, GridFunction, HatPair

        g = Grid(30.0, 601)
        tiny = GridFunction(g, np.full(g.n_points, 1e-300), EVEN)
        zero = GridFunction(g, np.zeros(g.n_points), ODD)
        op = assemble_A(0.0, HatPair(tiny, zero, 1.0, 1.0, residual_tol=1.0))
        M = op.matrix.toarray()
        # drop boundary rows/cols so the interior operator is examined
        keep = np.r_[2:2 * g.n_points - 2]
        ev = np.linalg.eigvals(M[np.ix_(keep, keep)]).real
        inside = ev[(ev > -0.5 + 0.05) & (ev < 2.0 - 0.05)]
        assert inside.size == 0

    def test_gamma0(self):
        assert gamma0_estimate(0.0, 1.0) == pytest.approx(1 / 3)
        assert gamma0_estimate(1.0, 1.0) == pytest.approx(1 / 6)
        with pytest.raises(ValueError):
            gamma0_estimate(-1.0, 1.0)

    @settings(max_examples=100)
    @given(norm=st.floats(0, 1e6), k=st.floats(0.1, 5))
    def test_gamma0_bound(self, norm, k):
        assert gamma0_estimate(norm, k) < 1 / (1 + 2 * k) + 1e-15 < 1

    def test_interleave_layout(self):
        assert interleave(np.array([1.0, 2.0]), np.array([3.0, 4.0])).tolist() == [1, 3, 2, 4]
