import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nrdirac.analysis import (CRITICAL, INDETERMINATE, NEGATIVE, POSITIVE, SUBCRITICAL,
                              SUPERCRITICAL, StaleProfileError, TooFewPointsError, charge,
                              cone_boundary_samples, cone_region_check, dQ_deps, dQ_domega,
                              decay_fit, dphi_domega_scaling, energy, error_scaling_fit,
                              fit_slope, inner_product_crosscheck, positivity_report,
                              predicted_error_bounds, q1_q2, sign_label, vk_classify,
                              vk_classify_arrays, vk_regime)
from nrdirac.core import (EVEN, ODD, Branch, BranchPoint, DiracProfile, Grid, GridFunction,
                          Nonlinearity, profile_from_tilde)
from nrdirac.groundstate import hat_pair, solve_groundstate
from nrdirac.solver import solve_profile_fixed_point


@pytest.fixture(scope="module")
def prof111(hat111, cubic):
    return solve_profile_fixed_point(0.05, hat111, cubic)


def _synthetic(V, U, eps=0.1, grid=None):
    grid = grid or Grid(10.0, len(V))
    V = GridFunction(grid, np.asarray(V, float), EVEN)
    U = GridFunction(grid, np.asarray(U, float), ODD)
    z = GridFunction(grid, np.zeros(grid.n_points), EVEN)
    zo = GridFunction(grid, np.zeros(grid.n_points), ODD)
    return DiracProfile(eps, 1.0, V, U, z, zo, k=1.0)


class TestCharge:
    def test_zero_profile(self):
        assert charge(_synthetic(np.zeros(11), np.zeros(11))) == 0.0

    def test_leading_order_1d(self, prof111):
        assert charge(prof111) / (2 * 0.05) == pytest.approx(1.0, abs=0.01)

    def test_two_dim_townes_mass(self):
        hat = hat_pair(solve_groundstate(2, 1.0, 0.5, Grid(30.0, 3001, 2)))
        p = solve_profile_fixed_point(0.01, hat, Nonlinearity(1.0))
        assert charge(p) == pytest.approx(11.70, abs=0.01)

    @settings(max_examples=20, deadline=None)
    @given(a=st.floats(0.1, 10.0))
    def test_quadratic_homogeneity(self, a):
        t = np.linspace(0, 10, 101)
        base = _synthetic(np.exp(-t), t * np.exp(-t))
        big = _synthetic(a * np.exp(-t), a * t * np.exp(-t))
        assert charge(big) == pytest.approx(a * a * charge(base), rel=1e-12)


class TestEnergy:
    def test_below_rest_mass(self, prof111, cubic):
        E = energy(prof111, cubic)
        assert 0 < E < prof111.m * charge(prof111)

    def test_stale_profile_rejected(self, hat111, cubic):
        n = hat111.grid.n_points
        bad = profile_from_tilde(0.05, hat111, 0.1 * np.ones(n), np.zeros(n))
        with pytest.raises(StaleProfileError):
            energy(bad, cubic)


class TestVK:
    @pytest.mark.parametrize("n,k,terms,regime,sign", [
        (1, 1.0, (), SUBCRITICAL, NEGATIVE),
        (1, 2.0, (), CRITICAL, NEGATIVE),
        (1, 3.0, (), SUPERCRITICAL, POSITIVE),
        (3, 0.5, (), SUBCRITICAL, NEGATIVE),
        (3, 1.0, (), SUPERCRITICAL, POSITIVE),
    ])
    def test_regime(self, n, k, terms, regime, sign):
        assert vk_regime(Nonlinearity(k, terms), n) == (regime, sign)

    def test_critical_needs_large_perturbation(self):
        with pytest.raises(ValueError):
            vk_regime(Nonlinearity(2.0, ((1.0, 3.0),)), 1)
        assert vk_regime(Nonlinearity(2.0, ((1.0, 5.0),)), 1)[0] == CRITICAL

    def test_sign_label(self):
        assert sign_label([-1, -2]) == NEGATIVE
        assert sign_label([1, 2]) == POSITIVE
        assert sign_label([-1, 0, 1]) == INDETERMINATE

    def test_branch_signs(self, branch111):
        om, dq = dQ_domega(branch111)
        assert np.all(dq < 0)
        eps, dqe = dQ_deps(branch111)
        assert np.all(dqe > 0)
        v = vk_classify(Nonlinearity(1.0), 1, branch111)
        assert v.agrees and v.measured_sign == NEGATIVE

    def test_constant_charge_has_zero_derivative(self):
        eps = np.geomspace(0.1, 0.01, 6)
        v = vk_classify_arrays(Nonlinearity(1.0), 1, eps, np.full(6, 3.0))
        assert v.measured_sign == INDETERMINATE

    def test_synthetic_critical_slope(self):
        eps = np.geomspace(0.1, 0.01, 8)
        # dQ/deps = 2 c eps for Q = Q0 + c eps^2
        v = vk_classify_arrays(Nonlinearity(2.0), 1, eps, 3.0 + 0.5 * eps ** 2)
        assert v.slope == pytest.approx(1.0, abs=1e-6)
        assert fit_slope(eps, eps ** 2) == pytest.approx(2.0)

    def test_too_few_points(self, hat111, cubic):
        with pytest.raises(TooFewPointsError):
            vk_classify_arrays(cubic, 1, [0.1, 0.05], [1.0, 2.0])
        with pytest.raises(TooFewPointsError):
            vk_classify(cubic, 1, Branch(hat111, cubic))


class TestPositivityAndCones:
    def test_branch_profile_positive(self, prof111):
        rep = positivity_report(prof111)
        assert rep.passed and rep.min_ratio_UV >= 1 and rep.min_scalar_ratio >= 1

    def test_synthetic_failure(self):
        V = np.linspace(1.0, 0.1, 11)
        U = np.r_[0.0, np.full(10, 10.0)]
        rep = positivity_report(_synthetic(V, U, eps=0.1))
        assert not rep.passed and rep.min_ratio_UV < 1

    def test_cone_region(self, hat111, prof111):
        assert cone_region_check(hat111, 5.0)
        assert cone_region_check(prof111, 5.0)
        flipped = _synthetic(prof111.V.values, -prof111.U.values, grid=prof111.grid)
        assert not cone_region_check(flipped, 5.0)
        with pytest.raises(ValueError):
            cone_region_check(hat111, 1.0)

    def test_inflow_is_local(self, hat111, cubic):
        from nrdirac.analysis import boundary_inflow_check

        d = 0.01 * hat111.vhat.values[0]
        assert boundary_inflow_check(0.05, cubic, hat111, d, d / 10)
        assert not boundary_inflow_check(0.05, cubic, hat111, 1.0, 0.1)
        with pytest.raises(ValueError):
            boundary_inflow_check(0.05, cubic, hat111, 0.1, 0.2)

    def test_boundary_pieces_inside_disk(self):
        for label, V, U, normal in cone_boundary_samples(0.5, 0.05, 1.0, 50):
            assert np.all(V * V + U * U <= 0.25 + 1e-15)
            assert normal.shape == (2,)


class TestDecayAndScaling:
    def test_decay_fit(self, hat111):
        fit = decay_fit(hat111)
        assert fit.spread < 1.001
        assert fit.rate_estimate == pytest.approx(-1.0, abs=1e-4)

    def test_error_scaling(self, branch111):
        assert error_scaling_fit(branch111) == pytest.approx(2.0, abs=0.1)

    def test_dphi_scaling_matches_true_exponent(self, branch111):
        # n=1, k=1: -n + 2/k - 4 = -3
        assert dphi_domega_scaling(branch111).slope == pytest.approx(-3.0, abs=0.15)

    def test_q1_q2(self, hat111):
        q1, q2 = q1_q2(hat111)
        assert q1 == pytest.approx(13 / 30, rel=1e-6)
        assert q2 == pytest.approx(0.8025, rel=1e-6)

    def test_inner_product_crosscheck(self, branch111):
        chk = inner_product_crosscheck(branch111)
        assert np.all(chk.rel_deviation[-3:] < 0.05)


class TestErrorBounds:
    def test_value(self):
        b = predicted_error_bounds(Nonlinearity(1.0), 1.25, 0.25)
        assert b.h == pytest.approx(0.0625) and b.two_kappa == 2.0

    @settings(max_examples=50)
    @given(e1=st.floats(0.001, 0.5), e2=st.floats(0.001, 0.5),
           k=st.floats(0.3, 3.0))
    def test_monotone(self, e1, e2, k):
        lo, hi = sorted((e1, e2))
        nl = Nonlinearity(k, ((0.5, k + 1.0),))
        assert predicted_error_bounds(nl, 1.0, lo).h <= predicted_error_bounds(nl, 1.0, hi).h

    def test_range(self):
        with pytest.raises(ValueError):
            predicted_error_bounds(Nonlinearity(1.0), 1.0, 1.0)


def test_charge_points_match_profiles(branch111):
    for pt, p in zip(branch111.points, branch111.profiles):
        assert isinstance(pt, BranchPoint)
        assert pt.charge == pytest.approx(charge(p), rel=1e-13)
