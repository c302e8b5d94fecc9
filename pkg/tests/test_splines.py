import numpy as np
import pytest
from scipy.interpolate import splev

from evsikit.errors import DegeneratePredictorError, SingularFitError, UnderdeterminedFitError
from evsikit.splines import (
    BasisConfig,
    basis_matrix,
    build_knots,
    curvature_penalty_matrix,
    fit_additive_spline,
)


def splev_basis(x, knots, degree, deriv=0):
    """Independent basis oracle: one unit-coefficient spline per function."""
    n = len(knots) - degree - 1
    out = np.zeros((len(x), n))
    coef = np.zeros(n)
    for j in range(n):
        coef[j] = 1.0
        out[:, j] = splev(x, (knots, coef.copy(), degree), der=deriv)
        coef[j] = 0.0
    return out


class TestKnots:
    def test_quantile_rule_uniform_data(self):
        x = np.linspace(0.0, 1.0, 3001)
        knots = build_knots(x, BasisConfig(interior_knots=2, knot_rule="quantile"))
        interior = knots[4:-4]
        assert np.allclose(interior, [1 / 3, 2 / 3], atol=1e-3)
        assert np.all(knots[:4] == 0.0) and np.all(knots[-4:] == 1.0)

    def test_uniform_rule(self):
        rng = np.random.default_rng(0)
        x = rng.beta(0.3, 3.0, 500)  # heavily skewed; uniform knots differ from quantiles
        knots = build_knots(x, BasisConfig(interior_knots=3, knot_rule="uniform"))
        lo, hi = x.min(), x.max()
        assert np.allclose(knots[4:-4], lo + (hi - lo) * np.array([0.25, 0.5, 0.75]))

    def test_constant_predictor(self):
        with pytest.raises(DegeneratePredictorError):
            build_knots(np.ones(100), BasisConfig())

    def test_too_few_rows(self):
        with pytest.raises(UnderdeterminedFitError):
            build_knots(np.arange(10.0), BasisConfig(interior_knots=10))

    def test_no_interior_knots_dimension(self):
        x = np.linspace(0, 1, 50)
        knots = build_knots(x, BasisConfig(interior_knots=0))
        assert basis_matrix(x, knots, 3).shape == (50, 4)  # full cubic span

    def test_discrete_predictor_degrades(self):
        x = np.repeat([0.0, 1.0], 50)
        knots = build_knots(x, BasisConfig(interior_knots=10, knot_rule="quantile"))
        assert len(knots) == 8  # all interior candidates collapse onto the boundary


class TestBasis:
    def test_partition_of_unity(self):
        rng = np.random.default_rng(1)
        x = rng.uniform(-2, 5, 500)
        knots = build_knots(x, BasisConfig(interior_knots=7))
        b = basis_matrix(x, knots, 3)
        assert np.allclose(b.sum(axis=1), 1.0, atol=1e-12)

    @pytest.mark.parametrize("degree", [2, 3, 4])
    @pytest.mark.parametrize("deriv", [1, 2])
    def test_derivatives_match_splev(self, degree, deriv):
        rng = np.random.default_rng(2)
        x = np.r_[0.0, rng.uniform(0, 1, 300), 1.0]
        knots = build_knots(x, BasisConfig(degree=degree, interior_knots=4))
        ours = basis_matrix(x, knots, degree, deriv)
        ref = splev_basis(x, knots, degree, deriv)
        assert np.allclose(ours, ref, atol=1e-10)

    def test_penalty_matrix_against_quadrature(self):
        # Brute-force Riemann integral of b'' b''^T as the oracle.
        x = np.linspace(0, 2, 200)
        knots = build_knots(x, BasisConfig(interior_knots=3))
        grid = np.linspace(0, 2, 200_001)
        b2 = basis_matrix(grid, knots, 3, deriv=2)
        riemann = 2.0**3 * (b2.T @ b2) * (grid[1] - grid[0])
        exact = curvature_penalty_matrix(knots, 3, 0.0, 2.0)
        assert np.allclose(exact, riemann, rtol=1e-4)


class TestFit:
    def test_linear_reproduction(self):
        x = np.linspace(0, 1, 200)
        model = fit_additive_spline(x, 2.0 * x)
        assert model.mean(np.array([0.5])) == pytest.approx(1.0, abs=1e-8)
        assert model.mean(np.array([0.25])) == pytest.approx(0.5, abs=1e-8)

    def test_cubic_in_span(self):
        rng = np.random.default_rng(3)
        x = rng.uniform(-1, 1, 400)
        model = fit_additive_spline(x, x**3, BasisConfig(ridge=0.0))
        resid = model.mean(x) - x**3
        assert np.max(np.abs(resid)) < 1e-8

    @pytest.mark.parametrize("power", [0, 1, 2, 3])
    def test_polynomial_reproduction(self, power):
        rng = np.random.default_rng(4)
        x = rng.uniform(0.5, 3.5, 300)
        y = (x - 2.0) ** power
        model = fit_additive_spline(x, y, BasisConfig(ridge=0.0))
        scale = max(np.max(np.abs(y)), 1.0)
        assert np.max(np.abs(model.mean(x) - y)) < 1e-8 * scale

    def test_constant_response(self):
        x = np.linspace(0, 1, 100)
        model = fit_additive_spline(x, np.full(100, 7.25))
        assert model.mean(np.array([0.3])) == pytest.approx(7.25, abs=1e-9)

    def test_second_partials_of_square(self):
        rng = np.random.default_rng(5)
        x = rng.uniform(-2, 2, 500)
        model = fit_additive_spline(x, x**2, BasisConfig(ridge=0.0))
        pts = np.linspace(-1.8, 1.8, 50)
        assert np.allclose(model.second_partials(pts[:, None])[:, 0], 2.0, atol=1e-6)

    def test_linear_has_no_curvature(self):
        x = np.linspace(0, 1, 100)
        model = fit_additive_spline(x, 2.0 * x)
        assert np.all(np.abs(model.second_partials(np.array([[0.5]]))) < 1e-6)

    def test_determinism(self):
        rng = np.random.default_rng(6)
        x = rng.uniform(0, 1, 300)
        y = np.sin(x * 5) + rng.normal(0, 0.3, 300)
        a = fit_additive_spline(x, y)
        b = fit_additive_spline(x, y)
        assert np.array_equal(a.coef, b.coef)

    def test_multi_response_matches_columns(self):
        rng = np.random.default_rng(7)
        x = rng.uniform(0, 1, 300)
        y = np.column_stack([x**2, np.cos(3 * x)])
        joint = fit_additive_spline(x, y)
        for d in range(2):
            single = fit_additive_spline(x, y[:, d])
            assert np.allclose(joint[d].coef, single.coef, atol=1e-12)

    def test_two_level_predictor_finite(self):
        rng = np.random.default_rng(8)
        x = rng.integers(0, 2, 200).astype(float)
        y = 3.0 * x + rng.normal(0, 0.1, 200)
        model = fit_additive_spline(x, y)
        assert np.all(np.isfinite(model.mean(np.array([[0.0], [0.5], [1.0]]))))

    def test_singular_without_ridge(self):
        x = np.repeat([0.0, 1.0], 100)
        with pytest.raises(SingularFitError):
            fit_additive_spline(x, x, BasisConfig(ridge=0.0, curvature_smoothing=0.0))

    def test_additive_two_predictors(self):
        rng = np.random.default_rng(9)
        x = rng.uniform(-1, 1, (800, 2))
        y = x[:, 0] ** 2 + 3.0 * x[:, 1]
        model = fit_additive_spline(x, y, BasisConfig(ridge=0.0))
        pt = np.array([0.2, -0.4])
        assert model.mean(pt) == pytest.approx(0.2**2 - 1.2, abs=1e-7)
        curv = model.second_partials(pt)
        assert curv[0] == pytest.approx(2.0, abs=1e-5)
        assert curv[1] == pytest.approx(0.0, abs=1e-5)

    def test_coefficient_count_invariant(self):
        rng = np.random.default_rng(10)
        x = rng.uniform(0, 1, (500, 2))
        cfg = BasisConfig(interior_knots=6)
        model = fit_additive_spline(x, x.sum(axis=1), cfg)
        assert model.coef.size == 1 + 2 * (6 + 3)


class TestExtrapolation:
    def setup_method(self):
        x = np.linspace(0.0, 1.0, 200)
        self.model = fit_additive_spline(x, x**2, BasisConfig(ridge=0.0))

    def test_linear_extension_value(self):
        hi_val = self.model.mean(np.array([1.0]))
        inside = self.model.mean(np.array([1.0 - 1e-6]))
        slope = (hi_val - inside) / 1e-6
        extrapolated = self.model.mean(np.array([1.3]))
        assert extrapolated == pytest.approx(hi_val + 0.3 * slope, rel=1e-4)

    def test_zero_curvature_outside(self):
        assert self.model.second_partials(np.array([[1.5]]))[0, 0] == 0.0
        assert self.model.second_partials(np.array([[-0.5]]))[0, 0] == 0.0

    def test_continuous_at_boundary(self):
        just_in = self.model.mean(np.array([1.0 - 1e-12]))
        just_out = self.model.mean(np.array([1.0 + 1e-12]))
        assert just_in == pytest.approx(just_out, abs=1e-9)


def interior_points(rng, model, count, h):
    """Random interior points at least 2h from any knot: the spline's third
    derivative jumps at knots, so central differences are only second-order
    accurate away from them."""
    lo, hi = model.ranges[0]
    knots = np.unique(model.knots[0])
    pts = []
    while len(pts) < count:
        p = rng.uniform(lo + 10 * h, hi - 10 * h)
        if np.min(np.abs(knots - p)) > 2 * h:
            pts.append(p)
    return np.array(pts)


class TestDerivativeConsistency:
    @pytest.mark.parametrize("fn", [lambda x: x**2, lambda x: x**3, lambda x: np.sin(3 * x)])
    def test_matches_finite_differences(self, fn):
        rng = np.random.default_rng(12)
        x = rng.uniform(0.0, 2.0, 2000)
        model = fit_additive_spline(x, fn(x), BasisConfig(ridge=0.0))
        h = 1e-4 * 2.0
        pts = interior_points(rng, model, 100, h)
        fd = (model.mean((pts + h)[:, None]) - 2 * model.mean(pts[:, None]) + model.mean((pts - h)[:, None])) / h**2
        exact = model.second_partials(pts[:, None])[:, 0]
        scale = np.max(np.abs(exact))
        assert np.max(np.abs(fd - exact)) < 1e-5 * max(scale, 1.0)


class TestCurvatureSmoothing:
    def test_noise_free_fits_untouched(self):
        rng = np.random.default_rng(13)
        x = rng.uniform(-1, 1, 500)
        y = x**2
        plain = fit_additive_spline(x, y, BasisConfig(curvature_smoothing=0.0))
        smoothed = fit_additive_spline(x, y, BasisConfig(curvature_smoothing=3e-4))
        assert np.array_equal(plain.coef, smoothed.coef)

    def test_damps_noise_driven_curvature(self):
        rng = np.random.default_rng(14)
        x = rng.uniform(-1, 1, 2000)
        y = x + rng.normal(0, 5.0, x.size)  # linear signal, heavy noise
        plain = fit_additive_spline(x, y, BasisConfig(curvature_smoothing=0.0))
        smoothed = fit_additive_spline(x, y)
        pts = np.linspace(-0.9, 0.9, 50)[:, None]
        assert np.max(np.abs(smoothed.second_partials(pts))) < np.max(
            np.abs(plain.second_partials(pts))
        )

    def test_keeps_real_curvature(self):
        rng = np.random.default_rng(15)
        x = rng.uniform(-1, 1, 5000)
        y = 10.0 * x**2 + rng.normal(0, 1.0, x.size)
        model = fit_additive_spline(x, y)
        curv = model.second_partials(np.zeros((1, 1)))[0, 0]
        assert curv == pytest.approx(20.0, rel=0.2)
