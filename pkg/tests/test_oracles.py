import numpy as np
import pytest
from scipy.stats import norm

from evsikit.casestudies import (
    case1_collection_spec,
    case1_nested_mc_evaluator,
    generate_case1_pa,
)
from evsikit.errors import DomainError, ShapeError, UnsupportedFamilyError
from evsikit.fisher import target_conditional_variance
from evsikit.oracles import (
    PosteriorMoments,
    analytic_conditional_inb,
    analytic_evsi_curve,
    closed_form_linear_gaussian_evsi,
    conjugate_posterior_moments,
    nested_mc_evsi,
)
from evsikit.padata import DataCollectionSpec


class TestConjugatePosterior:
    def test_beta_bernoulli(self):
        post = conjugate_posterior_moments("bernoulli", 10, 3, alpha=2.0, beta=8.0)
        assert post.mean == pytest.approx(0.25)
        assert post.variance == pytest.approx(75 / 8400)

    def test_gamma_poisson(self):
        post = conjugate_posterior_moments("poisson", 10, 12, alpha=10.0, beta=10.0)
        assert post.mean == pytest.approx(1.1)
        assert post.variance == pytest.approx(0.055)

    def test_gaussian(self):
        post = conjugate_posterior_moments("gaussian", 10, 1.0, mu0=0.0, sigma2=1.0, n0=5.0)
        assert post.mean == pytest.approx(2 / 3)
        assert post.variance == pytest.approx(1 / 15)

    def test_gaussian_variance_is_data_free_and_matches_target(self):
        for n, n0, sigma2 in ((3, 2.5, 0.7), (40, 10.0, 2.0)):
            post = conjugate_posterior_moments(
                "gaussian", n, 123.0, mu0=0.0, sigma2=sigma2, n0=n0
            )
            assert post.variance == target_conditional_variance(n, n0, sigma2)

    def test_vectorized_over_stats(self):
        post = conjugate_posterior_moments("poisson", 5, np.array([0, 5, 10]), alpha=2.0, beta=1.0)
        assert post.mean.shape == (3,)
        assert post.mean[0] == pytest.approx(2 / 6)

    def test_missing_hyperparams(self):
        with pytest.raises(DomainError):
            conjugate_posterior_moments("bernoulli", 10, 3)


class TestAnalyticConditionalInb:
    def test_scenario2_example(self):
        m = PosteriorMoments(mean=0.0, variance=1 / 15, family="gaussian")
        assert analytic_conditional_inb(2, m) == pytest.approx(-1000 + 5000 / 15)

    def test_scenario3_prior_moments(self):
        m = PosteriorMoments(mean=0.0, variance=0.2, family="gaussian")
        assert analytic_conditional_inb(3, m) == pytest.approx(100.0)

    def test_scenario1_arithmetic(self):
        m = PosteriorMoments(mean=0.02, variance=0.1, family="gaussian")
        assert analytic_conditional_inb(1, m) == pytest.approx(0.0)

    def test_scenario4_needs_two_moments(self):
        m = PosteriorMoments(mean=0.0, variance=0.1, family="gaussian")
        with pytest.raises(ShapeError):
            analytic_conditional_inb(4, m)

    @pytest.mark.parametrize("mean,var", [(0.3, 0.05), (-0.8, 0.2), (0.0, 1.0)])
    def test_moment_identities_against_monte_carlo(self, mean, var):
        # The formulas rest on E[x^2] = m^2 + s^2 and E[x^4] = m^4 + 6m^2s^2
        # + 3s^4; check them against brute-force sampling.
        rng = np.random.default_rng(17)
        x = rng.normal(mean, np.sqrt(var), 2_000_000)
        m2, m4 = np.mean(x**2), np.mean(x**4)
        assert mean**2 + var == pytest.approx(m2, rel=0.01)
        assert mean**4 + 6 * mean**2 * var + 3 * var**2 == pytest.approx(m4, rel=0.02)

    def test_scenario4_formula(self):
        m1 = PosteriorMoments(mean=0.5, variance=0.1, family="gaussian")
        m2 = PosteriorMoments(mean=-0.2, variance=0.05, family="gaussian")
        got = analytic_conditional_inb(4, [m1, m2])
        expected = (
            -1500
            + 5000 * (0.25 + 0.1)
            + 5000 * (0.2**4 + 6 * 0.04 * 0.05 + 3 * 0.0025)
        )
        assert got == pytest.approx(expected)


class TestClosedFormLinearGaussian:
    def test_zero_slope(self):
        assert closed_form_linear_gaussian_evsi(5.0, 0.0, 0.0, 1.0, 5.0, 100) == 0.0

    def test_zero_study(self):
        assert closed_form_linear_gaussian_evsi(-100.0, 5000.0, 0.0, 1.0, 5.0, 0) == 0.0

    def test_large_n_is_evppi(self):
        value = closed_form_linear_gaussian_evsi(-100.0, 5000.0, 0.0, 1.0, 5.0, 10**9)
        m, s = -100.0, 5000.0 * np.sqrt(0.2)
        assert value == pytest.approx(s * norm.pdf(m / s) + m * norm.cdf(m / s), rel=1e-4)
        assert value == pytest.approx(842.9, abs=0.5)

    def test_monte_carlo_cross_check(self):
        # direct simulation of the preposterior mean benefit
        n, n0, sigma2, a, b = 80, 5.0, 1.0, -100.0, 5000.0
        rng = np.random.default_rng(18)
        v = n / (n0 + n)
        m_draws = rng.normal(0.0, np.sqrt(v * sigma2 / n0), 2_000_000)
        z = a + b * m_draws
        mc = np.maximum(z, 0).mean() - max(z.mean(), 0.0)
        got = closed_form_linear_gaussian_evsi(a, b, 0.0, sigma2, n0, n)
        assert got == pytest.approx(mc, rel=0.005)

    def test_monotone_in_n(self):
        values = [
            closed_form_linear_gaussian_evsi(-100.0, 5000.0, 0.0, 1.0, 5.0, n)
            for n in range(0, 300, 10)
        ]
        assert all(b >= a for a, b in zip(values, values[1:]))


class TestAnalyticCurve:
    def test_gaussian_only(self):
        pa = generate_case1_pa(1, 1000, seed=1)
        spec = DataCollectionSpec((0,), "poisson", 1.0, 1.0, 10.0)
        with pytest.raises(UnsupportedFamilyError):
            analytic_evsi_curve(pa, spec, 1, [10], seed=1)

    def test_scenario1_matches_closed_form(self):
        pa = generate_case1_pa(1, 50_000, seed=19)
        spec = case1_collection_spec(1)
        curve = analytic_evsi_curve(pa, spec, 1, [20, 100], seed=2)
        for _, n, e, s in curve.rows():
            oracle = closed_form_linear_gaussian_evsi(-100.0, 5000.0, 0.0, 1.0, 5.0, n)
            assert e == pytest.approx(oracle, abs=max(3.5 * s, 0.01 * oracle))

    def test_zero_study_size_exact_zero(self):
        pa = generate_case1_pa(2, 5000, seed=20)
        spec = case1_collection_spec(2)
        curve = analytic_evsi_curve(pa, spec, 2, [0, 10], seed=3)
        assert curve.evsi[0] == 0.0

    def test_prior_point_matches_direct_average(self):
        # with no data the conditional benefit is the prior-moment value;
        # it must agree with the raw prior mean of the benefit samples
        for sc in (1, 2, 3, 4):
            pa = generate_case1_pa(sc, 200_000, seed=30 + sc)
            spec = case1_collection_spec(sc)
            moments = [
                PosteriorMoments(mean=spec.mu0[j], variance=spec.sigma2[j] / spec.n0[j], family="gaussian")
                for j in range(spec.n_focal)
            ]
            formula = analytic_conditional_inb(sc, moments)
            inb = pa.nb[:, 0] - pa.nb[:, 1]
            se = np.std(inb, ddof=1) / np.sqrt(pa.n_rows)
            assert formula == pytest.approx(np.mean(inb), abs=3.5 * se)


class TestNestedMonteCarlo:
    def test_matches_closed_form_scenario1(self):
        spec = case1_collection_spec(1)
        evaluator = case1_nested_mc_evaluator(1)
        e, s = nested_mc_evsi(evaluator, spec, 100, outer=4000, inner=400, seed=55)
        oracle = closed_form_linear_gaussian_evsi(-100.0, 5000.0, 0.0, 1.0, 5.0, 100)
        assert e == pytest.approx(oracle, abs=max(3.5 * s, 0.05 * oracle))

    def test_zero_study_size_near_zero(self):
        # inner must be large enough that the inner-averaging bias of the
        # mean-of-max term (positive, O(sd/sqrt(inner)) at the margin) dies;
        # at inner=5000 the prior-mean benefit sits ~3 inner-sd below zero
        spec = case1_collection_spec(1)
        evaluator = case1_nested_mc_evaluator(1)
        e, s = nested_mc_evsi(evaluator, spec, 0, outer=400, inner=5000, seed=56)
        assert abs(e) <= 3.5 * s + 1.0

    def test_deterministic(self):
        spec = case1_collection_spec(2)
        evaluator = case1_nested_mc_evaluator(2)
        a = nested_mc_evsi(evaluator, spec, 30, outer=200, inner=50, seed=57)
        b = nested_mc_evsi(evaluator, spec, 30, outer=200, inner=50, seed=57)
        assert a == b

    def test_huge_study_single_inner_draw_approaches_evppi(self):
        # with an enormous study the posterior collapses onto theta, so even
        # one inner draw per dataset reproduces the perfect-information value
        import evsikit as ek
        from evsikit.casestudies import generate_case1_pa

        spec = case1_collection_spec(2)
        evaluator = case1_nested_mc_evaluator(2)
        e, s = nested_mc_evsi(evaluator, spec, 10**9, outer=20_000, inner=1, seed=58)
        bound, bse = ek.evppi(generate_case1_pa(2, 200_000, seed=59), [0])
        assert e == pytest.approx(bound, abs=3.5 * np.hypot(s, bse) + 0.01 * bound)

    def test_rejects_custom_family(self):
        spec = DataCollectionSpec((0,), "custom", 0.0, 1.0, 5.0)
        with pytest.raises(UnsupportedFamilyError):
            nested_mc_evsi(lambda phi, rng: np.zeros((phi.shape[0], 2)), spec, 10, 10, 5, 1)

    def test_evaluator_shape_check(self):
        spec = case1_collection_spec(1)
        with pytest.raises(ShapeError):
            nested_mc_evsi(lambda phi, rng: np.zeros(3), spec, 10, outer=5, inner=3, seed=1)
