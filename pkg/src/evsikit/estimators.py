"""EVSI estimators.

All estimators share one structure: build row-aligned samples of the
conditional expected benefit of every decision given a hypothetical study,
then combine them as

    mean over rows of the best decision  -  best decision of the row means.

The estimators differ only in how the conditional benefit samples are
produced:

- ``tga``   rescaled prior samples pushed through fitted splines, plus a
            second-order curvature correction using Fisher-information
            conditional variances;
- ``ga``    the same without the curvature correction;
- ``npreg`` regression of the benefit samples on simulated study means.
"""

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import families
from .errors import DomainError, ShapeError, UnsupportedFamilyError, ValidationError
from .fisher import (
    adjust_conditional_variances,
    expected_fisher,
    numeric_expected_fisher,
    preposterior_mean_spread,
    target_conditional_variance,
)
from .gaussian import rescale_prior_samples, variance_fraction
from .splines import BasisConfig, fit_additive_spline

TARGET_RULES = ("posterior", "mean-spread")


@dataclass(frozen=True)
class EstimatorOptions:
    """Knobs shared by the curve estimators.

    ``variance_adjustment`` toggles the rescaling of inverse-information
    variances to the law-of-total-variance target (on by default; turning it
    off uses the raw asymptotic variances). ``variance_target`` selects that
    target: ``posterior`` is the mean conditional variance
    ``sigma2 / (n0 + n)``; ``mean-spread`` is the variance of the conditional
    mean ``v * sigma2 / n0``, kept for sensitivity analysis.
    """

    basis: BasisConfig = field(default_factory=BasisConfig)
    variance_adjustment: bool = True
    variance_target: str = "posterior"
    numeric_fisher_draws: int = 10_000
    numeric_fisher_seed: int = 0

    def __post_init__(self):
        if self.variance_target not in TARGET_RULES:
            raise ValidationError(
                f"variance_target must be one of {TARGET_RULES}, got {self.variance_target!r}"
            )


@dataclass(frozen=True)
class ConditionalBenefitSamples:
    """Estimated conditional expected benefit per simulation row and decision."""

    values: np.ndarray
    method: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ShapeError("conditional benefits must be a (rows, decisions) matrix")
        if not np.all(np.isfinite(values)):
            raise DomainError("conditional benefits must be finite")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class EvsiCurve:
    """EVSI estimates over a grid of study sizes for one method."""

    method: str
    ns: tuple
    evsi: tuple
    mc_se: tuple
    digest: str = ""

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.ns, self.ns[1:])):
            raise ValidationError(f"study sizes must be strictly increasing, got {self.ns}")
        if any(e < 0 for e in self.evsi):
            raise ValidationError("EVSI estimates cannot be negative")

    def rows(self):
        for n, e, s in zip(self.ns, self.evsi, self.mc_se):
            yield self.method, n, e, s


def _spec_digest(method, pa, spec, options):
    parts = (
        method,
        spec.family,
        spec.focal_indices,
        spec.mu0,
        spec.sigma2,
        spec.n0,
        spec.binomial_size,
        pa.n_rows,
        pa.n_decisions,
        options.basis,
        options.variance_adjustment,
        options.variance_target,
    )
    return hashlib.sha1(repr(parts).encode()).hexdigest()[:12]


def _checked_grid(grid):
    ns = [int(n) for n in grid]
    if not ns:
        raise ValidationError("study-size grid is empty")
    if len(set(ns)) != len(ns):
        raise ValidationError(f"study-size grid has duplicates: {sorted(ns)}")
    if any(n < 0 for n in ns):
        raise DomainError(f"study sizes must be nonnegative, got {sorted(ns)}")
    return sorted(ns)


def fit_decision_models(pa, focal_indices, config=None):
    """One fitted spline of net benefit on the focal parameters per decision."""
    x = pa.theta[:, list(focal_indices)]
    return fit_additive_spline(x, pa.nb, config or BasisConfig())


def conditional_nb_ga(models, mu_x):
    """Plug the preposterior-mean samples straight into the fitted splines."""
    mu = _mu_array(models, mu_x)
    values = np.column_stack([m.mean(mu) for m in models])
    return ConditionalBenefitSamples(values=values, method="ga")


def conditional_nb_tga(models, mu_x, variances):
    """Spline values plus half the conditional variance times the fitted
    curvature, summed over focal parameters (cross terms vanish: the splines
    are additive and the focal parameters independent)."""
    mu = _mu_array(models, mu_x)
    var_cols = [np.asarray(getattr(v, "adjusted", v), dtype=float) for v in variances]
    if len(var_cols) != mu.shape[1]:
        raise ShapeError(f"{len(var_cols)} variance vectors for {mu.shape[1]} focal parameters")
    for col in var_cols:
        if col.shape != (mu.shape[0],):
            raise ShapeError("variance vectors must be row-aligned with the rescaled samples")
    columns = []
    for m in models:
        curv = m.second_partials(mu)
        correction = 0.5 * sum(var_cols[j] * curv[:, j] for j in range(mu.shape[1]))
        columns.append(m.mean(mu) + correction)
    return ConditionalBenefitSamples(values=np.column_stack(columns), method="tga")


def _mu_array(models, mu_x):
    mu = np.asarray(getattr(mu_x, "mu_x", mu_x), dtype=float)
    if mu.ndim == 1:
        mu = mu[:, None]
    if not models:
        raise ShapeError("need at least one decision model")
    if mu.shape[1] != models[0].n_predictors:
        raise ShapeError(
            f"{mu.shape[1]} focal columns but models have {models[0].n_predictors} predictors"
        )
    return mu


def evsi_from_conditional(cond):
    """Combine conditional-benefit samples into (EVSI, Monte Carlo s.e.).

    The standard error covers the first (mean-of-max) term only; the second
    term is an order of magnitude more stable. The result is nonnegative by
    construction.
    """
    values = cond.values if isinstance(cond, ConditionalBenefitSamples) else np.asarray(cond)
    rows, n_dec = values.shape
    if rows < 2 or n_dec < 2:
        raise ShapeError(f"need at least 2 rows and 2 decisions, got {values.shape}")
    row_max = values.max(axis=1)
    # Both terms use the same contiguous 1-D reduction: summation is then
    # monotone in the elementwise row_max >= column ordering, which makes the
    # nonnegativity of the difference exact, not just approximate.
    col_means = [float(np.mean(np.ascontiguousarray(values[:, d]))) for d in range(n_dec)]
    evsi = float(np.mean(row_max)) - max(col_means)
    se = float(np.std(row_max, ddof=1) / np.sqrt(rows))
    return evsi, se


def evsi_from_conditional_inb(cond_inb):
    """Two-decision shortcut on incremental conditional benefits."""
    inb = np.asarray(cond_inb, dtype=float).ravel()
    if inb.size < 2:
        raise ShapeError("need at least 2 rows")
    gains = np.maximum(inb, 0.0)
    evsi = float(np.mean(gains) - max(np.mean(inb), 0.0))
    se = float(np.std(gains, ddof=1) / np.sqrt(inb.size))
    return evsi, se


def _custom_unit_information(spec, mu, options):
    """Numeric per-observation information for the custom family: one sweep
    over the sample range, then interpolation (the rescaled samples stay
    inside the prior range, so a modest grid is plenty)."""
    if spec.log_density is None or spec.sampler is None:
        raise UnsupportedFamilyError(
            "custom family needs log_density and sampler to evaluate information"
        )
    grid = np.linspace(float(np.min(mu)), float(np.max(mu)), 65)
    info = np.array(
        [
            numeric_expected_fisher(
                spec.log_density,
                spec.sampler,
                g,
                1,
                options.numeric_fisher_draws,
                options.numeric_fisher_seed,
            )
            for g in grid
        ]
    )
    return np.interp(mu, grid, info)


def _conditional_variance_columns(spec, mu_cols, n, options):
    """Adjusted conditional-variance vector per focal parameter for study size ``n``."""
    n_eff = families.effective_count(spec.family, n, spec.binomial_size)
    cols = []
    for j, mu in enumerate(mu_cols):
        target_fn = (
            target_conditional_variance
            if options.variance_target == "posterior"
            else preposterior_mean_spread
        )
        target = target_fn(n_eff, spec.n0[j], spec.sigma2[j])
        if n_eff == 0:
            # No data: every row sits at the prior mean with prior variance.
            cols.append(np.full(mu.shape[0], target))
            continue
        if spec.family == families.CUSTOM:
            info = n * _custom_unit_information(spec, mu, options)
        else:
            info = expected_fisher(
                spec.family, mu, n, sigma2=spec.sigma2[j], size=spec.binomial_size
            )
        if options.variance_adjustment:
            cols.append(adjust_conditional_variances(1.0 / info, target).adjusted)
        else:
            cols.append(1.0 / info)
    return cols


def _rescaled_columns(spec, phi, n):
    n_eff = families.effective_count(spec.family, n, spec.binomial_size)
    cols = []
    for j in range(spec.n_focal):
        frac = variance_fraction(n_eff, spec.n0[j])
        cols.append(rescale_prior_samples(phi[:, j], spec.mu0[j], frac))
    return cols


def _ga_family_curve(pa, spec, grid, options, correct):
    ns = _checked_grid(grid)
    phi = spec.focal_columns(pa)
    models = fit_decision_models(pa, spec.focal_indices, options.basis)
    evs, ses = [], []
    for n in ns:
        mu_cols = _rescaled_columns(spec, phi, n)
        mu_x = np.column_stack(mu_cols)
        if correct:
            var_cols = _conditional_variance_columns(spec, mu_cols, n, options)
            cond = conditional_nb_tga(models, mu_x, var_cols)
        else:
            cond = conditional_nb_ga(models, mu_x)
        e, s = evsi_from_conditional(cond)
        evs.append(e)
        ses.append(s)
    method = "tga" if correct else "ga"
    return EvsiCurve(
        method=method,
        ns=tuple(ns),
        evsi=tuple(evs),
        mc_se=tuple(ses),
        digest=_spec_digest(method, pa, spec, options),
    )


def evsi_curve_tga(pa, spec, grid, options=None):
    """Taylor-corrected Gaussian-approximation EVSI over a study-size grid.

    The splines are fitted once; every grid point reuses the same PA samples
    through the rescaling, so the whole curve costs little more than a
    single evaluation.
    """
    return _ga_family_curve(pa, spec, grid, options or EstimatorOptions(), correct=True)


def evsi_curve_ga(pa, spec, grid, options=None):
    """Uncorrected (plug-in) Gaussian-approximation EVSI over a grid."""
    return _ga_family_curve(pa, spec, grid, options or EstimatorOptions(), correct=False)


def simulation_rng(seed, n):
    """Stream used for simulating study outcomes at one grid point.

    Methods that simulate study means derive their generator the same way,
    so estimates at the same (seed, n) share the simulated studies and are
    comparable without extra Monte Carlo noise.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(n)]))


def evsi_nonparametric(pa, spec, n, seed, options=None):
    """Regression-on-summary-statistic estimate at a single study size.

    Simulates one study mean per PA row from the likelihood at that row's
    focal values, regresses each decision's benefit samples on the means,
    and combines the fitted values. Deterministic given ``seed``.
    """
    options = options or EstimatorOptions()
    if n == 0:
        return 0.0, 0.0
    phi = spec.focal_columns(pa)
    rng = simulation_rng(seed, n)
    xbar = _simulate_study_means(rng, spec, phi, n)
    models = fit_additive_spline(xbar, pa.nb, options.basis)
    cond = ConditionalBenefitSamples(
        values=np.column_stack([m.mean(xbar) for m in models]), method="npreg"
    )
    return evsi_from_conditional(cond)


def _simulate_study_means(rng, spec, phi, n):
    cols = []
    for j in range(spec.n_focal):
        sigma2 = spec.sigma2[j] if spec.family == families.GAUSSIAN else None
        cols.append(
            families.draw_sample_means(
                rng, spec.family, phi[:, j], n, sigma2=sigma2, size=spec.binomial_size
            )
        )
    return np.column_stack(cols)


def evsi_curve_npreg(pa, spec, grid, seed, options=None):
    """Nonparametric-regression EVSI over a grid (one regression per point)."""
    options = options or EstimatorOptions()
    ns = _checked_grid(grid)
    evs, ses = [], []
    for n in ns:
        e, s = evsi_nonparametric(pa, spec, n, seed, options)
        evs.append(e)
        ses.append(s)
    return EvsiCurve(
        method="npreg",
        ns=tuple(ns),
        evsi=tuple(evs),
        mc_se=tuple(ses),
        digest=_spec_digest("npreg", pa, spec, options),
    )


def evppi(pa, focal_indices, options=None):
    """Value of removing all uncertainty in the focal parameters.

    Upper bound for EVSI at any study size: regress benefits on the focal
    columns and combine the in-sample fitted values.
    """
    options = options or EstimatorOptions()
    models = fit_decision_models(pa, focal_indices, options.basis)
    x = pa.theta[:, list(focal_indices)]
    values = np.column_stack([m.mean(x) for m in models])
    return evsi_from_conditional(ConditionalBenefitSamples(values=values, method="evppi"))
