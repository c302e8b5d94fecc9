"""Likelihood-family helpers shared by the Fisher, estimator, and oracle layers.

A family is identified by a lowercase tag. ``binomial`` takes a per-subject
trial count ``size`` (each observation is the number of events out of
``size`` trials); all other families ignore it.
"""

import numpy as np

from .errors import DomainError, UnsupportedFamilyError

GAUSSIAN = "gaussian"
BERNOULLI = "bernoulli"
POISSON = "poisson"
BINOMIAL = "binomial"
EXPONENTIAL = "exponential"
CUSTOM = "custom"

FAMILIES = (GAUSSIAN, BERNOULLI, POISSON, BINOMIAL, EXPONENTIAL, CUSTOM)

# Conjugate families: posterior moments and samplers are available in closed
# form, so the nested Monte Carlo and analytic comparators can run without
# any general-purpose posterior machinery.
CONJUGATE_FAMILIES = (GAUSSIAN, BERNOULLI, POISSON, BINOMIAL, EXPONENTIAL)

# Probability parameters are kept away from {0, 1} and positive rates away
# from 0: rescaled samples of a Beta/Gamma prior can graze the boundary where
# the Fisher information diverges.
_PROB_EPS = 1e-6
_RATE_EPS = 1e-9


def check_family(family, allowed=FAMILIES):
    if family not in allowed:
        raise UnsupportedFamilyError(
            f"family {family!r} not supported here (expected one of {', '.join(allowed)})"
        )


def clamp_to_domain(family, phi):
    """Pull parameter values back inside the family's open domain."""
    phi = np.asarray(phi, dtype=float)
    if family in (BERNOULLI, BINOMIAL):
        return np.clip(phi, _PROB_EPS, 1.0 - _PROB_EPS)
    if family in (POISSON, EXPONENTIAL):
        return np.maximum(phi, _RATE_EPS)
    return phi


def effective_count(family, n, size=1):
    """Observation count in information units: binomial subjects carry ``size`` trials each."""
    return n * size if family == BINOMIAL else n


def fisher_per_observation(family, phi, sigma2=None, size=1):
    """Expected information contributed by a single observation at parameter ``phi``.

    Vectorized over ``phi``. Values outside the family domain raise after
    clamping, i.e. only structurally impossible inputs (negative rates far
    from roundoff) are rejected.
    """
    phi = np.asarray(phi, dtype=float)
    if family == GAUSSIAN:
        if sigma2 is None or sigma2 <= 0:
            raise DomainError("gaussian family needs a positive per-observation variance")
        return np.full_like(phi, 1.0 / sigma2)
    if family in (BERNOULLI, BINOMIAL):
        if np.any(phi < -_PROB_EPS) or np.any(phi > 1.0 + _PROB_EPS):
            raise DomainError("probability parameter outside [0, 1]")
        p = clamp_to_domain(family, phi)
        unit = 1.0 / (p * (1.0 - p))
        return unit * size if family == BINOMIAL else unit
    if family == POISSON:
        if np.any(phi < -_RATE_EPS):
            raise DomainError("poisson rate must be nonnegative")
        return 1.0 / clamp_to_domain(family, phi)
    if family == EXPONENTIAL:
        if np.any(phi < -_RATE_EPS):
            raise DomainError("exponential rate must be nonnegative")
        return 1.0 / clamp_to_domain(family, phi) ** 2
    raise UnsupportedFamilyError(
        f"no closed-form information for family {family!r}; use the numeric estimator"
    )


def draw_sample_means(rng, family, phi, n, sigma2=None, size=1):
    """Draw one study-mean realization per element of ``phi``.

    Uses the exact sampling law of the mean of ``n`` observations, which is
    available in closed form for every supported family, so no per-subject
    simulation loop is needed.
    """
    phi = np.asarray(phi, dtype=float)
    if n < 1:
        raise DomainError("study size must be at least 1 to simulate data")
    if family == GAUSSIAN:
        return rng.normal(phi, np.sqrt(sigma2 / n))
    if family == BERNOULLI:
        p = clamp_to_domain(family, phi)
        return rng.binomial(n, p) / n
    if family == BINOMIAL:
        p = clamp_to_domain(family, phi)
        return rng.binomial(n * size, p) / n
    if family == POISSON:
        lam = clamp_to_domain(family, phi)
        return rng.poisson(n * lam) / n
    if family == EXPONENTIAL:
        rate = clamp_to_domain(family, phi)
        return rng.gamma(shape=n, scale=1.0 / rate) / n
    raise UnsupportedFamilyError(f"family {family!r} does not support data simulation")


def natural_prior_params(family, mu0, n0):
    """Map the (prior mean, prior effective sample size) pair back to the
    conjugate prior's natural hyperparameters."""
    if family == GAUSSIAN:
        return {"mu0": mu0, "n0": n0}
    if family in (BERNOULLI, BINOMIAL):
        if not 0.0 < mu0 < 1.0:
            raise DomainError("prior mean of a probability must lie in (0, 1)")
        return {"alpha": mu0 * n0, "beta": (1.0 - mu0) * n0}
    if family == POISSON:
        return {"alpha": mu0 * n0, "beta": n0}
    if family == EXPONENTIAL:
        return {"alpha": n0, "beta": n0 / mu0}
    raise UnsupportedFamilyError(f"family {family!r} has no conjugate prior form")


def draw_prior(rng, family, mu0, n0, sigma2, draws):
    """Sample ``draws`` values of the focal parameter from its prior."""
    if family == GAUSSIAN:
        return rng.normal(mu0, np.sqrt(sigma2 / n0), draws)
    p = natural_prior_params(family, mu0, n0)
    if family in (BERNOULLI, BINOMIAL):
        return rng.beta(p["alpha"], p["beta"], draws)
    if family in (POISSON, EXPONENTIAL):
        return rng.gamma(shape=p["alpha"], scale=1.0 / p["beta"], size=draws)
    raise UnsupportedFamilyError(f"family {family!r} has no prior sampler")


def draw_posterior(rng, family, mu0, n0, sigma2, n, xbar, draws, size=1):
    """Sample the focal parameter's conjugate posterior after observing a
    study of size ``n`` with sample mean ``xbar``."""
    if family == GAUSSIAN:
        v = n / (n0 + n)
        mean = (1.0 - v) * mu0 + v * xbar
        return rng.normal(mean, np.sqrt(sigma2 / (n0 + n)), draws)
    p = natural_prior_params(family, mu0, n0)
    if family == BERNOULLI:
        return rng.beta(p["alpha"] + n * xbar, p["beta"] + n * (1.0 - xbar), draws)
    if family == BINOMIAL:
        successes = n * xbar  # xbar counts events per subject, out of ``size``
        return rng.beta(p["alpha"] + successes, p["beta"] + n * size - successes, draws)
    if family == POISSON:
        return rng.gamma(shape=p["alpha"] + n * xbar, scale=1.0 / (p["beta"] + n), size=draws)
    if family == EXPONENTIAL:
        return rng.gamma(shape=p["alpha"] + n, scale=1.0 / (p["beta"] + n * xbar), size=draws)
    raise UnsupportedFamilyError(f"family {family!r} has no posterior sampler")
