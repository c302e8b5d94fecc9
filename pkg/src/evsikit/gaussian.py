"""Preposterior-mean machinery: variance fraction, prior-sample rescaling,
and conjugacy-derived prior effective sample sizes.

A planned study of size ``n`` against a prior worth ``n0`` observations
shifts a fraction ``v = n / (n0 + n)`` of the prior variance into the
distribution of the updated parameter mean. Rescaling the prior samples by
``sqrt(v)`` toward the prior mean reproduces that distribution without any
posterior simulation.
"""

from dataclasses import dataclass

import numpy as np

from . import families
from .errors import DomainError, UnsupportedFamilyError


@dataclass(frozen=True)
class VarianceFraction:
    """Share of preposterior-mean variance attributable to a study of size ``n``."""

    v: float
    n: int
    n0: float

    def __post_init__(self):
        if not 0.0 <= self.v < 1.0:
            raise DomainError(f"variance fraction must lie in [0, 1), got {self.v}")


@dataclass(frozen=True)
class PreposteriorMeans:
    """Rescaled parameter samples mu_x with the distribution of the
    conditional mean of each focal parameter given a planned study.

    ``mu_x`` has one row per simulation draw and one column per focal
    parameter.
    """

    mu_x: np.ndarray
    fraction: VarianceFraction


def variance_fraction(n, n0):
    """Variance fraction ``v = n / (n0 + n)`` for a study of ``n`` subjects."""
    if n0 <= 0:
        raise DomainError(f"prior effective sample size must be positive, got {n0}")
    if n < 0:
        raise DomainError(f"study size must be nonnegative, got {n}")
    return VarianceFraction(v=n / (n0 + n), n=int(n), n0=float(n0))


def rescale_prior_samples(phi, mu0, fraction):
    """Contract prior samples toward the prior mean so their spread matches
    the preposterior-mean distribution.

    Returns ``sqrt(v) * phi + (1 - sqrt(v)) * mu0`` elementwise; the sample
    variance of the output is ``v`` times the sample variance of ``phi``.
    """
    phi = np.asarray(phi, dtype=float)
    w = np.sqrt(fraction.v)
    return w * phi + (1.0 - w) * mu0


def preposterior_means(phi_columns, mu0, fraction):
    """Rescale each focal-parameter column independently."""
    phi_columns = np.atleast_2d(np.asarray(phi_columns, dtype=float))
    mu0 = np.broadcast_to(np.asarray(mu0, dtype=float), (phi_columns.shape[1],))
    w = np.sqrt(fraction.v)
    mu_x = w * phi_columns + (1.0 - w) * mu0[None, :]
    return PreposteriorMeans(mu_x=mu_x, fraction=fraction)


def conjugate_prior_ess(family, **hyperparams):
    """Prior effective sample size, mean, and per-observation variance
    implied by a conjugate prior.

    Supported pairs and their hyperparameters:

    - ``gaussian``: ``mu0`` and prior variance ``w`` plus observation
      variance ``sigma2``; the prior is worth ``sigma2 / w`` observations.
    - ``bernoulli`` / ``binomial`` with a Beta(alpha, beta) prior:
      ``n0 = alpha + beta``, ``mu0 = alpha / (alpha + beta)``,
      ``sigma2 = mu0 * (1 - mu0)``.
    - ``poisson`` with a Gamma(alpha, beta) prior: ``n0 = beta``,
      ``mu0 = alpha / beta``, ``sigma2 = mu0``.
    - ``exponential`` (rate parameter) with a Gamma(alpha, beta) prior:
      ``n0 = alpha``, ``mu0 = alpha / beta``, ``sigma2 = mu0 ** 2`` so that
      ``sigma2 / n0`` reproduces the Gamma prior variance exactly.

    Returns ``(n0, mu0, sigma2)``.
    """
    families.check_family(family, families.CONJUGATE_FAMILIES)
    if family == families.GAUSSIAN:
        mu0 = hyperparams["mu0"]
        w = hyperparams["prior_variance"]
        sigma2 = hyperparams["sigma2"]
        if w <= 0 or sigma2 <= 0:
            raise DomainError("gaussian variances must be positive")
        return sigma2 / w, mu0, sigma2
    try:
        alpha = hyperparams["alpha"]
        beta = hyperparams["beta"]
    except KeyError as missing:
        raise UnsupportedFamilyError(
            f"family {family!r} needs alpha/beta hyperparameters; "
            "otherwise supply n0, mu0, sigma2 directly"
        ) from missing
    if alpha <= 0 or beta <= 0:
        raise DomainError("conjugate hyperparameters must be positive")
    if family in (families.BERNOULLI, families.BINOMIAL):
        n0 = alpha + beta
        mu0 = alpha / n0
        return n0, mu0, mu0 * (1.0 - mu0)
    if family == families.POISSON:
        mu0 = alpha / beta
        return beta, mu0, mu0
    # exponential rate with Gamma prior
    mu0 = alpha / beta
    return alpha, mu0, mu0**2
