"""Expected Fisher information and the law-of-total-variance adjustment that
turns inverse information into per-sample conditional variances."""

from dataclasses import dataclass

import numpy as np

from . import families
from .errors import DomainError, NumericInstabilityError


@dataclass(frozen=True)
class ConditionalVariances:
    """Per-sample conditional variances of a focal parameter.

    ``raw`` holds the inverse expected information at each rescaled sample;
    ``adjusted`` is ``scale * raw`` with ``scale`` chosen so the adjusted
    values average exactly to ``target``.
    """

    raw: np.ndarray
    adjusted: np.ndarray
    scale: float
    target: float


def expected_fisher(family, phi, n, sigma2=None, size=1):
    """Expected information about ``phi`` carried by ``n`` i.i.d. observations.

    Closed forms per family (vectorized over ``phi``):
    gaussian ``n / sigma2``; bernoulli ``n / (phi (1 - phi))``; poisson
    ``n / phi``; binomial ``n * size / (phi (1 - phi))``; exponential (rate)
    ``n / phi**2``. Probability and rate parameters are clamped away from
    the domain boundary first.
    """
    if n < 1:
        raise DomainError(f"information requires at least one observation, got n={n}")
    return n * families.fisher_per_observation(family, phi, sigma2=sigma2, size=size)


def numeric_expected_fisher(log_density, sampler, phi, n, draws, seed):
    """Monte Carlo estimate of the expected information for an arbitrary
    one-parameter likelihood.

    ``log_density(x, phi)`` must be twice differentiable in ``phi`` near the
    query point and accept vectorized ``x``; ``sampler(rng, phi, draws)``
    draws observations at the true parameter. The curvature is taken by a
    central second difference with step ``max(1e-4, 1e-4 * |phi|)``.
    """
    if draws < 1:
        raise DomainError("draws must be positive")
    rng = np.random.default_rng(seed)
    x = sampler(rng, phi, draws)
    h = max(1e-4, 1e-4 * abs(phi))
    curvature = (log_density(x, phi + h) - 2.0 * log_density(x, phi) + log_density(x, phi - h)) / (
        h * h
    )
    info = -n * float(np.mean(curvature))
    if not np.isfinite(info) or info <= 0.0:
        raise NumericInstabilityError(
            f"numeric information at phi={phi} came out {info}; "
            "the log-density has no usable curvature there"
        )
    return info


def target_conditional_variance(n, n0, sigma2):
    """Mean conditional variance of the focal parameter after a study of
    size ``n``: ``sigma2 / (n0 + n)``, the law-of-total-variance value
    (prior variance minus the variance of the conditional mean)."""
    if n0 <= 0 or sigma2 <= 0:
        raise DomainError("n0 and sigma2 must be positive")
    if n < 0:
        raise DomainError("study size must be nonnegative")
    return sigma2 / (n0 + n)


def preposterior_mean_spread(n, n0, sigma2):
    """Variance of the conditional mean itself, ``v * sigma2 / n0``.

    This is the spread of the rescaled samples, not the average conditional
    variance; it is exposed as an alternative adjustment target for
    sensitivity checks (the two coincide only at ``n = n0``).
    """
    if n0 <= 0 or sigma2 <= 0:
        raise DomainError("n0 and sigma2 must be positive")
    v = n / (n0 + n)
    return v * sigma2 / n0


def adjust_conditional_variances(inv_info, target):
    """Rescale inverse-information variances so their mean equals ``target``.

    The asymptotic variances ``1 / I_n`` are systematically off at finite
    ``n``; a single multiplicative constant restores the exact mean
    conditional variance while preserving the relative pattern across
    samples.
    """
    inv_info = np.asarray(inv_info, dtype=float)
    if inv_info.size == 0:
        raise DomainError("need at least one variance to adjust")
    if np.any(inv_info <= 0) or not np.all(np.isfinite(inv_info)):
        raise DomainError("inverse information values must be positive and finite")
    if target <= 0:
        raise DomainError("target variance must be positive")
    scale = target / float(np.mean(inv_info))
    adjusted = scale * inv_info
    return ConditionalVariances(raw=inv_info, adjusted=adjusted, scale=scale, target=float(target))
