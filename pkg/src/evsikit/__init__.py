"""EVSI estimation across study sample sizes.

The package estimates the Expected Value of Sample Information over a grid
of planned study sizes from a single probabilistic-analysis dataset, using
a spline-based Taylor correction of the Gaussian-approximation rescaling,
and ships the comparator estimators and validation suites used to check it.
"""

from .casestudies import (
    DEFAULT_MARKOV_CONFIG_PATH,
    MarkovModelConfig,
    default_markov_config,
    generate_case1_pa,
    generate_case2_pa,
    load_markov_config,
    markov_cohort_run,
    stylized_inb,
)
from .errors import EvsikitError
from .estimators import (
    ConditionalBenefitSamples,
    EstimatorOptions,
    EvsiCurve,
    conditional_nb_ga,
    conditional_nb_tga,
    evppi,
    evsi_curve_ga,
    evsi_curve_npreg,
    evsi_curve_tga,
    evsi_from_conditional,
    evsi_from_conditional_inb,
    evsi_nonparametric,
    fit_decision_models,
)
from .fisher import (
    ConditionalVariances,
    adjust_conditional_variances,
    expected_fisher,
    numeric_expected_fisher,
    target_conditional_variance,
)
from .gaussian import (
    PreposteriorMeans,
    VarianceFraction,
    conjugate_prior_ess,
    preposterior_means,
    rescale_prior_samples,
    variance_fraction,
)
from .oracles import (
    PosteriorMoments,
    analytic_conditional_inb,
    analytic_evsi_curve,
    closed_form_linear_gaussian_evsi,
    conjugate_posterior_moments,
    nested_mc_evsi,
)
from .padata import (
    DataCollectionSpec,
    IncrementalBenefitSamples,
    PaDataset,
    incremental_nb,
    load_pa_dataset,
    prior_moments,
    save_pa_dataset,
)
from .splines import BasisConfig, SplineModel, fit_additive_spline

__version__ = "0.1.0"

__all__ = [
    "BasisConfig",
    "ConditionalBenefitSamples",
    "DEFAULT_MARKOV_CONFIG_PATH",
    "ConditionalVariances",
    "DataCollectionSpec",
    "EstimatorOptions",
    "EvsiCurve",
    "EvsikitError",
    "IncrementalBenefitSamples",
    "MarkovModelConfig",
    "PaDataset",
    "PosteriorMoments",
    "PreposteriorMeans",
    "SplineModel",
    "VarianceFraction",
    "adjust_conditional_variances",
    "analytic_conditional_inb",
    "analytic_evsi_curve",
    "closed_form_linear_gaussian_evsi",
    "conditional_nb_ga",
    "conditional_nb_tga",
    "conjugate_posterior_moments",
    "conjugate_prior_ess",
    "default_markov_config",
    "evppi",
    "evsi_curve_ga",
    "evsi_curve_npreg",
    "evsi_curve_tga",
    "evsi_from_conditional",
    "evsi_from_conditional_inb",
    "evsi_nonparametric",
    "expected_fisher",
    "fit_additive_spline",
    "fit_decision_models",
    "generate_case1_pa",
    "generate_case2_pa",
    "incremental_nb",
    "load_markov_config",
    "load_pa_dataset",
    "markov_cohort_run",
    "nested_mc_evsi",
    "numeric_expected_fisher",
    "preposterior_means",
    "prior_moments",
    "rescale_prior_samples",
    "save_pa_dataset",
    "stylized_inb",
    "target_conditional_variance",
    "variance_fraction",
]
