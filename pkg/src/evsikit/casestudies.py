"""Validation suites: four stylized benefit functions with Gaussian
parameters, and a configurable three-state Markov cohort model with four
data-collection exercises.

The stylized suite has closed-form comparators throughout. The Markov model
gives a treatment-failure cohort structure whose net benefit is linear in
the hospital-visit means and nonlinear in the failure probabilities; it is
validated by cross-method agreement, not against any published numbers.
"""

from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import families
from .errors import DomainError, SchemaError, ShapeError
from .gaussian import conjugate_prior_ess
from .padata import DataCollectionSpec, PaDataset


@dataclass(frozen=True)
class StylizedScenario:
    """One stylized decision problem: an incremental-benefit polynomial over
    one or two standard-prior parameters (mean 0, observation variance 1,
    prior effective sample size 5)."""

    id: int
    n_focal: int
    coeffs: tuple  # (constant, ((scale, power) per focal parameter))

    def inb(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.ndim == 1:
            if theta.size != self.n_focal:
                raise ShapeError(f"scenario {self.id} takes {self.n_focal} parameters")
            theta = theta[None, :]
            single = True
        else:
            if theta.shape[1] != self.n_focal:
                raise ShapeError(f"scenario {self.id} takes {self.n_focal} parameters")
            single = False
        out = np.full(theta.shape[0], float(self.coeffs[0]))
        for j, (scale, power) in enumerate(self.coeffs[1]):
            out += scale * theta[:, j] ** power
        return float(out[0]) if single else out


STYLIZED = {
    1: StylizedScenario(id=1, n_focal=1, coeffs=(-100.0, ((5000.0, 1),))),
    2: StylizedScenario(id=2, n_focal=1, coeffs=(-1000.0, ((5000.0, 2),))),
    3: StylizedScenario(id=3, n_focal=1, coeffs=(-500.0, ((5000.0, 4),))),
    4: StylizedScenario(id=4, n_focal=2, coeffs=(-1500.0, ((5000.0, 2), (5000.0, 4)))),
}

CASE1_MU0 = 0.0
CASE1_SIGMA2 = 1.0
CASE1_N0 = 5.0


def stylized_inb(scenario, theta):
    """Evaluate a stylized scenario's incremental benefit."""
    return _scenario(scenario).inb(theta)


def _scenario(scenario):
    if isinstance(scenario, StylizedScenario):
        return scenario
    if scenario not in STYLIZED:
        raise DomainError(f"unknown stylized scenario {scenario!r}")
    return STYLIZED[scenario]


def case1_collection_spec(scenario):
    """Data-collection description shared by all stylized scenarios:
    Gaussian observations of each focal parameter."""
    sc = _scenario(scenario)
    return DataCollectionSpec(
        focal_indices=tuple(range(sc.n_focal)),
        family=families.GAUSSIAN,
        mu0=CASE1_MU0,
        sigma2=CASE1_SIGMA2,
        n0=CASE1_N0,
    )


def generate_case1_pa(scenario, m_rows, seed):
    """PA dataset for a stylized scenario: prior draws plus a two-decision
    benefit table (the new option's benefit is the incremental polynomial;
    the reference option is the zero baseline)."""
    sc = _scenario(scenario)
    if m_rows < 2:
        raise DomainError("need at least 2 rows")
    rng = np.random.default_rng(seed)
    theta = rng.normal(CASE1_MU0, np.sqrt(CASE1_SIGMA2 / CASE1_N0), size=(m_rows, sc.n_focal))
    inb = sc.inb(theta)
    nb = np.column_stack([inb, np.zeros(m_rows)])
    names = tuple(f"theta{j + 1}" for j in range(sc.n_focal)) if sc.n_focal > 1 else ("theta",)
    return PaDataset(theta=theta, nb=nb, param_names=names, decision_names=("new", "reference"))


def case1_nested_mc_evaluator(scenario):
    """Benefit evaluator for the nested Monte Carlo oracle on a stylized
    scenario: maps focal draws to (new, reference) benefit columns."""
    sc = _scenario(scenario)

    def evaluate(phi, rng):
        inb = sc.inb(phi)
        return np.column_stack([inb, np.zeros_like(inb)])

    return evaluate


# ---------------------------------------------------------------------------
# Markov cohort model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MarkovModelConfig:
    """Three-state cohort model (on-treatment, permanent disability, dead)
    comparing interventions A and B against standard care C.

    Failure moves patients from the on-treatment state to permanent
    disability at the per-cycle intervention failure probability; disability
    carries its own mortality. Interventions A and B additionally incur
    hospital-visit costs proportional to their mean visits per cycle while
    on treatment. All probabilities are per cycle; ``discount`` is the
    per-cycle rate applied at the end of each cycle; net benefit is
    willingness-to-pay times discounted quality-adjusted cycles minus
    discounted costs.
    """

    states: tuple = ("on-treatment", "disabled", "dead")
    intervention_names: tuple = ("A", "B", "C")
    horizon: int = 40
    discount: float = 0.03
    wtp: float = 50_000.0
    utilities: tuple = (0.85, 0.55, 0.0)
    state_costs: tuple = (1_000.0, 9_000.0, 0.0)
    # Defaults are calibrated so the three prior mean net benefits nearly
    # coincide (each intervention optimal with probability ~1/3) and every
    # uncertain parameter carries nontrivial information value.
    treatment_costs: tuple = (17_000.0, 0.0, 11_600.0)  # per cycle while on treatment
    visit_cost: float = 12_000.0  # per hospital visit (A and B only)
    p_fail_standard: float = 0.4
    p_die_stable: float = 0.0  # failure is the only exit from the treated state
    p_die_disabled: float = 0.08

    def __post_init__(self):
        if len(self.states) != 3 or len(self.utilities) != 3 or len(self.state_costs) != 3:
            raise ShapeError("the cohort model has exactly three states")
        if len(self.intervention_names) != 3 or len(self.treatment_costs) != 3:
            raise ShapeError("the cohort model compares exactly three interventions")
        if self.horizon < 1:
            raise DomainError("horizon must be at least one cycle")
        if self.wtp <= 0:
            raise DomainError("willingness-to-pay must be positive")
        if self.discount < 0:
            raise DomainError("discount rate must be nonnegative")
        for p in (self.p_fail_standard, self.p_die_stable, self.p_die_disabled):
            if not 0.0 <= p <= 1.0:
                raise DomainError("probabilities must lie in [0, 1]")
        if self.p_fail_standard + self.p_die_stable > 1.0:
            raise DomainError("stable-state exit probabilities exceed 1")


DEFAULT_MARKOV_CONFIG_PATH = Path(__file__).parent / "data" / "markov_default.yaml"


def default_markov_config(**overrides):
    """The shipped default model; keyword overrides replace single fields.

    A YAML copy of the defaults lives at ``DEFAULT_MARKOV_CONFIG_PATH`` for
    reference and for seeding run configs.
    """
    return replace(MarkovModelConfig(), **overrides) if overrides else MarkovModelConfig()


def load_markov_config(path):
    """Read a cohort-model config from a YAML mapping of field names."""
    import yaml

    with open(path, encoding="utf-8") as fh:
        doc = yaml.safe_load(fh) or {}
    allowed = {f.name for f in fields(MarkovModelConfig)}
    unknown = set(doc) - allowed
    if unknown:
        raise SchemaError(f"unknown cohort-model keys: {sorted(unknown)}")
    doc = {k: tuple(v) if isinstance(v, list) else v for k, v in doc.items()}
    return MarkovModelConfig(**doc)


def transition_matrix(config, p_fail):
    """Per-cycle transition matrix for one intervention with failure
    probability ``p_fail``; rows sum to one by construction."""
    if not 0.0 <= p_fail <= 1.0 or p_fail + config.p_die_stable > 1.0:
        raise DomainError(f"failure probability {p_fail} out of range")
    pds, pdd = config.p_die_stable, config.p_die_disabled
    return np.array(
        [
            [1.0 - p_fail - pds, p_fail, pds],
            [0.0, 1.0 - pdd, pdd],
            [0.0, 0.0, 1.0],
        ]
    )


def markov_cohort_run(config, theta):
    """Net benefit of each intervention at parameter draw(s) ``theta``.

    ``theta`` columns are (visit mean A, visit mean B, failure prob A,
    failure prob B); accepts one draw (shape ``(4,)``) or a batch
    ``(rows, 4)``. The cohort starts entirely on treatment; each cycle it
    transitions, then accrues utilities and costs discounted at end of
    cycle.
    """
    theta = np.asarray(theta, dtype=float)
    single = theta.ndim == 1
    if single:
        theta = theta[None, :]
    if theta.shape[1] != 4:
        raise ShapeError(f"theta must have 4 columns, got {theta.shape}")
    mu_a, mu_b, p_a, p_b = theta.T
    if np.any((p_a < 0) | (p_a > 1)) or np.any((p_b < 0) | (p_b > 1)):
        raise DomainError("failure probabilities must lie in [0, 1]")
    if np.any(mu_a < 0) or np.any(mu_b < 0):
        raise DomainError("visit means must be nonnegative")
    rows = theta.shape[0]
    fail = np.column_stack([p_a, p_b, np.full(rows, config.p_fail_standard)])
    stable_cost = np.column_stack(
        [
            config.treatment_costs[0] + config.visit_cost * mu_a,
            config.treatment_costs[1] + config.visit_cost * mu_b,
            np.full(rows, config.treatment_costs[2]),
        ]
    )
    qaly, cost = _propagate(config, fail, stable_cost)
    nb = config.wtp * qaly - cost
    return nb[0] if single else nb


def _propagate(config, p_fail, stable_cycle_cost):
    """Discounted QALY and cost totals for a cohort, vectorized over samples
    and interventions at once (both arguments are (rows, interventions));
    occupancy is propagated in expectation (cohort model, no
    microsimulation)."""
    u = config.utilities
    c = config.state_costs
    pds, pdd = config.p_die_stable, config.p_die_disabled
    stay_stable = 1.0 - p_fail - pds
    stable_cash = c[0] + stable_cycle_cost
    occ_stable = np.ones_like(p_fail)
    occ_dis = np.zeros_like(p_fail)
    qaly = np.zeros_like(p_fail)
    cost = np.zeros_like(p_fail)
    disc = 1.0
    for _ in range(config.horizon):
        occ_dis = occ_stable * p_fail + occ_dis * (1.0 - pdd)
        occ_stable = occ_stable * stay_stable
        disc /= 1.0 + config.discount
        qaly += disc * (occ_stable * u[0] + occ_dis * u[1])
        cost += disc * (occ_stable * stable_cash + occ_dis * c[1])
    return qaly, cost


CASE2_PRIORS = {
    # exercise id -> (focal column, family, conjugate hyperparameters)
    1: ("mu_a", families.POISSON, {"alpha": 10.0, "beta": 10.0}),
    2: ("mu_b", families.POISSON, {"alpha": 20.0, "beta": 10.0}),
    3: ("p_a", families.BERNOULLI, {"alpha": 2.0, "beta": 8.0}),
    4: ("p_b", families.BERNOULLI, {"alpha": 3.0, "beta": 7.0}),
}

CASE2_PARAM_NAMES = ("mu_a", "mu_b", "p_a", "p_b")


def case2_collection_spec(exercise):
    """Data-collection description of one Markov exercise, with the prior
    effective sample size derived from conjugacy (it is 10 for all four)."""
    if exercise not in CASE2_PRIORS:
        raise DomainError(f"unknown exercise {exercise!r}; expected 1-4")
    name, family, hyper = CASE2_PRIORS[exercise]
    n0, mu0, sigma2 = conjugate_prior_ess(family, **hyper)
    return DataCollectionSpec(
        focal_indices=(CASE2_PARAM_NAMES.index(name),),
        family=family,
        mu0=mu0,
        sigma2=sigma2,
        n0=n0,
    )


def _draw_case2_params(rng, rows):
    cols = []
    for exercise in (1, 2, 3, 4):
        _, family, hyper = CASE2_PRIORS[exercise]
        n0, mu0, sigma2 = conjugate_prior_ess(family, **hyper)
        cols.append(families.draw_prior(rng, family, mu0, n0, sigma2, rows))
    return np.column_stack(cols)


def generate_case2_pa(config, m_rows, seed):
    """PA dataset for the Markov model: independent prior draws of the four
    uncertain parameters, one cohort run per draw."""
    if m_rows < 2:
        raise DomainError("need at least 2 rows")
    rng = np.random.default_rng(seed)
    theta = _draw_case2_params(rng, m_rows)
    nb = markov_cohort_run(config, theta)
    return PaDataset(
        theta=theta,
        nb=nb,
        param_names=CASE2_PARAM_NAMES,
        decision_names=config.intervention_names,
    )


def case2_nested_mc_evaluator(config, exercise):
    """Benefit evaluator for the nested Monte Carlo oracle on one Markov
    exercise: focal draws come from the caller, the other three parameters
    are integrated over their priors with the supplied generator."""
    if exercise not in CASE2_PRIORS:
        raise DomainError(f"unknown exercise {exercise!r}; expected 1-4")
    focal_col = CASE2_PARAM_NAMES.index(CASE2_PRIORS[exercise][0])

    def evaluate(phi, rng):
        rows = phi.shape[0]
        theta = _draw_case2_params(rng, rows)
        theta[:, focal_col] = phi[:, 0]
        return markov_cohort_run(config, theta)

    return evaluate
