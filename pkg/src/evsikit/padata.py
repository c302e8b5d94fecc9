"""Probabilistic-analysis datasets: joint parameter / net-benefit samples,
their CSV interchange format, and derived incremental benefits.

CSV layout: UTF-8, comma separated, one header row; parameter columns are
named ``param.<name>`` and benefit columns ``nb.<name>``; data rows are in
simulation order. Values are written with 17 significant digits so a
round-trip reproduces them bit-exactly.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from . import families
from .errors import (
    CsvParseError,
    DomainError,
    InsufficientDataError,
    SchemaError,
    ShapeError,
)

PARAM_PREFIX = "param."
NB_PREFIX = "nb."


@dataclass(frozen=True)
class PaDataset:
    """Row-aligned joint samples: row i holds one simulation draw of the
    model parameters and the net benefit of every decision at that draw."""

    theta: np.ndarray
    nb: np.ndarray
    param_names: tuple
    decision_names: tuple

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        nb = np.asarray(self.nb, dtype=float)
        if theta.ndim != 2 or nb.ndim != 2:
            raise ShapeError("theta and nb must be 2-D arrays")
        if theta.shape[0] != nb.shape[0]:
            raise ShapeError(
                f"theta has {theta.shape[0]} rows but nb has {nb.shape[0]}; rows must align"
            )
        if theta.shape[0] < 2:
            raise InsufficientDataError("need at least 2 simulation rows")
        if theta.shape[1] < 1 or nb.shape[1] < 2:
            raise ShapeError("need at least 1 parameter and 2 decisions")
        if len(self.param_names) != theta.shape[1] or len(self.decision_names) != nb.shape[1]:
            raise ShapeError("name lists must match the array widths")
        if not np.all(np.isfinite(theta)) or not np.all(np.isfinite(nb)):
            raise DomainError("all parameter and benefit entries must be finite")
        theta.setflags(write=False)
        nb.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "nb", nb)
        object.__setattr__(self, "param_names", tuple(self.param_names))
        object.__setattr__(self, "decision_names", tuple(self.decision_names))

    @property
    def n_rows(self):
        return self.theta.shape[0]

    @property
    def n_params(self):
        return self.theta.shape[1]

    @property
    def n_decisions(self):
        return self.nb.shape[1]


@dataclass(frozen=True)
class IncrementalBenefitSamples:
    """Benefit of each non-reference decision minus the reference decision."""

    inb: np.ndarray
    reference: int
    decision_names: tuple


@dataclass(frozen=True)
class DataCollectionSpec:
    """What the proposed study would measure.

    ``focal_indices`` name the informed parameter columns; ``mu0``,
    ``sigma2`` and ``n0`` give each focal parameter's prior mean,
    per-observation variance and prior effective sample size (scalars
    broadcast across focal parameters). ``binomial_size`` is the per-subject
    trial count for the binomial family.
    """

    focal_indices: tuple
    family: str
    mu0: tuple
    sigma2: tuple
    n0: tuple
    binomial_size: int = 1
    log_density: object = field(default=None, repr=False)
    sampler: object = field(default=None, repr=False)

    def __post_init__(self):
        families.check_family(self.family)
        idx = tuple(int(i) for i in self.focal_indices)
        if len(idx) == 0:
            raise SchemaError("at least one focal parameter is required")
        if len(set(idx)) != len(idx):
            raise SchemaError(f"focal indices must be distinct, got {idx}")
        if any(i < 0 for i in idx):
            raise SchemaError(f"focal indices must be nonnegative, got {idx}")
        object.__setattr__(self, "focal_indices", idx)
        for name in ("mu0", "sigma2", "n0"):
            vals = np.broadcast_to(np.asarray(getattr(self, name), dtype=float), (len(idx),))
            object.__setattr__(self, name, tuple(float(v) for v in vals))
        if any(v <= 0 for v in self.n0):
            raise DomainError(f"n0 must be positive, got {self.n0}")
        if any(v <= 0 for v in self.sigma2):
            raise DomainError(f"sigma2 must be positive, got {self.sigma2}")
        if self.family in (families.BERNOULLI, families.BINOMIAL):
            if any(not 0.0 < m < 1.0 for m in self.mu0):
                raise DomainError(f"probability prior means must lie in (0, 1), got {self.mu0}")
        if self.binomial_size < 1:
            raise DomainError("binomial_size must be at least 1")

    @property
    def n_focal(self):
        return len(self.focal_indices)

    def focal_columns(self, pa):
        if max(self.focal_indices) >= pa.n_params:
            raise IndexError(
                f"focal index {max(self.focal_indices)} out of range for "
                f"{pa.n_params} parameters"
            )
        return pa.theta[:, list(self.focal_indices)]


def load_pa_dataset(path):
    """Read a PA dataset from its CSV interchange format."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: file is empty") from None
        param_cols, nb_cols = [], []
        for j, name in enumerate(header):
            if name.startswith(PARAM_PREFIX):
                param_cols.append((j, name[len(PARAM_PREFIX):]))
            elif name.startswith(NB_PREFIX):
                nb_cols.append((j, name[len(NB_PREFIX):]))
            else:
                raise SchemaError(f"{path}: column {name!r} lacks a param./nb. prefix")
        for cols, kind in ((param_cols, "param"), (nb_cols, "nb")):
            names = [n for _, n in cols]
            if len(set(names)) != len(names):
                raise SchemaError(f"{path}: duplicate {kind} column names {sorted(names)}")
        if not param_cols:
            raise SchemaError(f"{path}: no param. columns found")
        if len(nb_cols) < 2:
            raise SchemaError(f"{path}: need at least two nb. columns")
        rows = []
        for i, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise CsvParseError(f"{path}: row {i} has {len(row)} cells, expected {len(header)}")
            parsed = []
            for j, cell in enumerate(row):
                try:
                    value = float(cell)
                except ValueError:
                    raise CsvParseError(
                        f"{path}: row {i}, column {header[j]!r}: cannot parse {cell!r}"
                    ) from None
                if not np.isfinite(value):
                    raise CsvParseError(
                        f"{path}: row {i}, column {header[j]!r}: non-finite value {cell!r}"
                    )
                parsed.append(value)
            rows.append(parsed)
        if len(rows) < 2:
            raise InsufficientDataError(f"{path}: need at least 2 data rows, found {len(rows)}")
    data = np.asarray(rows, dtype=float)
    return PaDataset(
        theta=data[:, [j for j, _ in param_cols]],
        nb=data[:, [j for j, _ in nb_cols]],
        param_names=tuple(n for _, n in param_cols),
        decision_names=tuple(n for _, n in nb_cols),
    )


def save_pa_dataset(pa, path):
    """Write a PA dataset in the CSV interchange format."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [PARAM_PREFIX + n for n in pa.param_names] + [NB_PREFIX + n for n in pa.decision_names]
        )
        for i in range(pa.n_rows):
            writer.writerow(
                [format(v, ".17g") for v in pa.theta[i]] + [format(v, ".17g") for v in pa.nb[i]]
            )


def incremental_nb(pa, reference):
    """Benefit columns relative to one reference decision, order preserved."""
    if not 0 <= reference < pa.n_decisions:
        raise IndexError(f"reference {reference} out of range for {pa.n_decisions} decisions")
    keep = [j for j in range(pa.n_decisions) if j != reference]
    inb = pa.nb[:, keep] - pa.nb[:, [reference]]
    return IncrementalBenefitSamples(
        inb=inb,
        reference=reference,
        decision_names=tuple(pa.decision_names[j] for j in keep),
    )


def prior_moments(samples):
    """Sample mean and unbiased sample variance of a draw vector."""
    samples = np.asarray(samples, dtype=float)
    if samples.size < 2:
        raise InsufficientDataError(f"need at least 2 samples, got {samples.size}")
    return float(np.mean(samples)), float(np.var(samples, ddof=1))
