"""Batch front end: parse a run configuration, execute the selected
estimators over a study-size grid, and write curve CSVs plus an optional
plot.

Configuration is a YAML document; command-line flags override individual
keys. Outputs: one ``evsi_<method>.csv`` per requested method with header
``method,n,evsi,mc_se``, an ``evppi.csv`` with ``evppi,mc_se``, and
optionally ``curves.svg``.
"""

import argparse
import hashlib
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import yaml

from . import casestudies
from .errors import EvsikitError, SchemaError, UnsupportedFamilyError, ValidationError
from .estimators import (
    EstimatorOptions,
    EvsiCurve,
    evppi,
    evsi_curve_ga,
    evsi_curve_npreg,
    evsi_curve_tga,
)
from .oracles import analytic_evsi_curve, nested_mc_evsi
from .padata import DataCollectionSpec, load_pa_dataset
from .splines import BasisConfig

METHODS = ("tga", "ga", "npreg", "nested-mc", "analytic", "evppi")

BUILTIN_CASE1 = {f"case1-scenario{s}": s for s in (1, 2, 3, 4)}
BUILTIN_CASE2 = {f"case2-exercise{e}": e for e in (1, 2, 3, 4)}

_SCHEMA = {
    "input": {"dataset": str, "builtin": str, "rows": int, "seed": int},
    "collection": {
        "focal": list,
        "family": str,
        "mu0": (int, float, list),
        "sigma2": (int, float, list),
        "n0": (int, float, list),
        "binomial_size": int,
    },
    "grid": {"min": int, "max": int, "step": int, "values": list},
    "methods": list,
    "seed": int,
    "output": str,
    "plot": bool,
    "nested_mc": {"outer": int, "inner": int},
    "markov": None,  # validated against MarkovModelConfig fields
    "options": {
        "variance_adjustment": bool,
        "variance_target": str,
        "spline": {
            "degree": int,
            "interior_knots": int,
            "knot_rule": str,
            "ridge": (int, float),
            "curvature_smoothing": (int, float),
        },
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Fully validated description of one batch run."""

    dataset: str = None
    builtin: str = None
    rows: int = 10_000
    input_seed: int = 1
    collection: dict = field(default_factory=dict)
    grid: tuple = ()
    methods: tuple = ("tga",)
    seed: int = 1
    output: str = "out"
    plot: bool = False
    nested_outer: int = 1000
    nested_inner: int = 400
    markov_overrides: dict = field(default_factory=dict)
    options: EstimatorOptions = field(default_factory=EstimatorOptions)


def _check_keys(doc, schema, path=""):
    if not isinstance(doc, dict):
        raise SchemaError(f"config section {path or '<root>'} must be a mapping")
    for key, value in doc.items():
        if key not in schema:
            raise SchemaError(f"unknown config key {path + key!r}")
        sub = schema[key]
        if isinstance(sub, dict):
            _check_keys(value, sub, path + key + ".")
        elif sub is not None and not isinstance(value, sub):
            raise SchemaError(f"config key {path + key!r} has the wrong type")


def parse_config(doc):
    """Validate a parsed YAML document into a ``RunConfig``.

    Unknown keys raise a schema error naming the key; inconsistent values
    (empty or descending grids, unknown methods) raise validation errors.
    """
    if doc is None:
        doc = {}
    _check_keys(doc, _SCHEMA)
    markov = doc.get("markov", {}) or {}
    if markov:
        allowed = {f.name for f in fields(casestudies.MarkovModelConfig)}
        for key in markov:
            if key not in allowed:
                raise SchemaError(f"unknown config key 'markov.{key}'")
        markov = {
            k: tuple(v) if isinstance(v, list) else v for k, v in markov.items()
        }
    inp = doc.get("input", {}) or {}
    dataset = inp.get("dataset")
    builtin = inp.get("builtin")
    if dataset and builtin:
        raise ValidationError("input.dataset and input.builtin are mutually exclusive")
    if builtin and builtin not in BUILTIN_CASE1 and builtin not in BUILTIN_CASE2:
        known = sorted(list(BUILTIN_CASE1) + list(BUILTIN_CASE2))
        raise ValidationError(f"unknown builtin {builtin!r}; expected one of {known}")
    if not dataset and not builtin:
        raise ValidationError("config needs input.dataset or input.builtin")

    grid_doc = doc.get("grid", {}) or {}
    if "values" in grid_doc:
        grid = tuple(int(n) for n in grid_doc["values"])
    else:
        missing = {"min", "max"} - set(grid_doc)
        if missing:
            raise ValidationError(f"grid needs min and max (missing {sorted(missing)})")
        step = int(grid_doc.get("step", 1))
        if step < 1:
            raise ValidationError(f"grid.step must be >= 1, got {step}")
        if grid_doc["min"] > grid_doc["max"]:
            raise ValidationError(
                f"grid.min {grid_doc['min']} exceeds grid.max {grid_doc['max']}"
            )
        grid = tuple(range(int(grid_doc["min"]), int(grid_doc["max"]) + 1, step))
    if not grid:
        raise ValidationError("study-size grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValidationError("grid values must be strictly ascending")
    if any(n < 0 for n in grid):
        raise ValidationError("grid values must be nonnegative")

    methods = tuple(doc.get("methods", ["tga"]))
    if not methods:
        raise ValidationError("methods list is empty")
    for m in methods:
        if m not in METHODS:
            raise ValidationError(f"unknown method {m!r}; expected one of {METHODS}")

    opts_doc = doc.get("options", {}) or {}
    spline_doc = opts_doc.get("spline", {}) or {}
    options = EstimatorOptions(
        basis=BasisConfig(**spline_doc),
        variance_adjustment=opts_doc.get("variance_adjustment", True),
        variance_target=opts_doc.get("variance_target", "posterior"),
    )
    nested = doc.get("nested_mc", {}) or {}
    return RunConfig(
        dataset=dataset,
        builtin=builtin,
        rows=int(inp.get("rows", 10_000)),
        input_seed=int(inp.get("seed", 1)),
        collection=doc.get("collection", {}) or {},
        grid=grid,
        methods=methods,
        seed=int(doc.get("seed", 1)),
        output=doc.get("output", "out"),
        plot=bool(doc.get("plot", False)),
        nested_outer=int(nested.get("outer", 1000)),
        nested_inner=int(nested.get("inner", 400)),
        markov_overrides=markov,
        options=options,
    )


def _resolve_inputs(config):
    """Materialize the PA dataset, collection spec, and oracle hooks."""
    scenario = exercise = markov_cfg = None
    if config.builtin in BUILTIN_CASE1:
        scenario = BUILTIN_CASE1[config.builtin]
        pa = casestudies.generate_case1_pa(scenario, config.rows, config.input_seed)
        spec = casestudies.case1_collection_spec(scenario)
    elif config.builtin in BUILTIN_CASE2:
        exercise = BUILTIN_CASE2[config.builtin]
        markov_cfg = casestudies.default_markov_config(**config.markov_overrides)
        pa = casestudies.generate_case2_pa(markov_cfg, config.rows, config.input_seed)
        spec = casestudies.case2_collection_spec(exercise)
    else:
        pa = load_pa_dataset(config.dataset)
        spec = None
    if config.collection or spec is None:
        spec = _collection_spec(config, pa, spec)
    return pa, spec, scenario, exercise, markov_cfg


def _collection_spec(config, pa, base):
    doc = dict(config.collection)
    if not doc and base is None:
        raise ValidationError("external datasets need a collection section")
    focal = doc.get("focal", base.focal_indices if base else None)
    if focal is None:
        raise ValidationError("collection.focal is required")
    indices = []
    for item in focal:
        if isinstance(item, str):
            if item not in pa.param_names:
                raise ValidationError(
                    f"focal parameter {item!r} not among {pa.param_names}"
                )
            indices.append(pa.param_names.index(item))
        else:
            indices.append(int(item))
    def inherit(key):
        if key in doc:
            return doc[key]
        if base is not None:
            return getattr(base, key)
        raise ValidationError(f"collection.{key} is required")
    return DataCollectionSpec(
        focal_indices=tuple(indices),
        family=inherit("family"),
        mu0=inherit("mu0"),
        sigma2=inherit("sigma2"),
        n0=inherit("n0"),
        binomial_size=int(doc.get("binomial_size", base.binomial_size if base else 1)),
    )


def run_analysis(config):
    """Execute every requested method on a shared PA dataset.

    Returns ``(curves, evppi_record)``; curves preserve the requested method
    order. All methods see the same dataset and the same per-(seed, n)
    simulation streams, so curves are comparable point by point.
    """
    pa, spec, scenario, exercise, markov_cfg = _resolve_inputs(config)
    curves = []
    evppi_record = None
    for method in config.methods:
        print(f"[evsikit] method={method} grid={config.grid[0]}..{config.grid[-1]}", flush=True)
        if method == "tga":
            curves.append(evsi_curve_tga(pa, spec, config.grid, config.options))
        elif method == "ga":
            curves.append(evsi_curve_ga(pa, spec, config.grid, config.options))
        elif method == "npreg":
            curves.append(evsi_curve_npreg(pa, spec, config.grid, config.seed, config.options))
        elif method == "analytic":
            if scenario is None:
                raise ValidationError(
                    "the analytic method needs a case1-scenario* builtin input"
                )
            curves.append(analytic_evsi_curve(pa, spec, scenario, config.grid, config.seed))
        elif method == "nested-mc":
            curves.append(
                _nested_curve(config, spec, scenario, exercise, markov_cfg)
            )
        elif method == "evppi":
            evppi_record = evppi(pa, spec.focal_indices, config.options)
    if evppi_record is None and config.plot:
        evppi_record = evppi(pa, spec.focal_indices, config.options)
    return curves, evppi_record


def _nested_curve(config, spec, scenario, exercise, markov_cfg):
    if scenario is not None:
        evaluator = casestudies.case1_nested_mc_evaluator(scenario)
    elif exercise is not None:
        evaluator = casestudies.case2_nested_mc_evaluator(markov_cfg, exercise)
    else:
        raise UnsupportedFamilyError(
            "nested-mc needs a builtin input (a benefit model to re-run)"
        )
    evs, ses = [], []
    for n in config.grid:
        print(f"[evsikit] nested-mc n={n}", flush=True)
        e, s = nested_mc_evsi(
            evaluator, spec, n, config.nested_outer, config.nested_inner,
            seed=config.seed + n,
        )
        evs.append(e)
        ses.append(s)
    digest = hashlib.sha1(
        repr(("nested-mc", config.builtin, config.nested_outer, config.nested_inner, config.seed)).encode()
    ).hexdigest()[:12]
    return EvsiCurve(
        method="nested-mc", ns=tuple(config.grid), evsi=tuple(evs), mc_se=tuple(ses), digest=digest
    )


def emit_curves(curves, evppi_record, out_dir, plot=False):
    """Write per-method CSVs, the EVPPI record, and optionally a plot."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for curve in curves:
        path = out / f"evsi_{curve.method}.csv"
        lines = ["method,n,evsi,mc_se"]
        for method, n, e, s in curve.rows():
            lines.append(f"{method},{n},{format(e, '.17g')},{format(s, '.17g')}")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(path)
    if evppi_record is not None:
        path = out / "evppi.csv"
        e, s = evppi_record
        path.write_text(
            "evppi,mc_se\n" + f"{format(e, '.17g')},{format(s, '.17g')}\n", encoding="utf-8"
        )
        written.append(path)
    if plot:
        written.append(_plot(curves, evppi_record, out / "curves.svg"))
    return written


def _plot(curves, evppi_record, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for curve in curves:
        ax.plot(curve.ns, curve.evsi, marker="o", markersize=3, label=curve.method)
    if evppi_record is not None:
        ax.axhline(evppi_record[0], linestyle="--", color="gray", label="evppi")
    ax.set_xlabel("study size n")
    ax.set_ylabel("EVSI")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="evsikit",
        description="Estimate EVSI across study sizes and write curve CSVs.",
    )
    parser.add_argument("--config", type=Path, help="YAML run configuration")
    parser.add_argument(
        "--method", action="append", dest="methods", choices=METHODS,
        help="method to run (repeatable; overrides the config)",
    )
    parser.add_argument("--n-min", type=int, help="grid minimum")
    parser.add_argument("--n-max", type=int, help="grid maximum")
    parser.add_argument("--n-step", type=int, help="grid step")
    parser.add_argument("--seed", type=int, help="simulation seed")
    parser.add_argument("--out", type=str, help="output directory")
    parser.add_argument("--plot", action="store_true", default=None, help="write curves.svg")
    parser.add_argument(
        "--no-variance-adjustment", action="store_true", default=None,
        help="use raw inverse-information conditional variances",
    )
    parser.add_argument("--builtin", type=str, help="builtin input (overrides the config)")
    parser.add_argument("--rows", type=int, help="builtin input rows")
    return parser


def _apply_flags(config, args):
    if args.methods:
        config = replace(config, methods=tuple(args.methods))
    if args.n_min is not None or args.n_max is not None or args.n_step is not None:
        lo = args.n_min if args.n_min is not None else config.grid[0]
        hi = args.n_max if args.n_max is not None else config.grid[-1]
        step = args.n_step if args.n_step is not None else 1
        if lo > hi or step < 1:
            raise ValidationError(f"bad grid flags: min {lo}, max {hi}, step {step}")
        config = replace(config, grid=tuple(range(lo, hi + 1, step)))
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.out is not None:
        config = replace(config, output=args.out)
    if args.plot is not None:
        config = replace(config, plot=True)
    if args.builtin is not None:
        config = replace(config, builtin=args.builtin, dataset=None)
    if args.rows is not None:
        config = replace(config, rows=args.rows)
    if args.no_variance_adjustment:
        config = replace(
            config, options=replace(config.options, variance_adjustment=False)
        )
    return config


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.config is not None:
            with open(args.config, encoding="utf-8") as fh:
                doc = yaml.safe_load(fh)
            config = parse_config(doc)
        else:
            if args.builtin is None:
                print("error: need --config or --builtin", file=sys.stderr)
                return 2
            config = parse_config(
                {"input": {"builtin": args.builtin}, "grid": {"min": 10, "max": 100, "step": 10}}
            )
        config = _apply_flags(config, args)
        curves, record = run_analysis(config)
        written = emit_curves(curves, record, config.output, config.plot)
        for path in written:
            print(f"[evsikit] wrote {path}", flush=True)
        return 0
    except (EvsikitError, OSError) as err:
        print(f"error: {_origin(err)}{err}", file=sys.stderr)
        return 1


def _origin(err):
    """Name the package module and operation that raised, for diagnostics."""
    tb = err.__traceback__
    location = ""
    while tb is not None:
        frame = tb.tb_frame
        module = frame.f_globals.get("__name__", "")
        if module.startswith("evsikit"):
            location = f"{module.split('.')[-1]}.{frame.f_code.co_name}: "
        tb = tb.tb_next
    return location


if __name__ == "__main__":
    sys.exit(main())
