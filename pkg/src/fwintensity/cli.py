"""Batch front door: simulate, fit, evaluate, and benchmark over files.

Exit codes: 0 success, 2 usage, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .backend import BACKEND
from .benchmark import dict_config_for, hawkes_aic_select, run_benchmark
from .dictionary import DictionaryConfig
from .errors import (
    CholeskyFailure,
    DegenerateDenominator,
    DimensionMismatch,
    EmptyUpdates,
    EmptyValidation,
    ExplosionGuard,
    FwIntensityError,
    InvalidUniform,
    NoJumps,
    NonFiniteLikelihood,
    NonMonotoneTimes,
    NumericOverflow,
    OutOfRange,
    ZeroVariance,
)
from .evaluate import oos_lr_test, time_rescaling_residuals
from .fw import FitConfig, fit
from .hawkes import HawkesParams
from .likelihood import AdditiveModel
from .selection import aic_select, validation_select
from .sim import (
    GAMMA_STREAM,
    SimDesign,
    centering_gamma,
    rng_stream,
    simulate_cox,
    simulate_hawkes_cov,
)
from .timeline import (
    PreprocessTransform,
    read_timeline,
    window,
    write_covariates_csv,
    write_events_csv,
)

DATA_ERRORS = (
    OSError, NonMonotoneTimes, DimensionMismatch, EmptyUpdates, OutOfRange,
    EmptyValidation, NoJumps,
)
NUMERIC_ERRORS = (
    NumericOverflow, NonFiniteLikelihood, ExplosionGuard, InvalidUniform,
    CholeskyFailure, DegenerateDenominator,
)


def _write_json(path, obj, required=()) -> None:
    missing = set(required) - obj.keys()
    if missing:
        raise FwIntensityError(f"output JSON missing keys: {sorted(missing)}")
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _parse_pair(text, flag):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"{flag} expects 'a,b'")
    return float(parts[0]), float(parts[1])


def validate_model_dict(d: dict) -> None:
    """Schema self-check before a model file is written."""
    required = {"version", "preprocessing", "f0", "budget", "atoms",
                "weights_scheme"}
    missing = required - d.keys()
    if missing:
        raise FwIntensityError(f"model JSON missing keys: {sorted(missing)}")
    pre = d["preprocessing"]
    if set(pre) != {"caps", "scales"} or len(pre["caps"]) != len(pre["scales"]):
        raise FwIntensityError("model JSON has a malformed preprocessing block")
    for rec in d["atoms"]:
        if set(rec) != {"family", "params", "coef"}:
            raise FwIntensityError("model JSON has a malformed atom record")
    if "hawkes" in d and set(d["hawkes"]) != {"c", "a"}:
        raise FwIntensityError("model JSON has a malformed hawkes block")


def model_payload(model: AdditiveModel, transform: PreprocessTransform,
                  hawkes: HawkesParams | None = None) -> dict:
    payload = {"version": __version__, "preprocessing": transform.to_dict()}
    payload.update(model.to_dict())
    if hawkes is not None:
        payload["hawkes"] = hawkes.to_dict()
    validate_model_dict(payload)
    return payload


def load_model(path):
    d = json.loads(Path(path).read_text())
    validate_model_dict(d)
    model = AdditiveModel.from_dict(d)
    transform = PreprocessTransform.from_dict(d["preprocessing"])
    hawkes = None
    if "hawkes" in d:
        hawkes = HawkesParams(d["hawkes"]["c"], d["hawkes"]["a"])
    return model, transform, hawkes


def _add_design_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--K", type=int, default=10, help="covariate dimension")
    p.add_argument("--rho", type=float, default=0.0,
                   help="Toeplitz correlation, in [0, 1)")
    p.add_argument("--truth", choices=["linear", "convex"], default="linear")
    p.add_argument("--profile", choices=["fewlarge", "manysmall", "null"],
                   default="fewlarge")
    p.add_argument("--dynamics", choices=["iid", "var1"], default=None,
                   help="covariate dynamics (default: var1 with --hawkes, else iid)")
    p.add_argument("--hawkes", type=lambda s: _parse_pair(s, "--hawkes"),
                   default=None, metavar="C0,A0",
                   help="self-excitation baseline and decay")
    p.add_argument("--seed", type=int, default=0)


def _design_from_args(args, n: int) -> SimDesign:
    dynamics = args.dynamics
    if dynamics is None:
        dynamics = "var1" if args.hawkes else "iid"
    return SimDesign(
        K=args.K, rho=args.rho, truth=args.truth, profile=args.profile,
        dynamics=dynamics, n=n, hawkes=args.hawkes, seed=args.seed,
    )


def cmd_simulate(args) -> int:
    design = _design_from_args(args, args.n)
    gamma, gamma_se = 0.0, 0.0
    if design.hawkes is not None:
        gamma, gamma_se = centering_gamma(
            design, args.gamma_draws, rng_stream(design.seed, GAMMA_STREAM)
        )
        timeline = simulate_hawkes_cov(design, gamma,
                                       rng=rng_stream(design.seed, 0))
    else:
        timeline = simulate_cox(design, rng=rng_stream(design.seed, 0))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_events_csv(out / "events.csv", timeline.jump_times)
    write_covariates_csv(out / "covariates.csv", timeline.update_times,
                         timeline.update_values)
    manifest = {
        "design": design.to_dict(),
        "horizon": float(timeline.horizon),
        "gamma": gamma,
        "gamma_se": gamma_se,
        "gamma_draws": args.gamma_draws if design.hawkes else 0,
        "version": __version__,
        "files": {"events": "events.csv", "covariates": "covariates.csv"},
    }
    _write_json(out / "manifest.json", manifest,
                required=("design", "horizon", "gamma", "files"))
    return 0


KNOWN_FAMILIES = ("intercept", "linear", "monomial", "trig", "sigmoid",
                  "bernstein", "hawkes")


def _dict_config_from_args(args) -> DictionaryConfig:
    if args.dict is not None:
        return dict_config_for(args.dict)
    families = tuple(f.strip() for f in args.families.split(",") if f.strip())
    scheme = "empirical_l2" if args.weights == "l2" else "unit"
    return DictionaryConfig(families=families, weight_scheme=scheme)


def cmd_fit(args) -> int:
    timeline = read_timeline(args.events, args.covariates, args.horizon)
    if args.no_winsorize:
        transform = PreprocessTransform.identity(timeline.dim)
        scaled = timeline
    else:
        from .timeline import winsorize_standardize

        scaled, transform = winsorize_standardize(timeline, args.winsorize_q)
    dcfg = _dict_config_from_args(args)
    fcfg = FitConfig(
        budget=args.B if args.B is not None else args.grid[0],
        iterations=args.iters,
        step_rule="deterministic" if args.no_line_search else "line_search",
        f0_rule="zero" if args.f0 == "zero" else "log_rate",
        seed=args.seed,
    )
    hawkes_params = None
    trace = None
    report = None
    if args.hawkes_joint is not None:
        grid = args.grid if args.B is None else [args.B]
        _, hawkes_params, model = hawkes_aic_select(
            scaled, grid, dcfg, fcfg, init=args.hawkes_joint
        )
    elif args.B is not None:
        from dataclasses import replace

        model, trace = fit(scaled, dcfg, replace(fcfg, budget=args.B))
    elif args.select == "aic":
        _, report = aic_select(scaled, args.grid, dcfg, fcfg)
        model, trace = report.model, report.trace
    else:
        t_split = (1.0 - args.valid_frac) * scaled.horizon
        train = window(scaled, 0.0, t_split)
        valid = window(scaled, t_split, scaled.horizon)
        _, report = validation_select(train, valid, args.grid, dcfg, fcfg)
        model, trace = report.model, report.trace
    _write_json(args.out, model_payload(model, transform, hawkes_params))
    if args.select_report and report is not None:
        _write_json(args.select_report, report.to_dict())
    if args.trace and trace is not None:
        Path(args.trace).write_text(trace.to_jsonl() + "\n")
    return 0


def cmd_evaluate(args) -> int:
    model_a, tf_a, hawkes_a = load_model(args.model_a)
    model_b, tf_b, _ = load_model(args.model_b)
    raw = read_timeline(args.events, args.covariates, args.horizon)
    if len(tf_a.caps) != raw.dim or len(tf_b.caps) != raw.dim:
        raise DimensionMismatch(
            f"models expect {len(tf_a.caps)}/{len(tf_b.caps)} covariates, "
            f"data has {raw.dim}"
        )
    tl_a = tf_a.apply(raw)
    tl_b = tf_b.apply(raw)
    report = {"version": __version__, "S": float(raw.horizon)}
    try:
        result = oos_lr_test(model_a, model_b, tl_a, timeline_gp=tl_b)
        report["lr_test"] = result.to_dict()
        report["zero_variance"] = False
    except ZeroVariance as exc:
        print(f"warning: {exc}", file=sys.stderr)
        report["lr_test"] = None
        report["zero_variance"] = True
    if args.residuals:
        res = time_rescaling_residuals(model_a, tl_a, hawkes_a)
        report["time_rescaling"] = res.to_dict()
    _write_json(args.out, report, required=("lr_test", "zero_variance", "S"))
    return 0


def cmd_benchmark(args) -> int:
    design = _design_from_args(args, args.n_total)
    dict_names = [d.strip() for d in args.dicts.split(",") if d.strip()]
    fcfg = FitConfig(
        budget=args.grid[0],
        iterations=args.iters,
        step_rule="deterministic" if args.no_line_search else "line_search",
        seed=args.seed,
    )
    report = run_benchmark(
        design, args.n_train, dict_names, args.grid, fcfg,
        args.replications, jobs=args.jobs, gamma_draws=args.gamma_draws,
    )
    report["version"] = __version__
    _write_json(args.out, report,
                required=("design", "results", "replications"))
    return 0


def cmd_backend_bench(args) -> int:
    from . import _kernels_py
    from .backend import kernels

    rng = np.random.default_rng(0)
    n = args.size
    fs0 = rng.normal(size=n)
    fs1 = rng.normal(size=n)
    w = rng.uniform(0.1, 1.0, size=n)
    rows = []
    for name, mod in [("active", kernels), ("python", _kernels_py)]:
        t0 = time.perf_counter()
        for _ in range(args.repeat):
            rho, val = mod.golden_rho(1.0, 2.0, fs0, fs1, w)
        dt = (time.perf_counter() - t0) / args.repeat
        rows.append((name, mod.BACKEND, rho, val, dt))
    ref = rows[-1]
    print(f"golden_rho on {n} segments, mean of {args.repeat} runs:")
    for name, backend, rho, val, dt in rows:
        print(f"  {name:7s} ({backend:7s}) {dt * 1e6:10.1f} us  "
              f"rho={rho:.9f} L={val:.9f}")
    if abs(rows[0][3] - ref[3]) > 1e-9:
        raise NonFiniteLikelihood("backends disagree on the line search")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fwintensity",
        description="Sparse additive log-intensity estimation "
                    f"(kernel backend: {BACKEND})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic sample")
    _add_design_flags(p)
    p.add_argument("--n", type=int, default=1100, help="number of jumps")
    p.add_argument("--gamma-draws", type=int, default=1_000_000)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a model from CSV files")
    p.add_argument("--events", required=True)
    p.add_argument("--covariates", required=True)
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--out", default="model.json")
    p.add_argument("--trace", default=None, help="JSONL iteration trace path")
    p.add_argument("--B", type=float, default=None, help="fixed l1 budget")
    p.add_argument("--grid", type=lambda s: [float(x) for x in s.split(",")],
                   default=[1.0, 4.0, 8.0, 16.0])
    p.add_argument("--select", choices=["aic", "validation"], default="aic")
    p.add_argument("--select-report", default=None,
                   help="write per-budget selection diagnostics here")
    p.add_argument("--valid-frac", type=float, default=0.5)
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--no-line-search", action="store_true")
    p.add_argument("--families", default="intercept,linear")
    p.add_argument("--dict", choices=["lin", "poly"], default=None,
                   help="dictionary preset (overrides --families)")
    p.add_argument("--weights", choices=["unit", "l2"], default="l2")
    p.add_argument("--f0", choices=["zero", "lograte"], default="lograte")
    p.add_argument("--winsorize-q", type=float, default=0.95)
    p.add_argument("--no-winsorize", action="store_true")
    p.add_argument("--hawkes-joint", type=lambda s: _parse_pair(s, "--hawkes-joint"),
                   default=None, metavar="C,A",
                   help="fit the self-exciting joint model from this start")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("evaluate", help="out-of-sample forecast comparison")
    p.add_argument("--model-a", required=True)
    p.add_argument("--model-b", required=True)
    p.add_argument("--events", required=True)
    p.add_argument("--covariates", required=True)
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--residuals", action="store_true",
                   help="include time-rescaling residual diagnostics")
    p.add_argument("--out", default="report.json")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("benchmark", help="replicated simulate/fit/loss summary")
    _add_design_flags(p)
    p.add_argument("--n-train", type=int, default=100)
    p.add_argument("--n-total", type=int, default=1100)
    p.add_argument("--dicts", default="lin")
    p.add_argument("--grid", type=lambda s: [float(x) for x in s.split(",")],
                   default=[1.0, 4.0, 8.0, 16.0])
    p.add_argument("--replications", type=int, default=200)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--no-line-search", action="store_true")
    p.add_argument("--gamma-draws", type=int, default=200_000)
    p.add_argument("--out", default="report.json")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("backend-bench",
                       help="compare compiled and pure-python kernels")
    p.add_argument("--size", type=int, default=200)
    p.add_argument("--repeat", type=int, default=50)
    p.set_defaults(func=cmd_backend_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "rho", None) is not None and not 0.0 <= args.rho < 1.0:
        parser.error("--rho must lie in [0, 1)")
    if getattr(args, "valid_frac", None) is not None and not 0.0 < args.valid_frac < 1.0:
        parser.error("--valid-frac must lie in (0, 1)")
    if getattr(args, "families", None) is not None:
        unknown = [f.strip() for f in args.families.split(",")
                   if f.strip() and f.strip() not in KNOWN_FAMILIES]
        if unknown:
            parser.error(f"--families has unknown names {unknown}; "
                         f"choose from {', '.join(KNOWN_FAMILIES)}")
    try:
        return args.func(args)
    except DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NUMERIC_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except FwIntensityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
