"""Command-line entry point (``sumgp``).

Settings come from the built-in defaults, then ``--config <json>``, then
explicit flags.  Exit codes: 0 ok, 2 configuration error, 3 data error,
4 numerical failure.
"""

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .bounds import bound_report, toy_summarization
from .exceptions import ConfigError, DataError, SumGPError
from .experiments import (FAMILIES, TOY_MS, TOY_THETAS, ExperimentConfig, eta_sweep, fig4_sweep, run_eval,
                          run_table2)
from .hyperopt import FitConfig, fit
from .io import (dump_json, load_csv, model_from_dict, model_to_dict, read_summary_csv, write_summary_csv)
from .kernels import KernelSpec
from .likelihoods import LikelihoodSpec
from .summarize import GridSpec, summarize_grid

log = logging.getLogger("sumgp")

# flag -> ExperimentConfig field
OVERRIDES = {
    "data": "dataset_path", "target": "target_attribute", "inputs": "input_columns", "grid": "grid_cell",
    "kernel": "kernel_family", "likelihood": "likelihood", "n_train": "n_train", "trials": "trials",
    "seed": "seed", "out": "output_dir", "sigma2_fixed": "sigma2_fixed", "poisson_floor": "poisson_floor",
    "target_scale": "target_scale", "workers": "workers", "normalize": "normalize",
}


def build_config(args):
    d = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                d = json.load(fh)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {args.config}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise ConfigError("config JSON must be an object")
    for flag, key in OVERRIDES.items():
        v = getattr(args, flag, None)
        if v is not None:
            d[key] = v
    return ExperimentConfig.from_dict(d)


def _out_path(cfg, name):
    os.makedirs(cfg.output_dir, exist_ok=True)
    return os.path.join(cfg.output_dir, name)


def _write_csv(rows, path, fields=None):
    fields = fields or list(rows[0])
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})


def _dataset(cfg):
    if not cfg.dataset_path:
        raise ConfigError("no dataset given (--data or dataset_path)")
    return load_csv(cfg.dataset_path, cfg.input_columns, cfg.target_attribute, cfg.target_scale)


def _grid(cfg):
    return GridSpec(np.asarray(cfg.bounds, float), cfg.grid_cell)


def cmd_summarize(args, cfg):
    ds = _dataset(cfg)
    s = summarize_grid(ds.X, ds.y, _grid(cfg))
    path = _out_path(cfg, "summary.csv")
    write_summary_csv(s, path)
    print(json.dumps({"m": s.m, "n": s.n, "alpha": s.alpha, "summary": path}, sort_keys=True))


def cmd_fit(args, cfg):
    if args.summary:
        s = read_summary_csv(args.summary)
    else:
        ds = _dataset(cfg)
        s = summarize_grid(ds.X, ds.y, _grid(cfg))
    lik = LikelihoodSpec(cfg.likelihood, cfg.sigma2_fixed or 1.0)
    model = fit(s, lik, FitConfig(family=cfg.kernel_family, fit_sigma2=cfg.sigma2_fixed is None,
                                  poisson_floor=cfg.poisson_floor))
    if not model.result.converged:
        log.warning("optimiser did not converge: %s", model.result.message)
    d = model_to_dict(model)
    path = _out_path(cfg, "model.json")
    dump_json(d, path)
    print(json.dumps({k: d[k] for k in ("kernel", "likelihood", "mean_const", "objective", "converged")}, sort_keys=True))


def cmd_predict(args, cfg):
    try:
        with open(args.model) as fh:
            model = model_from_dict(json.load(fh))
    except FileNotFoundError as exc:
        raise DataError(f"no such model file: {args.model}") from exc
    if not cfg.dataset_path:
        raise ConfigError("no input file given (--data)")
    import pandas as pd

    df = pd.read_csv(cfg.dataset_path, float_precision="round_trip")
    missing = [c for c in cfg.input_columns if c not in df.columns]
    if missing:
        raise DataError(f"input file lacks columns {missing}")
    X = df[list(cfg.input_columns)].to_numpy(float)
    if not np.all(np.isfinite(X)):
        raise DataError("inputs contain non-finite values")
    post = model.posterior(X)
    out = df[list(cfg.input_columns)].copy()
    out["prediction"] = model.likelihood.link(post.mean)
    out["latent_mean"] = post.mean
    out["latent_std"] = post.std
    path = _out_path(cfg, "predictions.csv")
    out.to_csv(path, index=False, float_format="%.17g")
    print(json.dumps({"n": len(out), "predictions": path}))


def _emit_eval(records, agg, cfg, name):
    report = {"config": cfg.to_dict(), "records": records, "aggregate": agg}
    path = _out_path(cfg, name)
    dump_json(report, path)
    print(json.dumps(agg, sort_keys=True, indent=2))


def cmd_eval(args, cfg):
    records, agg = run_eval(_dataset(cfg), cfg)
    _emit_eval(records, agg, cfg, "eval.json")


def cmd_table2(args, cfg):
    records, agg = run_table2(_dataset(cfg), cfg)
    _emit_eval(records, agg, cfg, "table2.json")


def cmd_bounds(args, cfg):
    family = cfg.kernel_family
    spec = KernelSpec(family, args.length_scale, args.signal_variance)
    if cfg.dataset_path:
        ds = _dataset(cfg)
        s = summarize_grid(ds.X, ds.y, _grid(cfg))
        report = bound_report(ds.X, s.omega, s.Z, spec, alpha=s.alpha)
        curve = None
    else:
        X, Z, omega = toy_summarization(args.n, args.m)
        report = bound_report(X, omega, Z, spec)
        curve = eta_sweep(args.n, TOY_MS, (args.length_scale,), (family,))
    dump_json(report.to_dict(), _out_path(cfg, "bounds.json"))
    if curve:
        _write_csv(curve, _out_path(cfg, "eta_curve.csv"), ETA_FIELDS)
    print(report.to_json(sort_keys=True))


ETA_FIELDS = ["family", "theta", "m", "kappa", "lambda1", "lambda2", "xi_star", "eta", "beta", "gamma", "n"]


def cmd_toy_eta(args, cfg):
    rows = eta_sweep(args.n, TOY_MS, TOY_THETAS, FAMILIES)
    path = _out_path(cfg, "eta_sweep.csv")
    _write_csv(rows, path, ETA_FIELDS)
    print(path)


def cmd_toy_fig4(args, cfg):
    rows, agg = fig4_sweep(cfg.trials, cfg.seed, cfg.workers, n=args.n, n_star=args.n)
    path = _out_path(cfg, "fig4.csv")
    _write_csv(agg, path)
    _write_csv(rows, _out_path(cfg, "fig4_trials.csv"))
    print(path)


COMMANDS = {
    "summarize": cmd_summarize, "fit": cmd_fit, "predict": cmd_predict, "eval": cmd_eval,
    "bounds": cmd_bounds, "toy-eta": cmd_toy_eta, "toy-fig4": cmd_toy_fig4, "table2": cmd_table2,
}


def _common(p):
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--data", help="CSV with a header row")
    p.add_argument("--inputs", type=lambda s: tuple(s.split(",")), help="comma-separated input columns")
    p.add_argument("--target", help="target column")
    p.add_argument("--target-scale", type=float, help="multiply the target by this factor")
    p.add_argument("--grid", type=float, help="grid cell size")
    p.add_argument("--kernel", choices=FAMILIES)
    p.add_argument("--likelihood", choices=("gaussian", "poisson"))
    p.add_argument("--n-train", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--sigma2-fixed", type=float, help="keep the Gaussian noise variance fixed")
    p.add_argument("--poisson-floor", type=float, help="replace zero Poisson means by this value")
    p.add_argument("--normalize", choices=("train", "test"))
    p.add_argument("--workers", type=int)


def make_parser():
    parser = argparse.ArgumentParser(prog="sumgp", description="Gaussian process regression from summarised data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        _common(p)
        if name == "fit":
            p.add_argument("--summary", help="summary CSV written by 'summarize'")
        if name == "predict":
            p.add_argument("--model", required=True, help="model JSON written by 'fit'")
        if name in ("bounds", "toy-eta", "toy-fig4"):
            p.add_argument("--n", type=int, default=1000, help="number of toy inputs")
        if name == "bounds":
            p.add_argument("--m", type=int, default=64, help="number of toy representatives")
            p.add_argument("--length-scale", type=float, default=1.0)
            p.add_argument("--signal-variance", type=float, default=1.0)
    return parser


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = build_config(args)
        COMMANDS[args.command](args, cfg)
    except SumGPError as exc:
        print(f"sumgp: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
