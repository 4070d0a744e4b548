"""Seeded experiment pipelines: the 1-D toy studies and the spatial evaluation.

Every trial derives its generator from ``seed + trial_index`` so results do
not depend on the number of workers.
"""

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .bounds import bound_report, toy_summarization
from .exceptions import ConfigError, DataError
from .gp import complete_lml_gaussian, complete_posterior_gaussian
from .hyperopt import FitConfig, fit, fit_complete
from .io import CALIFORNIA_BOUNDS, CALIFORNIA_INPUTS, CALIFORNIA_TARGET
from .kernels import KernelSpec, gram
from .likelihoods import LikelihoodSpec
from .linalg import chol_psd
from .quasi import lml_Q, gaussian_loglik_at_means, posterior_q
from .summarize import GridSpec, SummarizedData, summarize, summarize_grid

TOY_MS = (2, 4, 8, 16, 32, 64, 128, 256)
TOY_THETAS = (0.1, 1.0, 10.0)
FAMILIES = ("laplacian", "gaussian")
TABLE2_GRIDS = (1.6, 0.8, 0.4, 0.2, 0.1, 0.05)
LOG2PI = math.log(2 * math.pi)


def _map(fn, items, workers):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def eta_sweep(n=1000, ms=TOY_MS, thetas=TOY_THETAS, families=FAMILIES):
    """Error-scale diagnostics on equispaced 1-D inputs for every (family, theta, m)."""
    rows = []
    for fam in families:
        for theta in thetas:
            spec = KernelSpec(fam, theta)
            for m in ms:
                X, Z, omega = toy_summarization(n, m)
                r = bound_report(X, omega, Z, spec)
                rows.append({"family": fam, "theta": theta, **r.to_dict()})
    return rows


def _toy_summary(X, y, Z, omega):
    ybar, svar, counts = summarize(y, omega, Z.shape[0])
    return SummarizedData(Z, ybar, svar, counts, omega=omega, space="u")


def aggregated_lml_dense(Z, omega, y, spec, sigma2, mean_const=0.0):
    """log N(y; 0, W K_uu W' + sigma2 I), the input-replaced marginal
    likelihood evaluated on the complete outputs."""
    KW = gram(spec, Z, add_noise=True)[np.ix_(omega, omega)]
    KW[np.diag_indices_from(KW)] += sigma2
    ch = chol_psd(KW)
    a = ch.half_solve(np.asarray(y, float) - mean_const)
    return float(-0.5 * len(a) * LOG2PI - 0.5 * ch.logdet() - 0.5 * a @ a)


def fig4_trial(trial, seed=0, n=1000, n_star=1000, ms=TOY_MS, thetas=TOY_THETAS, families=FAMILIES,
               check_dense=True):
    """One trial of the toy comparison between summaries and complete data.

    Returns rows with ``abs_dlml`` = |Q + log p(y|Wu)|_{u=ybar} + (m/2) log 2pi
    + 1/2 log|V| - L| (input-replacement error of the marginal likelihood),
    ``laplace_gap`` = the same expression minus the dense input-replaced
    marginal likelihood (zero for the Gaussian likelihood), and ``rmse``
    between the complete-data and summary posterior means.
    """
    rng = np.random.default_rng(seed + trial)
    X = np.linspace(0, 2 * np.pi, n)[:, None]
    y = np.sin(X[:, 0]) + rng.standard_normal(n)
    Xs = rng.uniform(0, 2 * np.pi, n_star)[:, None]
    lik = LikelihoodSpec("gaussian", 1.0)
    rows = []
    for fam in families:
        for theta in thetas:
            spec = KernelSpec(fam, theta)
            L = complete_lml_gaussian(X, y, spec, 1.0)
            mu_full = complete_posterior_gaussian(X, y, Xs, spec, 1.0, full_cov=False).mean
            for m in (m for m in ms if m <= n):
                _, Z, omega = toy_summarization(n, m)
                s = _toy_summary(X, y, Z, omega)
                v = 1.0 / s.counts
                approx = (lml_Q(s, spec, lik) + gaussian_loglik_at_means(s, 1.0)
                          + 0.5 * m * LOG2PI + 0.5 * float(np.sum(np.log(v))))
                mu_q = posterior_q(s, Xs, spec, lik, full_cov=False).mean
                row = {"trial": trial, "family": fam, "theta": theta, "m": m,
                       "abs_dlml": abs(approx - L),
                       "rmse": float(np.sqrt(np.mean((mu_full - mu_q) ** 2)))}
                if check_dense:
                    row["laplace_gap"] = abs(approx - aggregated_lml_dense(Z, omega, y, spec, 1.0))
                rows.append(row)
    return rows


def fig4_sweep(trials=100, seed=0, workers=1, **kw):
    per_trial = _map(_Fig4Job(seed, kw), range(trials), workers)
    rows = [r for block in per_trial for r in block]
    return rows, aggregate_rows(rows, ("family", "theta", "m"), [k for k in ("abs_dlml", "rmse", "laplace_gap") if k in rows[0]])


@dataclass
class _Fig4Job:
    seed: int
    kw: dict

    def __call__(self, trial):
        return fig4_trial(trial, self.seed, **self.kw)


def aggregate_rows(rows, keys, metrics):
    groups = {}
    for r in rows:
        groups.setdefault(tuple(r[k] for k in keys), []).append(r)
    out = []
    for key, rs in groups.items():
        agg = dict(zip(keys, key))
        agg["trials"] = len(rs)
        for mname in metrics:
            v = np.array([r[mname] for r in rs], dtype=float)
            agg[f"{mname}_mean"] = float(v.mean())
            agg[f"{mname}_std"] = float(v.std(ddof=1)) if v.size > 1 else 0.0
            agg[f"{mname}_min"] = float(v.min())
            agg[f"{mname}_max"] = float(v.max())
        out.append(agg)
    return out


@dataclass
class ExperimentConfig:
    dataset_path: str = None
    target_attribute: str = CALIFORNIA_TARGET
    input_columns: tuple = CALIFORNIA_INPUTS
    grid_cell: float = 0.4
    bounds: tuple = CALIFORNIA_BOUNDS
    likelihood: str = "gaussian"
    kernel_family: str = "gaussian"
    n_train: int = 1000
    trials: int = 1
    seed: int = 0
    output_dir: str = "."
    normalize: str = "test"  # "train" | "test"
    compare_complete: bool = False
    sigma2_fixed: float = None
    poisson_floor: float = None
    target_scale: float = 1.0
    workers: int = 1
    grids: tuple = TABLE2_GRIDS
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.grid_cell > 0:
            raise ConfigError("grid_cell must be positive")
        if self.normalize not in ("train", "test"):
            raise ConfigError("normalize must be 'train' or 'test'")
        if self.n_train < 1:
            raise ConfigError("n_train must be >= 1")
        LikelihoodSpec(self.likelihood)
        KernelSpec(self.kernel_family)

    @classmethod
    def from_dict(cls, d):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        for k in ("input_columns", "grids"):
            if k in d and d[k] is not None:
                d[k] = tuple(d[k])
        if "bounds" in d and d["bounds"] is not None:
            d["bounds"] = tuple(tuple(b) for b in d["bounds"])
        return cls(**d)

    def to_dict(self):
        return asdict(self)


def split(dataset, n_train, rng):
    n = dataset.n
    if not 0 < n_train < n:
        raise DataError(f"cannot split {n} rows into {n_train} training rows and a non-empty test set")
    perm = rng.permutation(n)
    return dataset.subset(perm[:n_train]), dataset.subset(perm[n_train:])


def normalized_rmse(pred, ref, scale):
    if not scale > 0:
        raise DataError("normalisation scale must be positive")
    return float(np.sqrt(np.mean((np.asarray(pred) - np.asarray(ref)) ** 2)) / scale)


def eval_trial(dataset, config, trial, grid_cells=None):
    """Shuffle, split, summarise, fit, predict.  One record per grid size."""
    rng = np.random.default_rng(config.seed + trial)
    train, test = split(dataset, config.n_train, rng)
    lik = LikelihoodSpec(config.likelihood, config.sigma2_fixed or 1.0)
    fcfg = FitConfig(family=config.kernel_family, fit_sigma2=config.sigma2_fixed is None,
                     poisson_floor=config.poisson_floor)
    complete_mean = None
    complete_info = {}
    if config.compare_complete:
        if not lik.is_gaussian:
            raise ConfigError("the complete-data reference needs the Gaussian likelihood")
        t0 = time.perf_counter()
        cm = fit_complete(train.X, train.y, fcfg, sigma2=config.sigma2_fixed or 1.0)
        complete_mean = cm.predict(test.X)
        complete_info = {"complete_kernel": cm.kernel.to_dict(), "complete_sigma2": cm.sigma2,
                         "complete_seconds": time.perf_counter() - t0}
    records = []
    for cell in grid_cells or (config.grid_cell,):
        t0 = time.perf_counter()
        grid = GridSpec(np.asarray(config.bounds, float), cell)
        summary = summarize_grid(train.X, train.y, grid)
        model = fit(summary, lik, fcfg)
        pred = model.predict(test.X)
        rec = {
            "trial": trial, "grid": cell, "m": summary.m, "n_train": train.n, "n_test": test.n,
            "objective": model.result.objective, "converged": model.result.converged,
            "kernel": model.kernel.to_dict(), "likelihood": model.likelihood.to_dict(),
            "mean_const": model.mean_const,
            "pred_rmse": normalized_rmse(pred, test.y, np.std(test.y if config.normalize == "test" else train.y)),
            "seconds": time.perf_counter() - t0,
        }
        if complete_mean is not None:
            mu_q = model.posterior(test.X).mean
            rec["approx_rmse"] = normalized_rmse(mu_q, complete_mean, np.std(train.y))
            rec.update(complete_info)
        records.append(rec)
    return records


@dataclass
class _EvalJob:
    dataset: object
    config: ExperimentConfig
    grids: tuple

    def __call__(self, trial):
        return eval_trial(self.dataset, self.config, trial, self.grids)


def run_eval(dataset, config, grid_cells=None):
    """Per-trial records plus one aggregate per grid size."""
    blocks = _map(_EvalJob(dataset, config, grid_cells), range(config.trials), config.workers)
    records = [r for b in blocks for r in b]
    metrics = [k for k in ("pred_rmse", "approx_rmse") if k in records[0]]
    return records, aggregate_rows(records, ("grid",), metrics)


def run_table2(dataset, config):
    cfg = replace(config, compare_complete=True, likelihood="gaussian", normalize="train")
    return run_eval(dataset, cfg, tuple(cfg.grids))
