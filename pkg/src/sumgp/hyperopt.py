"""Marginal-likelihood hyperparameter fitting with bounded L-BFGS.

Parameters are optimised in log space inside the box [1e-6, 1e6] on the raw
scale, starting from 1 for every parameter.  Objectives are negative log
marginal likelihoods with analytic gradients:

    d(-LML)/dp = 1/2 tr((S^-1 - a a^T) dS/dp),   a = S^-1 r

for S = K + D and centred targets r.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .exceptions import ConfigError, DataError, NumericalError
from .gp import LOG2PI, complete_posterior_gaussian
from .kernels import KernelSpec, as_points, gram_and_log_grads
from .likelihoods import LikelihoodSpec, variance_vector
from .linalg import chol_psd
from .quasi import posterior_q, predict_observable
from .summarize import transform_summary

log = logging.getLogger(__name__)

LOG_LO, LOG_HI = math.log(1e-6), math.log(1e6)
PGTOL = 1e-5
MAXITER = 200
FAILED_VALUE = 1e25
MODES = ("Q", "E")


@dataclass(frozen=True)
class HyperParams:
    log_theta: float = 0.0
    log_signal_var: float = 0.0
    log_noise_var: float = 0.0
    log_sigma2: float = None  # Gaussian likelihood only

    @classmethod
    def from_vector(cls, x):
        x = [float(v) for v in x]
        return cls(*x[:3], x[3] if len(x) > 3 else None)

    def to_vector(self):
        v = [self.log_theta, self.log_signal_var, self.log_noise_var]
        if self.log_sigma2 is not None:
            v.append(self.log_sigma2)
        return np.array(v)

    def kernel(self, family):
        return KernelSpec(family, math.exp(self.log_theta), math.exp(self.log_signal_var), math.exp(self.log_noise_var))

    @property
    def sigma2(self):
        return None if self.log_sigma2 is None else math.exp(self.log_sigma2)

    def to_dict(self):
        d = {"theta": math.exp(self.log_theta), "signal_variance": math.exp(self.log_signal_var),
             "noise_variance": math.exp(self.log_noise_var)}
        if self.log_sigma2 is not None:
            d["sigma2"] = self.sigma2
        return d


@dataclass
class OptResult:
    params: HyperParams
    objective: float
    iterations: int
    converged: bool
    gradient_norm: float
    message: str = ""
    trace: list = field(default_factory=list)


def _neg_lml_and_grad(K, dKs, d, dds, r, extra_value=0.0, extra_grads=None):
    """-log N(r; 0, K + diag(d)) and its gradient.

    ``dKs`` are derivatives of K, ``dds`` derivatives of the diagonal d (or
    None), one entry per parameter.
    """
    S = K + np.diag(d)
    try:
        ch = chol_psd(S)
    except NumericalError:
        return FAILED_VALUE, np.zeros(len(dKs))
    a = ch.solve(r)
    value = 0.5 * r.shape[0] * LOG2PI + 0.5 * ch.logdet() + 0.5 * r @ a + extra_value
    Sinv = ch.inverse()
    M = Sinv - np.outer(a, a)
    grad = np.empty(len(dKs))
    for i, (dK, dd) in enumerate(zip(dKs, dds)):
        g = 0.0
        if dK is not None:
            g += np.sum(M * dK)
        if dd is not None:
            g += np.sum(np.diag(M) * dd)
        grad[i] = 0.5 * g
    if extra_grads is not None:
        grad = grad + extra_grads
    if not (np.isfinite(value) and np.all(np.isfinite(grad))):
        return FAILED_VALUE, np.zeros(len(dKs))
    return float(value), grad


def objective_and_gradient(params, summary_u, likelihood, mode="Q", family="gaussian", mean_const=0.0):
    """Negative summary log marginal likelihood and its gradient in log-parameters.

    ``mode="Q"`` uses the quasi-likelihood; ``mode="E"`` the exact Gaussian
    input-replaced marginal likelihood (needs ``svar``).  For a Gaussian
    likelihood ``params.log_sigma2`` must be set; it is the variance used in V.
    """
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}")
    if isinstance(params, np.ndarray) or isinstance(params, (list, tuple)):
        params = HyperParams.from_vector(params)
    gaussian = likelihood.is_gaussian
    if mode == "E" and not gaussian:
        raise ConfigError("the exact aggregated likelihood E exists only for the Gaussian likelihood")
    if gaussian and params.log_sigma2 is None:
        raise ConfigError("Gaussian likelihood needs log_sigma2")
    if not gaussian and summary_u.space != "u":
        raise DataError("Poisson summaries must be transformed to latent space first")
    spec = params.kernel(family)
    K, dKs = gram_and_log_grads(spec, summary_u.Z)
    counts = summary_u.counts.astype(float)
    r = summary_u.ybar - mean_const
    dKs = list(dKs)
    dds = [None, None, None]
    if gaussian:
        s2 = params.sigma2
        d = s2 / counts
        dKs.append(None)
        dds.append(d)
    else:
        d = variance_vector(summary_u.ybar, counts, likelihood)
    extra_value, extra_grads = 0.0, None
    if mode == "E":
        m = summary_u.m
        N = counts.sum()
        ss = float(np.sum(counts * summary_u.svar))
        # -E = -Q - loglik(ybar) - (m/2) log 2pi - 1/2 log|V|
        extra_value = (0.5 * N * (LOG2PI + math.log(s2)) + ss / (2 * s2)
                       - 0.5 * m * LOG2PI - 0.5 * float(np.sum(np.log(d))))
        extra_grads = np.array([0.0, 0.0, 0.0, 0.5 * N - ss / (2 * s2) - 0.5 * m])
    return _neg_lml_and_grad(K, dKs, d, dds, r, extra_value, extra_grads)


def complete_objective_and_gradient(params, X, y, family="gaussian", mean_const=0.0):
    """Negative complete-data Gaussian log marginal likelihood and gradient."""
    if isinstance(params, np.ndarray) or isinstance(params, (list, tuple)):
        params = HyperParams.from_vector(params)
    if params.log_sigma2 is None:
        raise ConfigError("complete-data objective needs log_sigma2")
    X = as_points(X, "X")
    K, dKs = gram_and_log_grads(params.kernel(family), X)
    d = np.full(X.shape[0], params.sigma2)
    return _neg_lml_and_grad(K, list(dKs) + [None], d, [None, None, None, d],
                             np.asarray(y, float) - mean_const)


def minimize_bounded(f, x0, bounds, pgtol=PGTOL, maxiter=MAXITER):
    """Minimise ``f(x) -> (value, grad)`` inside a box with L-BFGS-B.

    Never raises on non-convergence: the best iterate is returned with
    ``converged=False``.  ``trace`` holds the objective after each iteration.
    """
    x0 = np.asarray(x0, dtype=float)
    bounds = [tuple(b) for b in bounds]
    lo = np.array([b[0] for b in bounds], dtype=float)
    hi = np.array([b[1] for b in bounds], dtype=float)
    if x0.shape != lo.shape or np.any(x0 < lo) or np.any(x0 > hi):
        raise ConfigError("x0 must lie inside the bounds")
    best = {"x": x0.copy(), "f": math.inf, "g": None}

    def wrapped(x):
        v, g = f(x)
        if v < best["f"]:
            best.update(x=np.array(x, copy=True), f=float(v), g=np.array(g, copy=True))
        return v, g

    trace = []
    res = optimize.minimize(
        wrapped, x0, jac=True, method="L-BFGS-B", bounds=bounds,
        callback=lambda intermediate_result: trace.append(float(intermediate_result.fun)),
        options={"gtol": pgtol, "maxiter": maxiter, "ftol": 1e-15, "maxls": 50},
    )
    x, fx = res.x, float(res.fun)
    g = np.asarray(res.jac, dtype=float)
    if best["f"] < fx:
        x, fx, g = best["x"], best["f"], best["g"]
    pg = x - np.clip(x - g, lo, hi)
    pg_norm = float(np.max(np.abs(pg))) if pg.size else 0.0
    converged = bool(res.success) or pg_norm < pgtol
    return OptResult(x, fx, int(res.nit), converged, pg_norm, str(res.message), trace)


@dataclass
class FitConfig:
    family: str = "gaussian"
    mode: str = None  # None: "E" for Gaussian, "Q" otherwise
    fit_sigma2: bool = True
    pgtol: float = PGTOL
    maxiter: int = MAXITER
    poisson_floor: float = None


@dataclass
class FittedModel:
    kernel: KernelSpec
    likelihood: LikelihoodSpec
    mean_const: float
    summary_u: object
    result: OptResult
    mode: str

    def posterior(self, X_star, full_cov=False):
        return posterior_q(self.summary_u, X_star, self.kernel, self.likelihood, self.mean_const, full_cov=full_cov)

    def predict(self, X_star):
        return predict_observable(self.posterior(X_star), self.likelihood)

    @property
    def log_marginal_likelihood(self):
        return -self.result.objective

    def to_dict(self):
        return {
            "kernel": self.kernel.to_dict(),
            "likelihood": self.likelihood.to_dict(),
            "mean_const": self.mean_const,
            "mode": self.mode,
            "objective": self.result.objective,
            "iterations": self.result.iterations,
            "converged": self.result.converged,
            "gradient_norm": self.result.gradient_norm,
        }


def _observation_mean(summary, likelihood):
    ybar = summary.ybar if summary.space == "y" else likelihood.link(summary.ybar)
    return float(np.sum(summary.counts * ybar) / summary.n)


def _run(objective, free, x_fixed, config):
    x_full = np.array(x_fixed, dtype=float)
    free = np.asarray(free, dtype=bool)

    def f(x):
        full = x_full.copy()
        full[free] = x
        v, g = objective(full)
        return v, g[free]

    res = minimize_bounded(f, x_full[free], [(LOG_LO, LOG_HI)] * int(free.sum()), config.pgtol, config.maxiter)
    full = x_full.copy()
    full[free] = res.params
    res.params = HyperParams.from_vector(full)
    if not res.converged:
        log.warning("hyperparameter optimisation did not converge: %s", res.message)
    return res


def fit(summary, likelihood, config=None):
    """Fit kernel hyperparameters (and the Gaussian sigma2) to a summary.

    The mean function is the constant ``g^{-1}`` of the count-weighted mean of
    the summary statistics.
    """
    config = config or FitConfig()
    gaussian = likelihood.is_gaussian
    mode = config.mode or ("E" if gaussian else "Q")
    if mode == "E" and not gaussian:
        raise ConfigError("mode 'E' requires a Gaussian likelihood")
    mean_const = float(likelihood.inverse_link(_observation_mean(summary, likelihood)))
    summary_u = transform_summary(summary, likelihood, config.poisson_floor)
    x0 = np.zeros(4 if gaussian else 3)
    free = np.ones_like(x0, dtype=bool)
    if gaussian:
        x0[3] = math.log(likelihood.sigma2)
        # under Q the right-hand side of the Laplace identity depends on sigma2
        free[3] = config.fit_sigma2 and mode == "E"

    def objective(x):
        return objective_and_gradient(x, summary_u, likelihood, mode, config.family, mean_const)

    res = _run(objective, free, x0, config)
    lik = LikelihoodSpec("gaussian", res.params.sigma2) if gaussian else likelihood
    return FittedModel(res.params.kernel(config.family), lik, mean_const, summary_u, res, mode)


def fit_complete(X, y, config=None, sigma2=1.0):
    """Reference fit of an exact GP with Gaussian likelihood on complete data."""
    config = config or FitConfig()
    X = as_points(X, "X")
    y = np.asarray(y, float).ravel()
    mean_const = float(np.mean(y))
    x0 = np.zeros(4)
    x0[3] = math.log(sigma2)
    free = np.array([True, True, True, config.fit_sigma2])

    def objective(x):
        return complete_objective_and_gradient(x, X, y, config.family, mean_const)

    res = _run(objective, free, x0, config)
    return CompleteModel(res.params.kernel(config.family), res.params.sigma2, mean_const, X, y, res)


@dataclass
class CompleteModel:
    kernel: KernelSpec
    sigma2: float
    mean_const: float
    X: np.ndarray
    y: np.ndarray
    result: OptResult

    def posterior(self, X_star, full_cov=False):
        return complete_posterior_gaussian(self.X, self.y, X_star, self.kernel, self.sigma2, self.mean_const, full_cov)

    def predict(self, X_star):
        return self.posterior(X_star).mean

