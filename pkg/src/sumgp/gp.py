"""Exact complete-data GP regression and the Laplace-aggregated posterior.

The complete-data routines are the reference the summarised model is judged
against.  Everything works on centred outputs: ``mean_const`` is removed
before the algebra and added back to predictive means.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, DataError
from .kernels import as_points, gram
from .likelihoods import variance_vector
from .linalg import chol_psd

LOG2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class GaussianPosterior:
    mean: np.ndarray
    covariance: np.ndarray = None
    variance: np.ndarray = None

    def __post_init__(self):
        if self.covariance is not None:
            C = 0.5 * (self.covariance + self.covariance.T)
            object.__setattr__(self, "covariance", C)
            object.__setattr__(self, "variance", np.diag(C).copy())

    @property
    def std(self):
        return np.sqrt(np.maximum(self.variance, 0.0))


def _centered(y, mean_const):
    return np.asarray(y, dtype=float).ravel() - mean_const


def _posterior(K_star_x, ch, r, K_ss_or_diag, mean_const, full_cov):
    mean = mean_const + K_star_x @ ch.solve(r)
    H = ch.half_solve(K_star_x.T)
    if full_cov:
        return GaussianPosterior(mean, covariance=K_ss_or_diag - H.T @ H)
    return GaussianPosterior(mean, variance=K_ss_or_diag - np.einsum("ij,ij->j", H, H))


def prior_diag(spec, n):
    return np.full(n, spec.signal_variance + spec.noise_variance)


def complete_lml_gaussian(X, y, spec, sigma2, mean_const=0.0):
    """log N(y - mean_const; 0, K_ff + sigma2 I) on the complete data."""
    if not sigma2 > 0:
        raise ConfigError(f"sigma2 must be positive, got {sigma2}")
    X = as_points(X, "X")
    r = _centered(y, mean_const)
    if r.shape[0] != X.shape[0]:
        raise DataError("X and y lengths differ")
    K = gram(spec, X, add_noise=True)
    K[np.diag_indices_from(K)] += sigma2
    ch = chol_psd(K)
    a = ch.half_solve(r)
    return float(-0.5 * r.shape[0] * LOG2PI - 0.5 * ch.logdet() - 0.5 * a @ a)


def complete_posterior_gaussian(X, y, X_star, spec, sigma2, mean_const=0.0, full_cov=True):
    """Exact posterior of the latent function at ``X_star`` from complete data."""
    if not sigma2 > 0:
        raise ConfigError(f"sigma2 must be positive, got {sigma2}")
    X = as_points(X, "X")
    Xs = as_points(X_star, "X_star")
    if Xs.shape[1] != X.shape[1]:
        raise DataError("X_star dimension differs from X")
    r = _centered(y, mean_const)
    if r.shape[0] != X.shape[0]:
        raise DataError("X and y lengths differ")
    K = gram(spec, X, add_noise=True)
    K[np.diag_indices_from(K)] += sigma2
    ch = chol_psd(K)
    Ksf = gram(spec, Xs, X)
    Kss = gram(spec, Xs, add_noise=True) if full_cov else prior_diag(spec, Xs.shape[0])
    return _posterior(Ksf, ch, r, Kss, mean_const, full_cov)


def laplace_aggregated_posterior(X, summary_u, X_star, spec, likelihood, mean_const=0.0,
                                 include_noise=True, full_cov=True):
    """Asymptotic posterior under input replacement, using complete inputs.

    mu    = K_*f K_ff^-1 W (V^-1 + K_uu^-1)^-1 V^-1 ubar
    Sigma = K_** - K_*f K_ff^-1 K_f* + K_*f K_ff^-1 W (V^-1 + K_uu^-1)^-1 W' K_ff^-1 K_f*

    evaluated through the identities (V^-1 + K^-1)^-1 V^-1 = K (K + V)^-1 and
    (V^-1 + K^-1)^-1 = K - K (K + V)^-1 K.  ``include_noise`` controls whether
    the white-noise variance sits on the diagonal of K_ff.
    """
    X = as_points(X, "X")
    Xs = as_points(X_star, "X_star")
    if summary_u.omega is None:
        raise DataError("assignments omega are required")
    if summary_u.omega.shape[0] != X.shape[0]:
        raise DataError("omega length differs from the number of complete inputs")
    if np.any(summary_u.counts == 0):
        raise DataError("empty cell in summary")
    W = summary_u.assignment_matrix()
    r = summary_u.ybar - mean_const
    v = variance_vector(summary_u.ybar, summary_u.counts, likelihood)
    Kuu = gram(spec, summary_u.Z, add_noise=True)
    S = chol_psd(Kuu + np.diag(v))
    u0 = Kuu @ S.solve(r)
    A = Kuu - Kuu @ S.solve(Kuu)
    Kff = gram(spec, X, add_noise=include_noise)
    F = chol_psd(Kff)
    Ksf = gram(spec, Xs, X)
    B = F.solve(Ksf.T).T  # K_*f K_ff^-1
    BW = B @ W
    mean = mean_const + BW @ u0
    if full_cov:
        Kss = gram(spec, Xs, add_noise=True)
        cov = Kss - B @ Ksf.T + BW @ A @ BW.T
        return GaussianPosterior(mean, covariance=cov)
    var = prior_diag(spec, Xs.shape[0]) - np.einsum("ij,ij->i", B, Ksf) + np.einsum("ij,jk,ik->i", BW, A, BW)
    return GaussianPosterior(mean, variance=var)
