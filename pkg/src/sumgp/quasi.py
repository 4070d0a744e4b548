"""Learning and inference from summaries through the sample quasi-likelihood.

The summary statistics enter as Gaussian pseudo-observations of the latent
values ``u = f(Z)`` with diagonal covariance ``V`` (see
:func:`sumgp.likelihoods.variance_vector`), which gives

    Q       = log N(ubar - tau; 0, K_uu + V)
    mu_q    = tau + K_*u (K_uu + V)^-1 (ubar - tau)
    Sigma_q = K_** - K_*u (K_uu + V)^-1 K_u*

For a Gaussian likelihood the marginal likelihood of the input-replaced model
is available exactly from means, variances and counts; see
:func:`gaussian_aggregated_lml_E`.
"""

import numpy as np

from .exceptions import ConfigError, DataError
from .gp import LOG2PI, GaussianPosterior, prior_diag
from .kernels import as_points, gram
from .likelihoods import variance_vector
from .linalg import chol_psd


def _require_u(summary, likelihood):
    if summary.space != "u" and not likelihood.is_gaussian:
        raise DataError("summary must be transformed to latent space first (transform_summary)")


def _gaussian_logpdf(r, S):
    ch = chol_psd(S)
    a = ch.half_solve(r)
    return float(-0.5 * r.shape[0] * LOG2PI - 0.5 * ch.logdet() - 0.5 * a @ a)


def lml_Q(summary_u, spec, likelihood, mean_const=0.0):
    """Log marginal likelihood of the summaries under the quasi-likelihood."""
    _require_u(summary_u, likelihood)
    v = variance_vector(summary_u.ybar, summary_u.counts, likelihood)
    S = gram(spec, summary_u.Z, add_noise=True) + np.diag(v)
    return _gaussian_logpdf(summary_u.ybar - mean_const, S)


def gaussian_loglik_at_means(summary, sigma2):
    """log p(y | W u) at u = ybar, written with summaries only.

    Uses sum_i (y_i - u_j)^2 = n_j (ybar_j - u_j)^2 + n_j s_j^2 within cell j.
    """
    n = summary.counts.astype(float)
    return float(np.sum(-0.5 * n * (LOG2PI + np.log(sigma2)) - n * summary.svar / (2.0 * sigma2)))


def gaussian_aggregated_lml_E(summary, spec, sigma2, mean_const=0.0):
    """Exact log marginal likelihood of the input-replaced Gaussian model.

    E = Q + log p(y|Wu)|_{u=ybar} + (m/2) log 2pi + (1/2) log|V| with
    V = diag(sigma2 / n_j); the Laplace step is exact because the
    log-likelihood is quadratic in u.
    """
    if not sigma2 > 0:
        raise ConfigError(f"sigma2 must be positive, got {sigma2}")
    n = summary.counts.astype(float)
    v = sigma2 / n
    S = gram(spec, summary.Z, add_noise=True) + np.diag(v)
    q = _gaussian_logpdf(summary.ybar - mean_const, S)
    return q + gaussian_loglik_at_means(summary, sigma2) + 0.5 * summary.m * LOG2PI + 0.5 * float(np.sum(np.log(v)))


def posterior_q(summary_u, X_star, spec, likelihood, mean_const=0.0, full_cov=True):
    """Posterior of the latent function at ``X_star`` from summaries only."""
    _require_u(summary_u, likelihood)
    Xs = as_points(X_star, "X_star")
    if Xs.shape[1] != summary_u.Z.shape[1]:
        raise DataError("X_star dimension differs from Z")
    v = variance_vector(summary_u.ybar, summary_u.counts, likelihood)
    ch = chol_psd(gram(spec, summary_u.Z, add_noise=True) + np.diag(v))
    Ksu = gram(spec, Xs, summary_u.Z)
    mean = mean_const + Ksu @ ch.solve(summary_u.ybar - mean_const)
    H = ch.half_solve(Ksu.T)
    if full_cov:
        return GaussianPosterior(mean, covariance=gram(spec, Xs, add_noise=True) - H.T @ H)
    return GaussianPosterior(mean, variance=prior_diag(spec, Xs.shape[0]) - np.einsum("ij,ij->j", H, H))


def predict_observable(posterior, likelihood):
    """Apply the link ``g`` to the posterior mean."""
    mean = posterior.mean if isinstance(posterior, GaussianPosterior) else np.asarray(posterior, float)
    return likelihood.link(mean)
