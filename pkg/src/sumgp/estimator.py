"""scikit-learn compatible wrappers.

``GridSummarizer`` turns raw (X, y) into per-cell statistics and
``SummarizedGPRegressor`` fits on those statistics only::

    Z, ybar, counts, svar = GridSummarizer(cell_size=0.4).summarize(X, y)
    reg = SummarizedGPRegressor(kernel="laplacian").fit(Z, ybar, sample_weight=counts, svar=svar)
    reg.predict(X_test, return_std=True)
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .hyperopt import FitConfig, fit, fit_complete
from .likelihoods import LikelihoodSpec
from .summarize import GridSpec, SummarizedData, summarize_grid


class GridSummarizer(BaseEstimator):
    """Regular-grid summariser.  ``bounds`` defaults to the training box."""

    def __init__(self, cell_size=0.4, bounds=None):
        self.cell_size = cell_size
        self.bounds = bounds

    def fit(self, X, y=None):
        X = check_array(X)
        if self.bounds is None:
            self.grid_ = GridSpec.covering(X, self.cell_size)
        else:
            self.grid_ = GridSpec(np.asarray(self.bounds, float), self.cell_size)
        self.n_features_in_ = X.shape[1]
        return self

    def transform_summary(self, X, y):
        check_is_fitted(self, "grid_")
        X, y = check_X_y(X, y, y_numeric=True)
        return summarize_grid(X, y, self.grid_)

    def summarize(self, X, y):
        """Return ``(Z, ybar, counts, svar)``."""
        s = self.fit(X).transform_summary(X, y)
        return s.Z, s.ybar, s.counts, s.svar


class SummarizedGPRegressor(RegressorMixin, BaseEstimator):
    """GP regression trained on group means, counts and within-group variances.

    ``fit`` takes representatives ``Z`` with observation-space means ``ybar``;
    group sizes go in ``sample_weight`` (default 1).  Hyperparameters start at
    1 on a log scale and are optimised with L-BFGS-B.
    """

    def __init__(self, kernel="gaussian", likelihood="gaussian", sigma2=1.0, fit_sigma2=True,
                 mode=None, poisson_floor=None, maxiter=200):
        self.kernel = kernel
        self.likelihood = likelihood
        self.sigma2 = sigma2
        self.fit_sigma2 = fit_sigma2
        self.mode = mode
        self.poisson_floor = poisson_floor
        self.maxiter = maxiter

    def fit(self, Z, ybar, sample_weight=None, svar=None):
        Z, ybar = check_X_y(Z, ybar, y_numeric=True)
        counts = np.ones(len(ybar), dtype=np.int64) if sample_weight is None else np.asarray(sample_weight)
        summary = SummarizedData(Z, ybar, svar, counts)
        lik = LikelihoodSpec(self.likelihood, self.sigma2)
        cfg = FitConfig(family=self.kernel, mode=self.mode, fit_sigma2=self.fit_sigma2,
                        maxiter=self.maxiter, poisson_floor=self.poisson_floor)
        self.model_ = fit(summary, lik, cfg)
        self.kernel_ = self.model_.kernel
        self.likelihood_ = self.model_.likelihood
        self.mean_const_ = self.model_.mean_const
        self.log_marginal_likelihood_value_ = self.model_.log_marginal_likelihood
        self.n_features_in_ = Z.shape[1]
        return self

    def predict(self, X, return_std=False):
        """Observation-space prediction ``g(mu_q)``; ``return_std`` gives the
        latent posterior standard deviation."""
        check_is_fitted(self, "model_")
        X = check_array(X)
        post = self.model_.posterior(X)
        pred = self.likelihood_.link(post.mean)
        return (pred, post.std) if return_std else pred


class ExactGPRegressor(RegressorMixin, BaseEstimator):
    """Exact GP with Gaussian likelihood on complete data (reference model)."""

    def __init__(self, kernel="gaussian", sigma2=1.0, fit_sigma2=True, maxiter=200):
        self.kernel = kernel
        self.sigma2 = sigma2
        self.fit_sigma2 = fit_sigma2
        self.maxiter = maxiter

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        cfg = FitConfig(family=self.kernel, fit_sigma2=self.fit_sigma2, maxiter=self.maxiter)
        self.model_ = fit_complete(X, y, cfg, sigma2=self.sigma2)
        self.kernel_ = self.model_.kernel
        self.sigma2_ = self.model_.sigma2
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X, return_std=False):
        check_is_fitted(self, "model_")
        post = self.model_.posterior(check_array(X))
        return (post.mean, post.std) if return_std else post.mean
