"""Gaussian process regression from summarised data."""

__version__ = "0.1.0"

from .bounds import BoundReport, bound_report, chi2_upper, eta, gamma_max, kappa
from .estimator import ExactGPRegressor, GridSummarizer, SummarizedGPRegressor
from .exceptions import ConfigError, DataError, NotPSDError, NumericalError, SumGPError
from .gp import complete_lml_gaussian, complete_posterior_gaussian
from .hyperopt import FitConfig, fit, fit_complete
from .kernels import KernelSpec, gram
from .likelihoods import LikelihoodSpec
from .quasi import gaussian_aggregated_lml_E, lml_Q, posterior_q, predict_observable
from .summarize import Dataset, GridSpec, SummarizedData, summarize_grid, transform_summary
