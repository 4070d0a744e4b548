"""Observation models: link functions and the per-cell variance vector.

``g`` maps the latent function to the observation mean (identity for the
Gaussian, ``exp`` for the Poisson); summaries are moved to latent space with
``g^{-1}`` before any GP algebra.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, DataError, NumericalError

KINDS = ("gaussian", "poisson")


@dataclass(frozen=True)
class LikelihoodSpec:
    kind: str = "gaussian"
    sigma2: float = 1.0

    def __post_init__(self):
        kind = str(self.kind).lower()
        if kind not in KINDS:
            raise ConfigError(f"unknown likelihood {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        if kind == "gaussian" and not (np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ConfigError(f"Gaussian sigma2 must be positive, got {self.sigma2}")

    @property
    def is_gaussian(self):
        return self.kind == "gaussian"

    def link(self, f):
        """g: latent value -> observation mean."""
        f = np.asarray(f, dtype=float)
        return f if self.is_gaussian else np.exp(f)

    def inverse_link(self, y):
        y = np.asarray(y, dtype=float)
        if self.is_gaussian:
            return y
        bad = np.flatnonzero(~(y > 0))
        if bad.size:
            raise DataError(f"Poisson inverse link needs positive values; offending indices {bad.tolist()[:20]}")
        return np.log(y)

    def to_dict(self):
        d = {"kind": self.kind}
        if self.is_gaussian:
            d["sigma2"] = float(self.sigma2)
        return d


def gaussian(sigma2=1.0):
    return LikelihoodSpec("gaussian", sigma2)


def poisson():
    return LikelihoodSpec("poisson")


def variance_vector(ubar, counts, likelihood):
    """Diagonal of V_uu: per-cell variance of the summary statistic.

    Gaussian: sigma2 / n_j.  Poisson: the inverse of the negative second
    derivative of the cell log-likelihood at its maximiser u_j = log(ybar_j),
    i.e. 1 / (n_j * exp(u_j)).
    """
    counts = np.asarray(counts, dtype=float)
    if np.any(counts < 1):
        raise DataError("every cell count must be >= 1")
    if likelihood.is_gaussian:
        return likelihood.sigma2 / counts
    with np.errstate(over="ignore"):
        rate = np.exp(np.asarray(ubar, dtype=float))
    if not np.all(np.isfinite(rate)):
        raise NumericalError("exp(ubar) overflowed while forming Poisson variances")
    v = 1.0 / (counts * rate)
    if not np.all(np.isfinite(v) & (v > 0)):
        raise NumericalError("Poisson variance vector is not strictly positive and finite")
    return v
