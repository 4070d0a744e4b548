"""Covariance functions, Gram matrices and input-replacement error bounds.

Two stationary families are supported::

    laplacian:  c * exp(-|x - x'| / theta)
    gaussian:   c * exp(-|x - x'|^2 / (2 theta^2))

White noise ``noise_variance`` is only ever added to the diagonal of a Gram
matrix built from one point set against itself.

The ``zeta1``/``zeta2`` bounds are stated for the unit kernels; distances and
the radius are divided by ``theta`` first and callers scale by ``c``.  The
noise term is identical before and after replacing an input by its
representative, so it never enters the bounds.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .exceptions import ConfigError, DataError

FAMILIES = ("laplacian", "gaussian")


@dataclass(frozen=True)
class KernelSpec:
    family: str = "gaussian"
    length_scale: float = 1.0
    signal_variance: float = 1.0
    noise_variance: float = 0.0

    def __post_init__(self):
        fam = str(self.family).lower()
        if fam not in FAMILIES:
            raise ConfigError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        object.__setattr__(self, "family", fam)
        if not (np.isfinite(self.length_scale) and self.length_scale > 0):
            raise ConfigError(f"length_scale must be positive, got {self.length_scale}")
        if not (np.isfinite(self.signal_variance) and self.signal_variance > 0):
            raise ConfigError(f"signal_variance must be positive, got {self.signal_variance}")
        if not (np.isfinite(self.noise_variance) and self.noise_variance >= 0):
            raise ConfigError(f"noise_variance must be non-negative, got {self.noise_variance}")

    def with_params(self, **kw):
        return replace(self, **kw)

    def to_dict(self):
        return {
            "family": self.family,
            "length_scale": float(self.length_scale),
            "signal_variance": float(self.signal_variance),
            "noise_variance": float(self.noise_variance),
        }


def as_points(A, name="points"):
    """Coerce to a finite 2-D float array (a 1-D input is read as n points in 1-D)."""
    A = np.asarray(A, dtype=float)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    elif A.ndim == 1:
        A = A[:, None]
    elif A.ndim != 2:
        raise DataError(f"{name} must be 1-D or 2-D, got shape {A.shape}")
    if A.shape[0] == 0:
        raise DataError(f"{name} is empty")
    if not np.all(np.isfinite(A)):
        raise DataError(f"{name} contains non-finite values")
    return A


def _unit_from_scaled_distance(family, r):
    if family == "laplacian":
        return np.exp(-r)
    return np.exp(-0.5 * r * r)


def kernel_eval(spec, x, xp):
    """Covariance between two single points, without the noise term."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xp = np.atleast_1d(np.asarray(xp, dtype=float))
    if x.shape != xp.shape:
        raise DataError(f"point dimensions differ: {x.shape} vs {xp.shape}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(xp))):
        raise DataError("kernel_eval received non-finite coordinates")
    r = np.linalg.norm(x / spec.length_scale - xp / spec.length_scale)
    return float(spec.signal_variance * _unit_from_scaled_distance(spec.family, r))


def kernel_pairs(spec, A, B):
    """Row-wise covariances k(A_i, B_i), without the noise term."""
    A, B = as_points(A, "A"), as_points(B, "B")
    if A.shape != B.shape:
        raise DataError(f"paired point sets differ in shape: {A.shape} vs {B.shape}")
    r = np.linalg.norm((A - B) / spec.length_scale, axis=1)
    return spec.signal_variance * _unit_from_scaled_distance(spec.family, r)


def scaled_distances(spec, A, B=None):
    A = as_points(A, "A") / spec.length_scale
    if B is None:
        return cdist(A, A)
    B = as_points(B, "B") / spec.length_scale
    if A.shape[1] != B.shape[1]:
        raise DataError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    return cdist(A, B)


def gram(spec, A, B=None, add_noise=False):
    """Gram matrix between point sets ``A`` and ``B`` (``B=None`` means ``A``).

    ``add_noise`` puts ``noise_variance`` on the diagonal and is only legal
    for the same-set case.
    """
    same = B is None or B is A
    if add_noise and not same:
        A_ = as_points(A, "A")
        B_ = as_points(B, "B")
        if A_.shape != B_.shape or not np.array_equal(A_, B_):
            raise DataError("add_noise requires identical point sets")
    R = scaled_distances(spec, A, None if same else B)
    K = spec.signal_variance * _unit_from_scaled_distance(spec.family, R)
    if add_noise and spec.noise_variance > 0:
        K[np.diag_indices_from(K)] += spec.noise_variance
    return K


def gram_and_log_grads(spec, A):
    """Same-set noisy Gram matrix plus its derivatives with respect to
    (log length_scale, log signal_variance, log noise_variance)."""
    R = scaled_distances(spec, A)
    unit = _unit_from_scaled_distance(spec.family, R)
    Ks = spec.signal_variance * unit
    if spec.family == "laplacian":
        dtheta = Ks * R
    else:
        dtheta = Ks * R * R
    dnoise = spec.noise_variance * np.eye(Ks.shape[0])
    K = Ks + dnoise
    return K, (dtheta, Ks.copy(), dnoise)


def _check_alpha(alpha):
    if not (np.isfinite(alpha) and alpha > 0):
        raise ConfigError(f"alpha must be positive, got {alpha}")


def _family(family):
    fam = str(family).lower()
    if fam not in FAMILIES:
        raise ConfigError(f"unknown kernel family {family!r}")
    return fam


def zeta1(family, theta, alpha, z, zp):
    """Bound on |k(x, x') - k(z, z')| for unit signal variance when x, x'
    lie strictly within ``alpha`` of z, z'."""
    fam = _family(family)
    _check_alpha(alpha)
    a = alpha / theta
    if fam == "laplacian":
        return float(-np.expm1(-2.0 * a))
    d = np.linalg.norm(np.atleast_1d(np.asarray(z, float) - np.asarray(zp, float))) / theta
    return float(-np.expm1(-2.0 * a * (d + a)))


def zeta2(family, theta, alpha, z, xstar):
    """Bound on |k(x, x*) - k(z, x*)| for unit signal variance when x lies
    strictly within ``alpha`` of z."""
    fam = _family(family)
    _check_alpha(alpha)
    a = alpha / theta
    if fam == "laplacian":
        return float(-np.expm1(-a))
    d = np.linalg.norm(np.atleast_1d(np.asarray(z, float) - np.asarray(xstar, float))) / theta
    return float(-np.expm1(-a * (d + 1.5 * a)))


def beta_bound(spec, Z, alpha, X_star=None):
    """Uniform kernel perturbation bound beta for representatives ``Z``.

    Both Gaussian-family bounds grow with the distance between the pair, so
    only the largest pairwise distance matters.  Without ``X_star`` only the
    training-pair branch is evaluated.
    """
    Z = as_points(Z, "Z")
    _check_alpha(alpha)
    dmax = float(pdist(Z).max()) if Z.shape[0] > 1 else 0.0
    b = zeta1(spec.family, spec.length_scale, alpha, np.zeros(1), np.array([dmax]))
    if X_star is not None:
        Xs = as_points(X_star, "X_star")
        if Xs.shape[1] != Z.shape[1]:
            raise DataError("X_star dimension differs from Z")
        dstar = float(cdist(Z, Xs).max())
        b = max(b, zeta2(spec.family, spec.length_scale, alpha, np.zeros(1), np.array([dstar])))
    return spec.signal_variance * b
