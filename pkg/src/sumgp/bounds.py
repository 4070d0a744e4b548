"""Diagnostics for how far the input-replaced GP can drift from the complete one.

All quantities need the complete inputs ``X`` and the assignments, so this is
an analysis tool rather than something usable with summaries alone.

    A       = W - K_fu K_uu^-1
    gamma   = max |A_ij|
    kappa   = inf_{|A u| = 1} (n/m) |u|^2 = (n/m) / s_max(A)^2
    lambda1 = lambda_max(K_uu)
    lambda2 = lambda_max(K_ff - K_fu K_uu^-1 K_uf)
    eta     = inf_{xi >= xi0} sqrt(xi lambda1 / kappa) + sqrt(xi lambda2) + F(m, xi m)

where ``F(a, b)`` is the chi-square upper tail with ``a`` degrees of freedom.
"""

import json
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize, special, stats

from .exceptions import ConfigError, DataError
from .kernels import as_points, beta_bound, gram
from .linalg import chol_psd, eig_extremes

XI_MAX = 1e6


def chi2_upper(a, b):
    """F(a, b) = Gamma(a/2, b/2) / Gamma(a/2), the chi-square survival function."""
    if a < 1 or int(a) != a:
        raise ConfigError(f"degrees of freedom must be a positive integer, got {a}")
    if np.any(np.asarray(b) < 0):
        raise ConfigError("chi-square argument must be non-negative")
    return special.gammaincc(0.5 * a, 0.5 * np.asarray(b, dtype=float))


def _xi0_residual(xi):
    return 2.0 * math.sqrt(math.pi * xi) * math.exp(-xi) - 1.0


def xi0(tol=1e-12):
    """Larger root of 2 sqrt(pi xi) exp(-xi) = 1, by bisection on [1, 3]."""
    lo, hi = 1.0, 3.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _xi0_residual(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


XI0 = xi0()


def _replacement_operator(W, K_fu, K_uu):
    W = np.asarray(W, dtype=float)
    K_fu = np.asarray(K_fu, dtype=float)
    if W.shape != K_fu.shape or K_uu.shape != (W.shape[1], W.shape[1]):
        raise DataError(f"shape mismatch: W {W.shape}, K_fu {K_fu.shape}, K_uu {K_uu.shape}")
    return W - chol_psd(K_uu).solve(K_fu.T).T


def gamma_max(W, K_fu, K_uu):
    return float(np.max(np.abs(_replacement_operator(W, K_fu, K_uu))))


def kappa(W, K_fu, K_uu, tol=1e-12):
    """Minimal scaled squared norm of u with |A u| = 1; +inf when A vanishes."""
    A = _replacement_operator(W, K_fu, K_uu)
    n, m = A.shape
    s_max = np.linalg.norm(A, 2) if A.size else 0.0
    if s_max <= tol:
        return math.inf
    return float((n / m) / s_max**2)


def kappa_trust_region(W, K_fu, K_uu):
    """kappa from the inverse-free form inf_{|(W K_uu - K_fu) u| = 1} (n/m) |K_uu u|^2,
    solved with a trust-region constrained optimiser."""
    W = np.asarray(W, dtype=float)
    K_fu = np.asarray(K_fu, dtype=float)
    K_uu = np.asarray(K_uu, dtype=float)
    n, m = W.shape
    B = W @ K_uu - K_fu
    ones = np.ones(m)
    nb = np.linalg.norm(B @ ones)
    if nb == 0:
        return math.inf
    u0 = ones / nb
    KK = K_uu.T @ K_uu
    BB = B.T @ B
    scale = n / m
    con = optimize.NonlinearConstraint(
        lambda u: u @ BB @ u, 1.0, 1.0,
        jac=lambda u: 2.0 * BB @ u,
        hess=lambda u, lam: 2.0 * lam[0] * BB,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = optimize.minimize(
            lambda u: scale * u @ KK @ u, u0, jac=lambda u: 2.0 * scale * KK @ u,
            hess=lambda u: 2.0 * scale * KK, constraints=[con], method="trust-constr",
            options={"xtol": 1e-14, "gtol": 1e-12, "maxiter": 5000},
        )
    u = res.x / np.linalg.norm(B @ res.x)
    return float(scale * np.sum((K_uu @ u) ** 2))


def schur_complement(K_ff, K_fu, K_uu):
    H = chol_psd(K_uu).half_solve(np.asarray(K_fu, dtype=float).T)
    return K_ff - H.T @ H


def epsilon(delta1, delta2, m, n, kappa, lambda1, lambda2):
    """Upper bound on the prior mass of f farther than sqrt(n) delta1 from W u."""
    if delta2 < 0 or delta2 > delta1:
        raise ConfigError("need 0 <= delta2 <= delta1")
    first = 0.0 if math.isinf(kappa) and delta1 > delta2 else chi2_upper(m, kappa * (delta1 - delta2) ** 2 / lambda1 * m)
    if lambda2 <= 0:
        second = 0.0 if delta2 > 0 else 1.0
    else:
        second = chi2_upper(n, delta2**2 / lambda2 * n)
    return float(first + second)


def _eta_objective(m, kappa, lambda1, lambda2):
    a = (0.0 if math.isinf(kappa) else math.sqrt(lambda1 / kappa)) + math.sqrt(max(lambda2, 0.0))

    def h(xi):
        return a * math.sqrt(xi) + float(chi2_upper(m, xi * m))

    def dh(xi):
        return a / (2.0 * math.sqrt(xi)) - m * float(stats.chi2.pdf(xi * m, m))

    return h, dh


@dataclass(frozen=True)
class EtaResult:
    xi_star: float
    eta: float
    fallback_used: bool


def eta(m, n, kappa, lambda1, lambda2, xi_max=XI_MAX):
    """Minimise the composite error scale over xi in [xi0, xi_max].

    Bounded L-BFGS-B from xi0, cross-checked against a log-spaced scan; if
    the scan finds a lower value, a bounded Brent search around it takes over
    and ``fallback_used`` is set.
    """
    if not kappa > 0:
        raise ConfigError("kappa must be positive")
    if not lambda1 > 0:
        raise ConfigError("lambda1 must be positive")
    h, dh = _eta_objective(m, kappa, lambda1, lambda2)
    res = optimize.minimize(
        lambda x: h(x[0]), [XI0], jac=lambda x: np.array([dh(x[0])]),
        method="L-BFGS-B", bounds=[(XI0, xi_max)],
    )
    best_x, best_h = float(res.x[0]), float(h(res.x[0]))
    grid = np.geomspace(XI0, xi_max, 400)
    vals = np.array([h(x) for x in grid])
    k = int(np.argmin(vals))
    fallback = False
    if vals[k] < best_h - 1e-12 * max(1.0, abs(best_h)):
        fallback = True
        lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
        br = optimize.minimize_scalar(h, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10 * hi})
        best_x, best_h = (float(br.x), float(br.fun)) if br.fun < vals[k] else (float(grid[k]), float(vals[k]))
    return EtaResult(best_x, best_h, fallback)


@dataclass(frozen=True)
class BoundReport:
    beta: float
    gamma: float
    kappa: float
    lambda1: float
    lambda2: float
    xi_star: float
    eta: float
    m: int
    n: int

    def to_dict(self):
        return asdict(self)

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def bound_report(X, omega, Z, spec, X_star=None, alpha=None):
    """Compose beta, gamma, kappa, lambda1, lambda2 and eta for one summarisation.

    ``alpha`` defaults to the largest observed point-to-representative
    distance (slightly inflated so the strict bound holds).
    """
    X = as_points(X, "X")
    Z = as_points(Z, "Z")
    omega = np.asarray(omega).astype(np.int64).ravel()
    n, m = X.shape[0], Z.shape[0]
    if omega.shape[0] != n:
        raise DataError("omega length differs from X")
    W = np.zeros((n, m))
    W[np.arange(n), omega] = 1.0
    if alpha is None:
        alpha = float(np.max(np.linalg.norm(X - Z[omega], axis=1)))
        alpha = alpha * (1 + 1e-12)
    b = beta_bound(spec, Z, alpha, X_star) if alpha > 0 else 0.0
    K_uu = gram(spec, Z, add_noise=True)
    K_fu = gram(spec, X, Z)
    K_ff = gram(spec, X, add_noise=True)
    g = gamma_max(W, K_fu, K_uu)
    k = kappa(W, K_fu, K_uu)
    lam1 = eig_extremes(K_uu)[1]
    lam2 = max(eig_extremes(schur_complement(K_ff, K_fu, K_uu))[1], 0.0)
    e = eta(m, n, k, lam1, lam2)
    return BoundReport(float(b), g, k, lam1, lam2, e.xi_star, e.eta, m, n)


def toy_summarization(n, m, lo=0.0, hi=2 * np.pi):
    """Equispaced 1-D inputs and representatives, each input assigned to its
    nearest representative."""
    X = np.linspace(lo, hi, n)
    Z = np.linspace(lo, hi, m)
    omega = np.argmin(np.abs(X[:, None] - Z[None, :]), axis=1)
    return X[:, None], Z[:, None], omega
