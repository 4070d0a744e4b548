"""Jittered Cholesky factorisation and symmetric eigenvalue extremes."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .exceptions import DataError, NotPSDError

BASE_JITTER = 1e-10
MAX_JITTER = 1e-4


@dataclass(frozen=True)
class CholeskyFactor:
    L: np.ndarray
    jitter_used: float = 0.0

    def solve(self, b):
        return cho_solve((self.L, True), b, check_finite=False)

    def half_solve(self, b):
        """L^{-1} b."""
        return solve_triangular(self.L, b, lower=True, check_finite=False)

    def logdet(self):
        return 2.0 * float(np.sum(np.log(np.diag(self.L))))

    def inverse(self):
        return self.solve(np.eye(self.L.shape[0]))

    def reconstruct(self):
        return self.L @ self.L.T


def chol_psd(M, base_jitter=BASE_JITTER, max_jitter=MAX_JITTER):
    """Cholesky of ``(M + M.T) / 2``, adding diagonal jitter only on failure.

    The first attempt is unjittered; after that the jitter starts at
    ``base_jitter`` and grows by 10x up to ``max_jitter``.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DataError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DataError("matrix contains non-finite entries")
    S = 0.5 * (M + M.T)
    eye = np.eye(S.shape[0])
    jitter = 0.0
    while True:
        try:
            L = np.linalg.cholesky(S + jitter * eye if jitter else S)
            return CholeskyFactor(L, jitter)
        except np.linalg.LinAlgError:
            pass
        if jitter == 0.0:
            jitter = base_jitter
        elif jitter * 10 <= max_jitter * (1 + 1e-12):
            jitter *= 10
        else:
            break
    lam = float(np.linalg.eigvalsh(S)[0])
    raise NotPSDError(
        f"matrix is not positive definite even with jitter {max_jitter:g}; "
        f"smallest eigenvalue {lam:.3e}",
        min_eigenvalue=lam,
    )


def eig_extremes(M):
    """Smallest and largest eigenvalue of a symmetric matrix."""
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise DataError("matrix contains non-finite entries")
    w = np.linalg.eigvalsh(0.5 * (M + M.T))
    return float(w[0]), float(w[-1])
