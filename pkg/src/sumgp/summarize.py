"""Grid summarisation of complete data.

Cells are indexed 0..m-1 (Python convention).  Empty cells are dropped, and
points lying exactly on the upper bound of a dimension fold into the last
cell so that the assignment always partitions the data.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import ConfigError, DataError
from .kernels import as_points


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    attribute_names: tuple = ()
    target_name: str = "y"

    def __post_init__(self):
        X = as_points(self.X, "X")
        y = np.asarray(self.y, dtype=float).ravel()
        if y.shape[0] != X.shape[0]:
            raise DataError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
        if not np.all(np.isfinite(y)):
            raise DataError("y contains non-finite values")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        names = tuple(self.attribute_names) or tuple(f"x{i + 1}" for i in range(X.shape[1]))
        object.__setattr__(self, "attribute_names", names)

    @property
    def n(self):
        return self.X.shape[0]

    def subset(self, idx):
        return Dataset(self.X[idx], self.y[idx], self.attribute_names, self.target_name)


@dataclass(frozen=True)
class GridSpec:
    bounds: np.ndarray  # (d, 2) rows of [lo, hi]
    cell_size: np.ndarray  # (d,)

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.bounds, dtype=float))
        c = np.atleast_1d(np.asarray(self.cell_size, dtype=float))
        if b.shape[1] != 2:
            raise ConfigError(f"bounds must be (d, 2), got {b.shape}")
        if c.size == 1 and b.shape[0] > 1:
            c = np.full(b.shape[0], c[0])
        if c.shape[0] != b.shape[0]:
            raise ConfigError("cell_size length differs from the number of bounds")
        if not np.all(b[:, 0] < b[:, 1]):
            raise ConfigError("each bound needs lo < hi")
        if not np.all(c > 0):
            raise ConfigError("cell sizes must be positive")
        object.__setattr__(self, "bounds", b)
        object.__setattr__(self, "cell_size", c)

    @property
    def d(self):
        return self.bounds.shape[0]

    @property
    def shape(self):
        return np.maximum(np.ceil((self.bounds[:, 1] - self.bounds[:, 0]) / self.cell_size - 1e-12), 1).astype(int)

    @property
    def alpha(self):
        """Half the cell diagonal: the largest point-to-centre distance."""
        return 0.5 * float(np.linalg.norm(self.cell_size))

    @classmethod
    def covering(cls, X, cell_size):
        X = as_points(X, "X")
        lo, hi = X.min(axis=0), X.max(axis=0)
        hi = np.where(hi > lo, hi, lo + np.broadcast_to(np.asarray(cell_size, float), lo.shape))
        return cls(np.column_stack([lo, hi]), cell_size)


@dataclass(frozen=True)
class SummarizedData:
    """Representative features with per-group statistics.

    ``ybar`` holds observation-space means unless ``space == "u"``, in which
    case it holds ``g^{-1}`` of them.  ``svar`` is the biased (divide by
    ``n_j``) within-cell variance of the raw outputs.
    """

    Z: np.ndarray
    ybar: np.ndarray
    svar: np.ndarray
    counts: np.ndarray
    omega: np.ndarray = None
    alpha: float = None
    space: str = "y"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        Z = as_points(self.Z, "Z")
        m = Z.shape[0]
        ybar = np.asarray(self.ybar, dtype=float).ravel()
        svar = np.zeros(m) if self.svar is None else np.asarray(self.svar, dtype=float).ravel()
        counts = np.asarray(self.counts).ravel()
        if not (ybar.shape[0] == svar.shape[0] == counts.shape[0] == m):
            raise DataError("Z, ybar, svar and counts must have the same length")
        if not np.all(np.isfinite(ybar)):
            raise DataError("ybar contains non-finite values")
        if np.any(counts < 1) or not np.all(np.equal(np.mod(counts, 1), 0)):
            raise DataError("counts must be positive integers")
        if np.any(svar < 0) or not np.all(np.isfinite(svar)):
            raise DataError("svar must be finite and non-negative")
        counts = counts.astype(np.int64)
        if self.omega is not None:
            omega = np.asarray(self.omega).astype(np.int64).ravel()
            if omega.size and (omega.min() < 0 or omega.max() >= m):
                raise DataError("omega refers to a cell outside 0..m-1")
            if not np.array_equal(np.bincount(omega, minlength=m), counts):
                raise DataError("omega disagrees with counts")
            object.__setattr__(self, "omega", omega)
        if self.space not in ("y", "u"):
            raise ConfigError(f"space must be 'y' or 'u', got {self.space!r}")
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "ybar", ybar)
        object.__setattr__(self, "svar", svar)
        object.__setattr__(self, "counts", counts)

    @property
    def m(self):
        return self.Z.shape[0]

    @property
    def n(self):
        return int(self.counts.sum())

    def weighted_mean(self):
        return float(np.sum(self.counts * self.ybar) / self.n)

    def assignment_matrix(self):
        """Dense 0/1 matrix W with W[i, j] = 1 iff omega[i] == j."""
        if self.omega is None:
            raise DataError("assignments are not available for this summary")
        W = np.zeros((self.omega.shape[0], self.m))
        W[np.arange(self.omega.shape[0]), self.omega] = 1.0
        return W


def assign_grid(X, grid):
    """Map points to occupied grid cells.

    Returns ``(omega, centers, alpha)``; ``centers`` lists the geometric
    centres of the occupied cells in lexicographic cell order.
    """
    X = as_points(X, "X")
    if X.shape[1] != grid.d:
        raise DataError(f"X has dimension {X.shape[1]} but the grid has {grid.d}")
    lo, hi = grid.bounds[:, 0], grid.bounds[:, 1]
    outside = np.flatnonzero(np.any((X < lo) | (X > hi), axis=1))
    if outside.size:
        raise DataError(f"{outside.size} points lie outside the grid bounds; rows {outside.tolist()[:20]}")
    idx = np.floor((X - lo) / grid.cell_size).astype(np.int64)
    idx = np.minimum(idx, grid.shape - 1)
    cells, omega = np.unique(idx, axis=0, return_inverse=True)
    omega = omega.ravel()
    centers = lo + (cells + 0.5) * grid.cell_size
    return omega, centers, grid.alpha


def summarize(y, omega, m):
    """Per-cell sample mean, biased sample variance and count."""
    y = np.asarray(y, dtype=float).ravel()
    omega = np.asarray(omega).astype(np.int64).ravel()
    if y.shape != omega.shape:
        raise DataError("y and omega lengths differ")
    if omega.size and (omega.min() < 0 or omega.max() >= m):
        raise DataError("omega refers to a cell outside 0..m-1")
    counts = np.bincount(omega, minlength=m)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise DataError(f"cells {empty.tolist()[:20]} are empty")
    ybar = np.bincount(omega, weights=y, minlength=m) / counts
    dev = y - ybar[omega]
    svar = np.bincount(omega, weights=dev * dev, minlength=m) / counts
    return ybar, svar, counts


def summarize_grid(X, y, grid):
    """Assign ``X`` to ``grid`` and summarise ``y`` per occupied cell."""
    X = as_points(X, "X")
    omega, centers, alpha = assign_grid(X, grid)
    ybar, svar, counts = summarize(y, omega, centers.shape[0])
    dist = np.linalg.norm(X - centers[omega], axis=1)
    if dist.size and dist.max() > alpha * (1 + 1e-9):
        raise DataError("internal error: a point lies farther than alpha from its cell centre")
    return SummarizedData(centers, ybar, svar, counts, omega=omega, alpha=alpha)


def transform_summary(summary, likelihood, poisson_floor=None):
    """Move the summary statistics to latent space with ``g^{-1}``.

    For the Poisson link every ``ybar_j`` must be positive unless
    ``poisson_floor`` is given, in which case smaller values are clamped to it.
    """
    if summary.space == "u":
        return summary
    ybar = summary.ybar
    if not likelihood.is_gaussian:
        bad = np.flatnonzero(~(ybar > 0))
        if bad.size:
            if poisson_floor is None:
                raise DataError(
                    f"Poisson summaries need positive means; cells {bad.tolist()[:20]} are <= 0 "
                    "(use a Poisson floor to clamp them)"
                )
            if not poisson_floor > 0:
                raise ConfigError("poisson_floor must be positive")
            ybar = np.maximum(ybar, poisson_floor)
    return replace(summary, ybar=likelihood.inverse_link(ybar), space="u")
