import numpy as np
import pytest

from sumgp.exceptions import ConfigError, DataError
from sumgp.likelihoods import gaussian, poisson
from sumgp.summarize import (Dataset, GridSpec, SummarizedData, assign_grid, summarize, summarize_grid,
                             transform_summary)


def test_summarize_against_loops(rng):
    y = rng.normal(size=40)
    omega = rng.integers(0, 4, 40)
    omega[:4] = np.arange(4)
    ybar, svar, counts = summarize(y, omega, 4)
    for j in range(4):
        g = y[omega == j]
        assert counts[j] == len(g)
        assert ybar[j] == pytest.approx(sum(g) / len(g), rel=1e-13)
        assert svar[j] == pytest.approx(sum((v - ybar[j]) ** 2 for v in g) / len(g), rel=1e-12, abs=1e-15)


def test_empty_cell_is_an_error():
    with pytest.raises(DataError, match="empty"):
        summarize([1.0, 2.0], [0, 2], 3)


def test_grid_assignment_and_alpha():
    grid = GridSpec([[0, 2], [0, 1]], 0.5)
    assert tuple(grid.shape) == (4, 2)
    assert grid.alpha == pytest.approx(0.5 * np.sqrt(0.5))
    X = np.array([[0.1, 0.1], [1.9, 0.9], [2.0, 1.0], [0.2, 0.2]])
    omega, centers, alpha = assign_grid(X, grid)
    # the upper boundary folds into the last cell
    assert omega[1] == omega[2] and omega[0] == omega[3]
    np.testing.assert_allclose(centers, [[0.25, 0.25], [1.75, 0.75]])
    assert alpha == grid.alpha


def test_points_outside_grid_rejected():
    with pytest.raises(DataError, match="outside"):
        assign_grid(np.array([[3.0]]), GridSpec([[0, 1]], 0.5))


def test_every_point_within_alpha(rng):
    X = rng.uniform(-1, 1, (200, 2))
    s = summarize_grid(X, rng.normal(size=200), GridSpec.covering(X, 0.3))
    assert np.linalg.norm(X - s.Z[s.omega], axis=1).max() <= s.alpha
    assert s.counts.sum() == 200 and s.m == len(np.unique(s.omega))


@pytest.mark.parametrize("kw", [{"bounds": [[1, 0]], "cell_size": 1}, {"bounds": [[0, 1]], "cell_size": 0},
                                {"bounds": [[0, 1], [0, 1]], "cell_size": [1, 1, 1]}])
def test_bad_grid(kw):
    with pytest.raises(ConfigError):
        GridSpec(**kw)


def test_summary_validation():
    with pytest.raises(DataError):
        SummarizedData([[0.0], [1.0]], [1.0, 2.0], None, [1, 0])
    with pytest.raises(DataError):
        SummarizedData([[0.0]], [1.0], [-1.0], [1])
    with pytest.raises(DataError):
        SummarizedData([[0.0], [1.0]], [1.0], None, [1, 1])


def test_transform_poisson():
    s = SummarizedData([[0.0], [1.0]], [np.e, 0.0], None, [2, 3])
    with pytest.raises(DataError, match="positive"):
        transform_summary(s, poisson())
    u = transform_summary(s, poisson(), poisson_floor=0.5)
    np.testing.assert_allclose(u.ybar, [1.0, np.log(0.5)])
    assert u.space == "u"
    assert transform_summary(s, gaussian()).ybar.tolist() == [np.e, 0.0]


def test_dataset_checks():
    with pytest.raises(DataError):
        Dataset(np.zeros((3, 1)), np.zeros(2))
    ds = Dataset(np.arange(6.0).reshape(3, 2), [1.0, 2.0, 3.0])
    assert ds.subset([2]).y.tolist() == [3.0]
