import numpy as np
import pytest

from sumgp.exceptions import ConfigError, DataError
from sumgp.experiments import (ExperimentConfig, aggregated_lml_dense, eta_sweep, eval_trial, fig4_trial,
                               normalized_rmse, run_eval, split)
from sumgp.summarize import Dataset


def lattice_dataset(rng, n=160):
    # distinct points at the centres of 0.5-wide cells in [0, 10]^2
    cells = rng.choice(400, n, replace=False)
    X = np.column_stack([cells // 20, cells % 20]) * 0.5 + 0.25
    y = np.sin(X[:, 0] / 2) + np.cos(X[:, 1] / 3) + 0.2 * rng.standard_normal(n)
    return Dataset(X, y)


def test_constant_prediction_scores_one(rng):
    y = rng.normal(size=5000)
    y = (y - y.mean()) / y.std()
    assert normalized_rmse(np.zeros_like(y), y, y.std()) == pytest.approx(1.0)
    with pytest.raises(DataError):
        normalized_rmse(y, y, 0.0)


def test_split_is_seeded_and_disjoint(rng):
    ds = lattice_dataset(rng)
    a, b = split(ds, 100, np.random.default_rng(3))
    c, _ = split(ds, 100, np.random.default_rng(3))
    assert a.n == 100 and b.n == 60
    np.testing.assert_array_equal(a.X, c.X)
    with pytest.raises(DataError):
        split(ds, ds.n, np.random.default_rng(0))


def test_identity_grid_matches_complete_posterior(rng):
    ds = lattice_dataset(rng)
    # points sit on cell centres, so the summary reproduces the inputs exactly
    cfg = ExperimentConfig(bounds=((0, 10), (0, 10)), grid_cell=0.5, n_train=100, compare_complete=True,
                           kernel_family="gaussian")
    (rec,) = eval_trial(ds, cfg, 0)
    assert rec["m"] == 100
    assert rec["approx_rmse"] < 1e-6


def test_eval_emits_one_record_per_trial(rng):
    ds = lattice_dataset(rng)
    cfg = ExperimentConfig(bounds=((0, 10), (0, 10)), grid_cell=2.0, n_train=120, trials=3)
    records, agg = run_eval(ds, cfg)
    assert len(records) == 3 and len(agg) == 1 and agg[0]["trials"] == 3
    assert [r["trial"] for r in records] == [0, 1, 2]
    again, _ = run_eval(ds, cfg)
    assert [r["pred_rmse"] for r in again] == [r["pred_rmse"] for r in records]


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(trials=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(grid_cell=-1)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"trails": 3})
    cfg = ExperimentConfig.from_dict({"input_columns": ["a"], "bounds": [[0, 1]]})
    assert cfg.input_columns == ("a",) and cfg.bounds == ((0, 1),)


def test_toy_rows_have_expected_shape():
    rows = fig4_trial(0, n=120, n_star=50, ms=(4, 16), thetas=(1.0,), families=("laplacian",))
    assert [r["m"] for r in rows] == [4, 16]
    assert all(r["laplace_gap"] < 1e-8 for r in rows)
    eta_rows = eta_sweep(n=100, ms=(4, 100), thetas=(1.0,), families=("gaussian",))
    assert eta_rows[-1]["beta"] == 0.0


def test_dense_aggregated_lml_against_loop(rng):
    from sumgp.kernels import KernelSpec, gram
    from conftest import dense_logpdf

    Z = np.array([[0.0], [1.0], [2.0]])
    omega = np.array([0, 1, 1, 2, 0])
    y = rng.normal(size=5)
    spec = KernelSpec("laplacian", 0.7)
    K = gram(spec, Z)
    S = np.array([[K[a, b] for b in omega] for a in omega]) + 0.5 * np.eye(5)
    assert aggregated_lml_dense(Z, omega, y, spec, 0.5) == pytest.approx(dense_logpdf(y, S), rel=1e-12)
