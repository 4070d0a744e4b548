import json
import math

import numpy as np
import pytest

from sumgp.bounds import (XI0, BoundReport, bound_report, chi2_upper, epsilon, eta, gamma_max, kappa,
                          kappa_trust_region, schur_complement, toy_summarization, xi0)
from sumgp.exceptions import ConfigError
from sumgp.kernels import KernelSpec, gram
from sumgp.linalg import eig_extremes


def test_xi0_root():
    assert 1.4 < XI0 < 1.5
    assert 2 * math.sqrt(math.pi * XI0) * math.exp(-XI0) == pytest.approx(1.0, abs=1e-10)
    assert xi0(1e-6) == pytest.approx(XI0, abs=1e-6)


@pytest.mark.parametrize("b", [0.0, 0.3, 2.0, 17.5, 80.0])
def test_chi2_closed_forms(b):
    assert chi2_upper(2, b) == pytest.approx(math.exp(-b / 2), abs=1e-10)
    assert chi2_upper(4, b) == pytest.approx(math.exp(-b / 2) * (1 + b / 2), abs=1e-10)


def test_chi2_domain():
    with pytest.raises(ConfigError):
        chi2_upper(0, 1.0)
    with pytest.raises(ConfigError):
        chi2_upper(2.5, 1.0)
    with pytest.raises(ConfigError):
        chi2_upper(2, -1.0)


def _toy(n=60, m=6, family="laplacian", theta=1.0):
    X, Z, omega = toy_summarization(n, m)
    spec = KernelSpec(family, theta)
    W = np.zeros((n, m))
    W[np.arange(n), omega] = 1
    return X, Z, omega, spec, W, gram(spec, X, Z), gram(spec, Z)


def test_gamma_and_kappa_definitions():
    X, Z, omega, spec, W, Kfu, Kuu = _toy()
    A = W - Kfu @ np.linalg.inv(Kuu)
    assert gamma_max(W, Kfu, Kuu) == pytest.approx(np.abs(A).max(), rel=1e-10)
    s = np.linalg.svd(A, compute_uv=False)[0]
    assert kappa(W, Kfu, Kuu) == pytest.approx(60 / 6 / s**2, rel=1e-10)


@pytest.mark.parametrize("seed", range(10))
def test_kappa_singular_value_route_matches_trust_region(seed):
    rng = np.random.default_rng(seed)
    n, m = int(rng.integers(8, 25)), int(rng.integers(2, 5))
    X = rng.uniform(0, 4, (n, 1))
    Z = np.sort(rng.uniform(0, 4, (m, 1)), axis=0)
    omega = np.argmin(np.abs(X - Z.T), axis=1)
    W = np.zeros((n, m))
    W[np.arange(n), omega] = 1
    spec = KernelSpec(["laplacian", "gaussian"][seed % 2], float(rng.uniform(0.3, 2)))
    Kfu, Kuu = gram(spec, X, Z), gram(spec, Z, add_noise=True)
    a, b = kappa(W, Kfu, Kuu), kappa_trust_region(W, Kfu, Kuu)
    assert abs(a - b) / a < 1e-3


def test_kappa_infinite_when_replacement_is_exact():
    X = np.array([[0.0], [1.0], [2.0]])
    spec = KernelSpec("laplacian")
    W = np.eye(3)
    assert math.isinf(kappa(W, gram(spec, X), gram(spec, X)))


def test_lambda2_is_top_eigenvalue_of_explicit_schur():
    X, Z, omega, spec, W, Kfu, Kuu = _toy(n=120, m=10, family="gaussian", theta=0.5)
    Kff = gram(spec, X)
    S = Kff - Kfu @ np.linalg.solve(Kuu, Kfu.T)
    np.testing.assert_allclose(schur_complement(Kff, Kfu, Kuu), S, atol=1e-8)
    r = bound_report(X, omega, Z, spec)
    assert r.lambda2 == pytest.approx(max(eig_extremes(S)[1], 0.0), abs=1e-8)
    assert r.lambda1 == pytest.approx(eig_extremes(Kuu)[1], rel=1e-12)


def test_eta_minimises_objective():
    m, k, l1, l2 = 16, 3.0, 5.0, 0.2
    res = eta(m, 1000, k, l1, l2)
    h = lambda x: math.sqrt(x * l1 / k) + math.sqrt(x * l2) + chi2_upper(m, x * m)
    grid = np.geomspace(XI0, 1e3, 20000)
    assert res.eta <= min(h(x) for x in grid) + 1e-9
    assert res.eta == pytest.approx(h(res.xi_star), rel=1e-12)
    assert XI0 <= res.xi_star


def test_eta_without_first_two_terms_runs_to_the_upper_end():
    # h reduces to F(m, xi m), strictly decreasing in xi
    res = eta(8, 100, math.inf, 1.0, 0.0)
    assert res.xi_star > 100
    assert res.eta < 1e-12


def test_eta_rejects_bad_inputs():
    with pytest.raises(ConfigError):
        eta(4, 10, 0.0, 1.0, 0.0)
    with pytest.raises(ConfigError):
        eta(4, 10, 1.0, 0.0, 0.0)


def test_identity_summarisation_report():
    X = np.linspace(0, 1, 12)[:, None]
    r = bound_report(X, np.arange(12), X, KernelSpec("gaussian", 0.3))
    assert r.beta == 0.0 and r.gamma < 1e-6 and abs(r.lambda2) < 1e-8
    assert math.isinf(r.kappa) or r.kappa > 1e6


def test_report_serialises_with_exact_field_names():
    X, Z, omega, spec, *_ = _toy()
    d = json.loads(bound_report(X, omega, Z, spec).to_json())
    assert set(d) == {"beta", "gamma", "kappa", "lambda1", "lambda2", "xi_star", "eta", "m", "n"}
    assert isinstance(BoundReport(**d), BoundReport)


def test_epsilon_monotone_in_delta1():
    vals = [epsilon(d, 0.5 * d, 4, 20, 2.0, 3.0, 0.1) for d in (0.5, 1.0, 2.0, 4.0)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    with pytest.raises(ConfigError):
        epsilon(1.0, 2.0, 4, 20, 1.0, 1.0, 1.0)


def test_tail_decreases_in_m_from_two():
    for xi in (XI0, 2.0, 5.0):
        F = [chi2_upper(m, xi * m) for m in range(2, 201)]
        assert all(a >= b - 1e-15 for a, b in zip(F, F[1:]))


def test_tail_rises_from_one_to_two_at_xi0():
    # F(1, b) = erfc(sqrt(b / 2)) and F(2, b) = exp(-b / 2)
    f1, f2 = chi2_upper(1, XI0), chi2_upper(2, 2 * XI0)
    assert f1 == pytest.approx(math.erfc(math.sqrt(XI0 / 2)), rel=1e-12)
    assert f2 == pytest.approx(math.exp(-XI0), rel=1e-12)
    assert f1 < f2
