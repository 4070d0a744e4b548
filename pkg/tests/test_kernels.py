import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sumgp.exceptions import ConfigError, DataError
from sumgp.kernels import KernelSpec, beta_bound, gram, gram_and_log_grads, kernel_eval, kernel_pairs, zeta1, zeta2


def test_closed_forms():
    lap = KernelSpec("laplacian", 2.0, 3.0)
    gau = KernelSpec("gaussian", 2.0, 3.0)
    x, xp = np.array([0.0, 0.0]), np.array([3.0, 4.0])
    assert kernel_eval(lap, x, xp) == pytest.approx(3.0 * np.exp(-2.5), rel=1e-14)
    assert kernel_eval(gau, x, xp) == pytest.approx(3.0 * np.exp(-25 / 8), rel=1e-14)


def test_gram_matches_pointwise(rng):
    spec = KernelSpec("laplacian", 0.7, 1.3, 0.2)
    A, B = rng.normal(size=(6, 2)), rng.normal(size=(4, 2))
    K = gram(spec, A, B)
    ref = np.array([[kernel_eval(spec, a, b) for b in B] for a in A])
    np.testing.assert_allclose(K, ref, rtol=1e-13)
    Kn = gram(spec, A, add_noise=True)
    np.testing.assert_allclose(np.diag(Kn), 1.3 + 0.2)
    np.testing.assert_allclose(Kn - np.diag(np.diag(Kn)), gram(spec, A) - np.diag(np.diag(gram(spec, A))))


def test_pairs_match_pointwise(rng):
    spec = KernelSpec("gaussian", 1.3, 0.6)
    A, B = rng.normal(size=(5, 3)), rng.normal(size=(5, 3))
    np.testing.assert_allclose(kernel_pairs(spec, A, B), [kernel_eval(spec, a, b) for a, b in zip(A, B)], rtol=1e-14)


def test_noise_on_cross_gram_rejected(rng):
    with pytest.raises(DataError):
        gram(KernelSpec(noise_variance=0.1), rng.normal(size=(3, 1)), rng.normal(size=(2, 1)), add_noise=True)


@pytest.mark.parametrize("kw", [{"family": "matern"}, {"length_scale": 0.0}, {"signal_variance": -1.0},
                                {"noise_variance": -1e-3}, {"length_scale": np.inf}])
def test_invalid_spec(kw):
    with pytest.raises(ConfigError):
        KernelSpec(**kw)


@pytest.mark.parametrize("family", ["laplacian", "gaussian"])
def test_log_gradients_fd(family, rng):
    A = rng.normal(size=(5, 2))
    spec = KernelSpec(family, 0.8, 1.7, 0.3)
    _, grads = gram_and_log_grads(spec, A)
    h = 1e-6
    names = ("length_scale", "signal_variance", "noise_variance")
    for g, name in zip(grads, names):
        v = getattr(spec, name)
        up = gram(spec.with_params(**{name: v * np.exp(h)}), A, add_noise=True)
        dn = gram(spec.with_params(**{name: v * np.exp(-h)}), A, add_noise=True)
        np.testing.assert_allclose(g, (up - dn) / (2 * h), atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["laplacian", "gaussian"]), st.floats(0.05, 20), st.integers(2, 12), st.integers(0, 2**31))
def test_gram_is_psd(family, theta, n, seed):
    X = np.random.default_rng(seed).uniform(-5, 5, (n, 2))
    w = np.linalg.eigvalsh(gram(KernelSpec(family, theta), X))
    assert w.min() > -1e-10 * n


@pytest.mark.parametrize("family", ["laplacian", "gaussian"])
@pytest.mark.parametrize("theta,alpha", [(1.0, 0.1), (0.3, 0.2), (5.0, 1.0)])
def test_zeta_bounds_hold_on_random_perturbations(family, theta, alpha, rng):
    z, zp = rng.normal(size=2), rng.normal(size=2)
    xs = rng.normal(size=2) * 2
    b1, b2 = zeta1(family, theta, alpha, z, zp), zeta2(family, theta, alpha, z, xs)
    spec = KernelSpec(family, theta)
    for _ in range(300):
        dx, dxp = rng.normal(size=2), rng.normal(size=2)
        x = z + dx / np.linalg.norm(dx) * alpha * rng.uniform(0, 1)
        xp = zp + dxp / np.linalg.norm(dxp) * alpha * rng.uniform(0, 1)
        assert abs(kernel_eval(spec, x, xp) - kernel_eval(spec, z, zp)) <= b1 + 1e-15
        assert abs(kernel_eval(spec, x, xs) - kernel_eval(spec, z, xs)) <= b2 + 1e-15


def test_zeta_limits():
    assert zeta1("laplacian", 1.0, 1e-9, 0.0, 0.0) == pytest.approx(2e-9, rel=1e-6)
    assert zeta1("laplacian", 1.0, 50.0, 0.0, 0.0) == pytest.approx(1.0)
    assert zeta2("gaussian", 1.0, 1e-9, 0.0, 2.0) == pytest.approx(2e-9, rel=1e-6)
    with pytest.raises(ConfigError):
        zeta1("gaussian", 1.0, 0.0, 0.0, 0.0)


def test_beta_uses_widest_pair():
    Z = np.array([[0.0], [1.0], [4.0]])
    spec = KernelSpec("gaussian", 2.0, 3.0)
    expected = 3.0 * max(zeta1("gaussian", 2.0, 0.1, z, zp) for z in Z for zp in Z)
    assert beta_bound(spec, Z, 0.1) == pytest.approx(expected, rel=1e-14)
    Xs = np.array([[10.0]])
    assert beta_bound(spec, Z, 0.1, Xs) >= beta_bound(spec, Z, 0.1)
