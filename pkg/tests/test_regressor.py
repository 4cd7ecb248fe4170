import math

import numpy as np
import pytest

import krrbounds.regressor as reg
from krrbounds.domain import DomainBox
from krrbounds.errors import ConfigurationError, InputError, NumericalError
from krrbounds.kernels import KernelSpec
from krrbounds.regressor import append, extend, fit, query, truncated_mean

SE = KernelSpec("se", 1.0)


def dense_alpha(k, rho, X, y):
    K = k.matrix(X, X) + rho**2 * np.eye(len(y))
    return np.linalg.solve(K, y)


def test_empty_state():
    s = fit(SE, 0.5, np.zeros((0, 1)), [])
    assert s.t == 0
    q = query(s, [0.2])
    assert (q.mean, q.variance, q.h_norm2, q.h_norm_inf, q.sigma_tilde) == (0.0, 1.0, 0.0, 0.0, 1.0)


def test_single_point_hand_values():
    s = fit(SE, 1.0, [[0.0]], [2.0])
    assert s.alpha == pytest.approx([1.0])
    q = query(s, [0.0])
    assert q.mean == pytest.approx(1.0)
    assert q.variance == pytest.approx(0.5)
    assert q.h_norm2 == pytest.approx(0.5)
    # 0.5 - 1 * 0.25 = 0.25
    assert q.sigma_tilde == pytest.approx(0.5)
    assert query(s, [0.0], correlation=[[4.0]]).h_norm_C == pytest.approx(1.0)


def test_alpha_matches_dense_solve(rng):
    X = rng.uniform(0, 3, (2, 1))
    y = rng.standard_normal(2)
    s = fit(SE, 0.3, X, y)
    assert np.allclose(s.alpha, dense_alpha(SE, 0.3, X, y), rtol=1e-12)


def test_prediction_consistency(rng):
    X = rng.uniform(0, 5, (40, 1))
    y = rng.standard_normal(40)
    s = fit(SE, 0.2, X, y)
    direct = SE.matrix(X, X) @ dense_alpha(SE, 0.2, X, y)
    assert np.allclose(query(s, X).mean, direct, rtol=1e-10)


def test_rho_validation():
    with pytest.raises(ConfigurationError):
        fit(SE, 0.0, [[0.0]], [1.0])
    with pytest.raises(InputError):
        fit(SE, 1.0, [[0.0], [1.0]], [1.0])


def test_append_equals_batch(rng):
    X = rng.uniform(0, 5, (10, 1))
    y = rng.standard_normal(10)
    s = fit(SE, 0.1, np.zeros((0, 1)), [])
    one = append(s, X[0], y[0])
    ref1 = fit(SE, 0.1, X[:1], y[:1])
    assert np.allclose(one.gram_factor, ref1.gram_factor)
    for xi, yi in zip(X, y):
        s = append(s, xi, yi)
    batch = fit(SE, 0.1, X, y)
    grid = np.linspace(0, 5, 50)
    assert np.allclose(query(s, grid).mean, query(batch, grid).mean, atol=1e-9)
    assert np.allclose(s.gram_factor, batch.gram_factor, atol=1e-10)


def test_extend_blocks(rng):
    X = rng.uniform(0, 5, (30, 2))
    y = rng.standard_normal(30)
    s = extend(extend(fit(SE, 0.2, X[:7], y[:7]), X[7:20], y[7:20]), X[20:], y[20:])
    assert np.allclose(s.alpha, fit(SE, 0.2, X, y).alpha, atol=1e-9)


def test_append_duplicate_input():
    s = fit(SE, 0.1, [[1.0]], [0.5])
    s2 = append(s, [1.0], 0.7)
    assert s2.t == 2 and np.all(np.isfinite(s2.alpha))


def test_state_is_immutable(rng):
    s = fit(SE, 0.1, rng.uniform(0, 1, (3, 1)), [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        s.alpha[0] = 5.0
    s2 = append(s, [0.5], 1.0)
    assert s.t == 3 and s2.t == 4


def test_correlation_shape_checked():
    s = fit(SE, 1.0, [[0.0]], [2.0])
    with pytest.raises(InputError):
        query(s, [0.0], correlation=np.eye(2))


def test_truncated_mean_examples(rng):
    X = rng.uniform(0, 2, (2, 1))
    y = np.array([5.0, 0.5])
    s = fit(SE, 0.3, X, y)
    assert truncated_mean(s, [10, 10], [0.4]) == pytest.approx(query(s, [0.4]).mean)
    assert truncated_mean(s, [0, 0], [0.4]) == 0.0
    expect = SE.matrix([[0.4]], X) @ dense_alpha(SE, 0.3, X, np.array([0.0, 0.5]))
    assert truncated_mean(s, [1.0, 10.0], [0.4]) == pytest.approx(float(expect[0]), rel=1e-12)
    with pytest.raises(InputError):
        truncated_mean(s, [1.0], [0.4])


def test_interpolation_limit():
    X = np.array([[0.0], [1.5], [3.0], [4.5]])
    y = np.array([1.0, -2.0, 0.5, 3.0])
    s = fit(SE, 1e-6, X, y)
    assert np.allclose(query(s, X).mean, y, atol=1e-3)


def test_variance_nonincreasing_nested(rng):
    grid = np.linspace(-1, 6, 200)
    for _ in range(10):
        X = rng.uniform(0, 5, (25, 1))
        prev = None
        for t in range(0, 26, 5):
            v = query(fit(SE, 0.3, X[:t], np.zeros(t), dim=1), grid).variance
            if prev is not None:
                assert np.all(v <= prev + 1e-10)
            prev = v


def test_norm_orderings(rng):
    X = rng.uniform(0, 5, (30, 1))
    s = fit(SE, 0.4, X, rng.standard_normal(30))
    q = query(s, np.linspace(0, 5, 300))
    assert np.all(s.rho * q.h_norm_inf <= s.rho * q.h_norm2 + 1e-15)
    assert np.all(s.rho * q.h_norm2 <= np.sqrt(q.variance) + 1e-12)
    assert np.allclose(q.sigma_tilde**2, q.variance - s.rho**2 * q.h_norm2**2, atol=1e-12)


def test_sigma_tilde_negative_radicand_raises(monkeypatch):
    s = fit(SE, 1.0, [[0.0]], [2.0])
    monkeypatch.setattr(reg, "_sigma_tilde_squared", lambda v, r, h: v - 2.0)
    with pytest.raises(NumericalError):
        query(s, [0.0])


def rkhs_residual_gap(rng, t, rho):
    Z = rng.uniform(0, 5, (rng.integers(1, 10), 1))
    c = rng.standard_normal(Z.shape[0])
    B = math.sqrt(c @ SE.matrix(Z, Z) @ c)
    X = rng.uniform(0, 5, (t, 1))
    s = fit(SE, rho, X, SE.matrix(X, Z) @ c)
    grid = np.linspace(0, 5, 500)
    q = query(s, grid)
    return np.max(np.abs(SE.matrix(grid[:, None], Z) @ c - q.mean) - B * q.sigma_tilde)


def test_noise_free_residual_bounded_by_sharpened_width(rng):
    for _ in range(20):
        assert rkhs_residual_gap(rng, int(rng.integers(0, 51)), float(rng.uniform(0.05, 1.0))) <= 1e-9


def _hoelder_gaps(rng, kernel, rho, C=None):
    dom = DomainBox((0.0,), 5.0)
    L, p = kernel.hoelder(dom)
    t = 25
    s = fit(kernel, rho, dom.sample(t, rng), rng.standard_normal(t))
    a, b = dom.sample(1000, rng), dom.sample(1000, rng)
    qa, qb = query(s, a, C), query(s, b, C)
    d = np.abs(a - b)[:, 0] ** (p / 2.0)
    gaps = [np.abs(rho * qa.h_norm2 - rho * qb.h_norm2) - math.sqrt(L / 2.0) * d,
            np.abs(rho * qa.h_norm_inf - rho * qb.h_norm_inf) - math.sqrt(L / 2.0) * d]
    if C is not None:
        sc = np.linalg.eigvalsh(C).max()
        gaps.append(np.abs(rho * qa.h_norm_C - rho * qb.h_norm_C) - math.sqrt(sc * L / 2.0) * d)
    return max(g.max() for g in gaps)


@pytest.mark.parametrize("kernel", [KernelSpec("se", 0.5), KernelSpec("matern12", 1.0), KernelSpec("matern32", 0.7)],
                         ids=lambda k: k.family)
def test_weight_norms_hoelder(kernel, rng):
    A = rng.standard_normal((25, 25))
    assert _hoelder_gaps(rng, kernel, 0.3, C=A @ A.T / 25) <= 1e-10
