"""Fast invariant checks run by ``krrbounds selftest``."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import bounds as bd
from . import noise as nm
from .domain import DomainBox
from .kernels import KernelSpec
from .regressor import fit, query

Check = Callable[[np.random.Generator], str]
TOL = 1e-9


def _kernels():
    return [KernelSpec("se", 0.7), KernelSpec("matern12", 0.5), KernelSpec("matern32", 1.3), KernelSpec("linear")]


def check_gram_psd(rng):
    for k in _kernels():
        dim = 1 if k.family == "matern32" else 2  # 1-norm Matérn-3/2 is PD only in 1-D
        for _ in range(20):
            P = rng.uniform(-2, 2, (rng.integers(2, 30), dim))
            K = k.matrix(P, P)
            floor = -1e-10 * np.trace(K)
            assert np.linalg.eigvalsh(K).min() >= floor, f"{k.family} Gram not PSD"
    return "Gram matrices PSD"


def check_kernel_hoelder(rng):
    dom = DomainBox((-2.0, -2.0), 4.0)
    for k in _kernels():
        L, p = k.hoelder(dom)
        x, a, b = (dom.sample(500, rng) for _ in range(3))
        lhs = np.abs(np.diag(k.matrix(x, a)) - np.diag(k.matrix(x, b)))
        rhs = L * np.linalg.norm(a - b, axis=1) ** p + 1e-12
        assert np.all(lhs <= rhs), f"{k.family} violates its Hölder constant"
    return "kernel Hölder constants"


def _instance(rng, t=12, rho=0.5):
    k = KernelSpec("se", 0.8)
    X = rng.uniform(0, 4, (t, 1))
    return k, fit(k, rho, X, rng.standard_normal(t))


def check_sigma_tilde_identity(rng):
    k, st = _instance(rng)
    xs = np.linspace(0, 4, 50)
    q = query(st, xs)
    H = st.weights(xs)
    kq = k.matrix(st.inputs, xs[:, None])
    K = k.matrix(st.inputs, st.inputs)
    # squared RKHS distance between k(., x) and sum_i h_i k(., x_i)
    direct = 1.0 - 2.0 * np.einsum("ij,ij->j", kq, H) + np.einsum("ij,ik,kj->j", H, K, H)
    assert np.allclose(q.sigma_tilde**2, np.maximum(direct, 0), atol=TOL), "sharpened width mismatch"
    return "sharpened width identity"


def check_deterministic_residual(rng):
    k = KernelSpec("se", 0.8)
    Z = rng.uniform(0, 4, (6, 1))
    c = rng.standard_normal(6)
    B = math.sqrt(c @ k.matrix(Z, Z) @ c)
    X = rng.uniform(0, 4, (15, 1))
    st = fit(k, 0.3, X, k.matrix(X, Z) @ c)
    xs = np.linspace(0, 4, 200)
    q = query(st, xs)
    gap = np.abs(k.matrix(xs[:, None], Z) @ c - q.mean) - B * q.sigma_tilde
    assert gap.max() <= TOL, f"noise-free residual exceeds B * sigma_tilde by {gap.max():.2e}"
    return "noise-free residual bound"


def check_decomposition(rng):
    _, st = _instance(rng)
    dom = DomainBox((0.0,), 4.0)
    xs = np.linspace(0, 4, 30)
    models = [nm.SubGaussian(0.04), nm.Bounded(0.2, 0.01), nm.SubExponential(0.04, 0.02), nm.VarianceBounded(0.04)]
    for m in models:
        rule = bd.GridRule("weighted", 100.0) if m.kind == "variance_bounded" else bd.GridRule()
        ev = bd.noise_bound_uniform(st, bd.BoundConfig(m, dom, grid_rule=rule), xs)
        assert np.allclose(ev.total, ev.exploration + ev.noise_term, rtol=1e-14), m.kind
        assert np.all(ev.noise_term >= ev.discretization) and np.all(ev.discretization >= 0), m.kind
    return "bound decomposition"


def check_reductions(rng):
    _, st = _instance(rng)
    dom = DomainBox((0.0,), 4.0)
    xs = np.linspace(0, 4, 30)
    rule = bd.GridRule("fixed_zeta", 1e-3)
    sg = bd.bound_sub_gaussian(st, bd.BoundConfig(nm.SubGaussian(0.09), dom, grid_rule=rule), xs)
    se = bd.bound_sub_exponential(st, bd.BoundConfig(nm.SubExponential(0.09, 0.0), dom, grid_rule=rule), xs)
    corr = bd.noise_bound_correlated(
        st, bd.BoundConfig(nm.CorrelatedSubGaussian(0.09 * np.eye(st.t)), dom, grid_rule=rule), xs)
    assert np.allclose(se.noise_term, sg.noise_term, rtol=1e-12, atol=0), "sub-exponential reduction"
    assert np.allclose(corr.noise_term, sg.noise_term, rtol=1e-12, atol=0), "correlated reduction"
    return "class reductions"


def check_covering(rng):
    assert bd.covering_upper_bound(DomainBox((0.0,), 10.0), 0.5) == 11.0
    assert abs(bd.covering_upper_bound(DomainBox((0.0, 0.0), 10.0), math.sqrt(2.0)) - 36.0) < 1e-12
    return "covering numbers"


def check_zeta_solver(rng):
    dom = DomainBox((0.0,), 10.0)
    cfg = bd.BoundConfig(nm.SubGaussian(0.01), dom).for_kernel(KernelSpec("se", 1.0))
    for t in (1, 10, 300):
        z = bd.solve_zeta_for_delta(cfg, 0.1, t, 1e-3)
        assert abs(bd.discretization(cfg, 0.1, t, z, "sg") / 1e-3 - 1) <= 1e-9
    return "grid-constant solver"


CHECKS: list[Check] = [
    check_gram_psd, check_kernel_hoelder, check_sigma_tilde_identity, check_deterministic_residual,
    check_decomposition, check_reductions, check_covering, check_zeta_solver,
]


def run_selftest(seed: int = 0, echo=print) -> int:
    """Run every check; 0 when all pass, 1 otherwise."""
    failed = 0
    for chk in CHECKS:
        rng = np.random.default_rng(seed)
        try:
            label = chk(rng)
            echo(f"ok    {label}")
        except Exception as exc:  # a broken invariant may surface as any exception
            failed += 1
            echo(f"FAIL  {chk.__name__}: {exc}")
    return 1 if failed else 0
