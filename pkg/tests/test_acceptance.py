"""End-to-end acceptance checks; each prints one PASS/FAIL line."""
import hashlib
import math
import os
import time
from pathlib import Path

import numpy as np
import pytest

from krrbounds import bounds as bd
from krrbounds import noise as nm
from krrbounds.cli import main
from krrbounds.config import load_config, with_overrides
from krrbounds.domain import DomainBox
from krrbounds.experiments import run_experiment
from krrbounds.kernels import KernelSpec
from krrbounds.params import information_operators, polynomial, random_fourier
from krrbounds.regressor import fit, query

from conftest import ACCEPTANCE_LINES

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
JOBS = os.cpu_count() or 1


def record(number: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_noise_free_residual():
    rng = np.random.default_rng(101)
    k = KernelSpec("se", 0.8)
    grid = np.linspace(0.0, 5.0, 500)
    start, worst = time.perf_counter(), -math.inf
    for _ in range(50):
        Z = rng.uniform(0, 5, (int(rng.integers(1, 11)), 1))
        c = rng.standard_normal(len(Z))
        B = math.sqrt(c @ k.matrix(Z, Z) @ c)
        t = int(rng.integers(1, 51))
        X = rng.uniform(0, 5, (t, 1))
        q = query(fit(k, float(rng.uniform(0.05, 1.0)), X, k.matrix(X, Z) @ c), grid)
        f = k.matrix(grid[:, None], Z) @ c
        worst = max(worst, float(np.max(np.abs(f - q.mean) - B * q.sigma_tilde)))
    elapsed = time.perf_counter() - start
    record(1, worst <= 1e-9 and elapsed < 10, f"max(|f-mu| - B*sigma_tilde) = {worst:.3e} over 50 functions "
           f"({elapsed:.2f}s)")


@pytest.mark.slow
@pytest.mark.parametrize("stem,bound", [("coverage_sub_gaussian", "sg"), ("coverage_bounded", "bnd"),
                                        ("coverage_sub_exponential", "se"),
                                        ("coverage_variance_bounded", "l2")])
def test_criterion_02_coverage(stem, bound):
    cfg = with_overrides(load_config(CONFIGS / f"{stem}.json"), bounds=(bound,))
    assert (cfg.runs, cfg.delta, cfg.checkpoints, cfg.eval_grid) == (500, 0.05, (10, 50, 100), 200)
    start = time.perf_counter()
    row = run_experiment(cfg, jobs=JOBS)["coverage"].where(bound=bound)[0]
    elapsed = time.perf_counter() - start
    ok = row["violation_fraction"] <= 0.08 and elapsed < 600
    record(2, ok, f"{cfg.noise.kind}/{bound}: joint violation fraction {row['violation_fraction']:.3f} "
           f"over {row['runs']} runs (limit 0.08, {elapsed:.1f}s)")


def test_criterion_03_reductions():
    rng = np.random.default_rng(3)
    dom = DomainBox((0.0,), 5.0)
    k = KernelSpec("se", 1.0)
    st = fit(k, 0.1, dom.sample(40, rng), rng.standard_normal(40))
    xs = np.linspace(0, 5, 101)
    rule = bd.GridRule("fixed_zeta", 0.01)

    def noise_term(fn, model):
        return fn(st, bd.BoundConfig(model, dom, grid_rule=rule).for_kernel(k), xs).noise_term

    sg = noise_term(bd.bound_sub_gaussian, nm.SubGaussian(0.01))
    se = noise_term(bd.bound_sub_exponential, nm.SubExponential(0.01, 0.0))
    corr = noise_term(bd.noise_bound_correlated, nm.CorrelatedSubGaussian(0.01 * np.eye(40)))
    err = max(np.max(np.abs(se / sg - 1)), np.max(np.abs(corr / sg - 1)))
    record(3, err <= 1e-12, f"sub-exponential and correlated reductions agree with sub-Gaussian to {err:.1e}")


@pytest.mark.slow
def test_criterion_04_region_ordering():
    cfg = load_config(CONFIGS / "region_size_bounded.json")
    assert (cfg.runs, cfg.t_max) == (20, 300)
    start = time.perf_counter()
    tab = run_experiment(with_overrides(cfg, bounds=("sg", "abbasi", "fiedler")), jobs=JOBS)["region_size"]
    elapsed = time.perf_counter() - start
    med = {r["bound"]: r["median"] for r in tab.where(t=300)}
    ok = med["sg"] < med["abbasi"] and med["fiedler"] > med["sg"] and elapsed < 300
    record(4, ok, f"median region size at t=300: sg {med['sg']:.3f}, abbasi {med['abbasi']:.3f}, "
           f"fiedler {med['fiedler']:.3f} ({elapsed:.1f}s)")


@pytest.mark.slow
def test_criterion_05_safe_control():
    cfg = load_config(CONFIGS / "safe_control_subexp.json")
    start = time.perf_counter()
    tab = run_experiment(cfg, jobs=JOBS)["safe_control"]
    elapsed = time.perf_counter() - start
    rate = {r["bound"]: r["success_rate"] for r in tab.where(t=1000)}
    ok = 0.55 <= rate["se"] <= 0.85 and rate["l2"] == 0 and rate["chowdhury"] == 0 and elapsed < 600
    record(5, ok, f"success at t=1000: se {rate['se']:.3f}, l2 {rate['l2']:.3f}, "
           f"chowdhury {rate['chowdhury']:.3f} ({elapsed:.1f}s)")


def test_criterion_06_weight_norm_hoelder():
    rng = np.random.default_rng(6)
    dom = DomainBox((0.0,), 5.0)
    start, worst = time.perf_counter(), -math.inf
    for i in range(10):
        k = [KernelSpec("se", 0.5), KernelSpec("matern12", 1.0), KernelSpec("matern32", 0.7)][i % 3]
        L, p = k.hoelder(dom)
        rho = float(rng.uniform(0.05, 1.0))
        t = int(rng.integers(1, 60))
        A = rng.standard_normal((t, t))
        C = A @ A.T / t
        s = fit(k, rho, dom.sample(t, rng), rng.standard_normal(t))
        a, b = dom.sample(100, rng), dom.sample(100, rng)
        qa, qb = query(s, a, C), query(s, b, C)
        lip = math.sqrt(L / 2.0) * np.abs(a - b)[:, 0] ** (p / 2.0)
        scale_C = math.sqrt(np.linalg.eigvalsh(C).max())
        for na, nb, factor in ((qa.h_norm2, qb.h_norm2, 1.0), (qa.h_norm_inf, qb.h_norm_inf, 1.0),
                               (qa.h_norm_C, qb.h_norm_C, scale_C)):
            worst = max(worst, float(np.max(rho * np.abs(na - nb) - factor * lip)))
    elapsed = time.perf_counter() - start
    record(6, worst <= 1e-10 and elapsed < 30,
           f"largest Hölder excess {worst:.2e} on 1000 pairs over 10 datasets ({elapsed:.2f}s)")


def test_criterion_07_information_spectrum():
    rng = np.random.default_rng(7)
    start, failures = time.perf_counter(), []
    for i in range(20):
        model = polynomial(int(rng.integers(1, 6))) if i % 2 else random_fourier(int(rng.integers(3, 40)), 0.5, i)
        rho = float(rng.uniform(0.05, 1.0))
        X = rng.uniform(-1, 1, (int(rng.integers(0, 80)), 1))
        A, At = information_operators(model, rho, X)
        Phi = model.design(X) if len(X) else np.zeros((model.n_phi, 0))
        At_direct = A @ Phi @ Phi.T @ A / rho**2
        ea, et = np.linalg.eigvalsh(A), np.linalg.eigvalsh(At)
        if not (ea.min() > 0 and ea.max() <= 1 + 1e-12 and et.min() >= -1e-10 and et.max() <= 0.25 + 1e-10
                and np.linalg.norm(At - At_direct, 2) <= 1e-9):
            failures.append(i)
    elapsed = time.perf_counter() - start
    record(7, not failures and elapsed < 10, f"eigenvalue invariants on 20 feature datasets, "
           f"failures {failures} ({elapsed:.2f}s)")


def test_criterion_08_covering_values():
    a = bd.covering_upper_bound(DomainBox((0.0,), 10.0), 0.5)
    b = bd.covering_upper_bound(DomainBox((0.0, 0.0), 10.0), math.sqrt(2.0))
    record(8, a == 11 and b == 36, f"covering bounds {a!r} and {b!r}")


def test_criterion_09_zeta_solver():
    rng = np.random.default_rng(9)
    start, worst = time.perf_counter(), 0.0
    kernels = [KernelSpec("se", 1.0), KernelSpec("matern12", 0.5), KernelSpec("matern32", 2.0)]
    for i in range(100):
        dim = 1 if kernels[i % 3].family == "matern32" else int(rng.integers(1, 4))
        dom = DomainBox(tuple(rng.uniform(-5, 5, dim)), float(rng.uniform(0.5, 20)))
        model = nm.SubGaussian(float(rng.uniform(1e-4, 1.0)))
        cfg = bd.BoundConfig(model, dom, delta=float(10 ** rng.uniform(-4, -1))).for_kernel(kernels[i % 3])
        rho, t = float(rng.uniform(0.01, 1.0)), int(rng.integers(1, 5000))
        target = float(10 ** rng.uniform(-6, -1))
        z = bd.solve_zeta_for_delta(cfg, rho, t, target)
        worst = max(worst, abs(bd.discretization(cfg, rho, t, z, "sg") / target - 1))
    elapsed = time.perf_counter() - start
    record(9, worst <= 1e-9 and elapsed < 5,
           f"max relative target error {worst:.1e} over 100 configurations ({elapsed:.2f}s)")


def _small_configs(tmp_path):
    cases = {
        "region_size_bounded.json": dict(runs=3, t_max=30, checkpoints=(3, 30), eval_grid=50),
        "coverage_sub_gaussian.json": dict(runs=6, t_max=20, checkpoints=(10, 20), eval_grid=40),
        "safe_control_subexp.json": dict(runs=2, t_max=40, checkpoints=(20, 40)),
        "regression_band.json": dict(),
        "param_decay.json": dict(runs=4, t_max=64, checkpoints=(0, 16, 64)),
    }
    for name, kw in cases.items():
        yield with_overrides(load_config(CONFIGS / name), **kw)


def _digests(out: Path) -> dict:
    return {p.relative_to(out).as_posix(): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(out.rglob("*.csv"))}


def test_criterion_10_determinism(tmp_path, monkeypatch):
    import json

    seen = []
    for idx, cfg in enumerate(_small_configs(tmp_path)):
        path = tmp_path / f"cfg{idx}.json"
        path.write_text(json.dumps(cfg.effective()))
        for rep, jobs in (("a", "1"), ("b", str(min(JOBS, 4)))):
            monkeypatch.setenv("KC_OUTPUT_DIR", str(tmp_path / rep))
            assert main(["run", str(path), "--jobs", jobs]) == 0
        seen.append(cfg.experiment)
    a, b = _digests(tmp_path / "a"), _digests(tmp_path / "b")
    record(10, a == b and len(a) >= 6, f"{len(a)} CSVs from {', '.join(seen)} byte-identical across two runs")
