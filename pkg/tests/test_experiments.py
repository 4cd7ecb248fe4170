import math

import numpy as np
import pytest

from krrbounds import bounds as bd
from krrbounds import noise as nm
from krrbounds.config import from_dict
from krrbounds.experiments import SafeControlSpec, run_experiment, solve_controls
from krrbounds.experiments.region import region_size
from krrbounds.regressor import fit

BASE = dict(kernel={"family": "se", "lengthscale": 1.0}, domain={"interval": [0.0, 10.0]}, rho=0.1, delta=0.001)


def make(**kw):
    return from_dict({**BASE, **kw})


def test_region_size_hand_trapezoid():
    cfg = make(experiment="region_size", runs=1, t_max=1, checkpoints=[1], eval_grid=3, bounds=["sg"],
               noise={"class": "sub_gaussian", "sigma2": 0.01}, B=5.0, seed=4)
    got = region_size(cfg).where(bound="sg", t=1)[0]["mean"]
    rng = np.random.default_rng([4, 0])
    X = 10.0 * rng.random((1, 1))
    y = 0.1 * rng.standard_normal(1)
    st = fit(cfg.kernel, 0.1, X, y)
    ev = bd.bound_sub_gaussian(st, cfg.bound_config("sg"), np.array([0.0, 5.0, 10.0]), 1)
    v = 2 * ev.total
    assert got == pytest.approx(5.0 / 2 * (v[0] + 2 * v[1] + v[2]), rel=1e-12)


def test_region_size_zero():
    cfg = make(experiment="region_size", runs=2, t_max=5, checkpoints=[0, 5], eval_grid=11, bounds=["sg"],
               noise={"class": "sub_gaussian", "sigma2": 0.0}, B=0.0)
    assert all(r["mean"] == 0.0 for r in region_size(cfg).where(bound="sg"))


def test_region_size_decreasing_for_sg():
    cfg = make(experiment="region_size", runs=5, t_max=200, checkpoints=[1, 5, 20, 50, 100, 200], eval_grid=200,
               bounds=["sg"], noise={"class": "bounded", "m_bar": 0.1}, B=5.0)
    means = [r["mean"] for r in region_size(cfg).where(bound="sg")]
    assert all(b <= a * 1.05 for a, b in zip(means, means[1:]))


def band_config(t_max):
    return make(experiment="regression_band", runs=1, t_max=t_max, eval_grid=200, bounds=["sg", "abbasi"], B=5.0,
                noise={"class": "sub_gaussian", "sigma2": 0.01}, seed=2)


def test_regression_band_containment():
    rows = run_experiment(band_config(30))["regression_band"].where(bound="sg")
    assert all(r["sigma_contained"] for r in rows)
    assert all(r["lower"] <= r["mu"] <= r["upper"] for r in rows)


def test_band_narrower_where_data_is_dense(rng):
    cfg = band_config(30)
    X = rng.uniform(2.0, 3.0, (30, 1))
    st = fit(cfg.kernel, cfg.rho, X, rng.normal(0, 0.1, 30))
    ev = bd.bound_sub_gaussian(st, cfg.bound_config("sg"), np.array([2.5, 9.0]))
    assert ev.total[0] < ev.total[1]


def test_regression_band_without_noise_stays_within_prior_width():
    cfg = make(experiment="regression_band", runs=1, t_max=1, checkpoints=[1], eval_grid=20, bounds=["sg"], B=5.0,
               noise={"class": "sub_gaussian", "sigma2": 0.0})
    rows = run_experiment(cfg)["regression_band"].where(bound="sg")
    assert all(r["eta"] <= 5.0 + 1e-12 for r in rows)


def test_safe_control_constants():
    s = SafeControlSpec()
    assert SafeControlSpec.residual(0.0) == 0.0 and SafeControlSpec.nominal(0.0, 1.0) == 0.0
    assert (s.slope, s.u_limit, s.x_limit, s.test_points) == (0.05, 2.05, 2.0, 1000)


def test_oracle_model_always_feasible():
    s = SafeControlSpec()
    xs = np.linspace(-2, 2, 20001)
    # dense oracle: the best admissible input is the upper limit
    margin = s.nominal(xs, s.u_limit) + s.residual(xs) - s.slope * xs
    assert margin.min() > 0
    feas, _ = solve_controls(s, s.test_states(), s.residual(s.test_states()), np.zeros(1000))
    assert feas.all()


def test_solve_controls_matches_closed_form(rng):
    s = SafeControlSpec(control_grid=200001)
    x = rng.uniform(-2, 2, 50)
    mu = rng.normal(0, 0.3, 50)
    eta = rng.uniform(0, 0.5, 50)
    feas, u = solve_controls(s, x, mu, eta)
    u_min = s.slope * x - 0.5 * x + 1 - mu + eta
    u_free = -(0.5 * x - 1 + mu) / 2  # minimizer of (0.5x + u - 1 + mu)^2 + u^2
    expect = np.clip(np.maximum(u_free, u_min), -2.05, 2.05)
    assert np.array_equal(feas, u_min <= 2.05)
    assert np.allclose(u[feas], expect[feas], atol=1e-4)


def test_coverage_zero_noise():
    cfg = make(experiment="coverage", runs=10, t_max=30, checkpoints=[3, 30], eval_grid=50, bounds=["sg", "abbasi"],
               noise={"class": "sub_gaussian", "sigma2": 0.0}, B=1.0, delta=0.05)
    tab = run_experiment(cfg)["coverage"]
    assert all(v == 0 for v in tab.column("violating_runs"))


def test_param_decay_rows():
    cfg = make(experiment="param_decay", runs=10, t_max=512, checkpoints=[0, 64, 128, 256, 512],
               domain={"interval": [-1.0, 1.0]}, noise={"class": "sub_gaussian", "sigma2": 0.01}, B=1.0,
               features={"model": "polynomial", "degree": 3})
    tab = run_experiment(cfg)["param_decay"]
    first = tab.where(t=0)[0]
    assert first["A_norm"] == 1.0 and first["A_tilde_norm"] == 0.0
    a = {r["t"]: r["A_norm"] for r in tab.where()}
    for t in (64, 128, 256):
        assert 0.3 <= a[2 * t] / a[t] <= 0.7
    assert max(tab.column("violation_fraction")) <= 0.05


def test_parallel_matches_serial():
    cfg = make(experiment="region_size", runs=6, t_max=40, checkpoints=[10, 40], eval_grid=50, bounds=["sg", "fiedler"],
               noise={"class": "sub_gaussian", "sigma2": 0.01}, B=2.0, seed=9)
    assert region_size(cfg, jobs=1).to_csv() == region_size(cfg, jobs=2).to_csv()
