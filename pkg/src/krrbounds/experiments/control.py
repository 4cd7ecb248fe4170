"""Safe one-step control of a scalar system with a learned residual.

Dynamics x+ = f_nom(x, u) + f(x) with f_nom known and f learned. The
safety constraint x+ >= slope * x is enforced with the learned mean
tightened by the error bound; cost is x+^2 + u^2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import noise as nm
from .. import selectors
from ..config import ExperimentConfig
from ..regressor import extend, fit
from .common import Table, map_runs, run_rng

SUCCESS_COLUMNS = ("bound", "t", "success_rate", "p05", "p95")
COST_COLUMNS = ("bound", "x", "feasible", "u", "inferred_cost")


@dataclass(frozen=True)
class SafeControlSpec:
    slope: float = 0.05
    u_limit: float = 2.05
    x_limit: float = 2.0
    test_points: int = 1000
    control_grid: int = 4097

    @staticmethod
    def nominal(x, u):
        return 0.5 * x + u - 1.0

    @staticmethod
    def residual(x):
        return np.exp(-np.square(x)) * np.sin(10.0 * x)

    def test_states(self) -> np.ndarray:
        return np.linspace(-self.x_limit, self.x_limit, self.test_points)

    def controls(self) -> np.ndarray:
        return np.linspace(-self.u_limit, self.u_limit, self.control_grid)


def spec_from(cfg: ExperimentConfig) -> SafeControlSpec:
    sec = cfg.section("safe_control")
    allowed = set(SafeControlSpec.__dataclass_fields__)
    unknown = set(sec) - allowed
    if unknown:
        from ..errors import ConfigurationError
        raise ConfigurationError(f"unknown safe_control keys: {', '.join(sorted(unknown))}")
    return SafeControlSpec(**sec)


def solve_controls(spec: SafeControlSpec, x: np.ndarray, mu: np.ndarray, eta: np.ndarray):
    """Grid search per state: (feasible, u*) under the tightened constraint, minimizing plug-in cost."""
    u = spec.controls()[None, :]
    xc = x[:, None]
    pred = spec.nominal(xc, u) + mu[:, None]
    ok = pred - eta[:, None] >= spec.slope * xc
    cost = np.where(ok, pred**2 + u**2, np.inf)
    idx = np.argmin(cost, axis=1)
    feasible = ok.any(axis=1)
    u_star = np.where(feasible, u[0, idx], np.nan)
    return feasible, u_star


def inferred_cost(spec: SafeControlSpec, x, u_star):
    return (spec.nominal(x, u_star) + spec.residual(x)) ** 2 + u_star**2


def control_run(cfg: ExperimentConfig, run: int):
    spec = spec_from(cfg)
    rng = run_rng(cfg, run)
    X = cfg.domain.sample(cfg.t_max, rng)
    y = spec.residual(X[:, 0]) + nm.sample(cfg.noise, cfg.t_max, rng)
    xs = spec.test_states()
    rates = np.empty((len(cfg.bounds), len(cfg.checkpoints)))
    final = []
    state = fit(cfg.kernel, cfg.rho, np.zeros((0, 1)), [], dim=1)
    for j, t in enumerate(cfg.checkpoints):
        state = extend(state, X[state.t:t], y[state.t:t])
        for i, name in enumerate(cfg.bounds):
            ev = selectors.evaluate(name, state, cfg.bound_config(name), xs, t, cfg.options)
            mu = selectors.predict(name, state, xs, cfg.options)
            feasible, u_star = solve_controls(spec, xs, mu, np.asarray(ev.total))
            rates[i, j] = feasible.mean()
            if j == len(cfg.checkpoints) - 1:
                final.append((feasible, u_star))
    return rates, final


def safe_control(cfg: ExperimentConfig, jobs: int = 1) -> tuple[Table, Table]:
    """Success rate per (bound, t) across runs, and per-state costs at the final t of run 0."""
    spec = spec_from(cfg)
    results = map_runs(control_run, cfg, jobs)
    rates = np.stack([r[0] for r in results])
    rows = []
    for i, name in enumerate(cfg.bounds):
        for j, t in enumerate(cfg.checkpoints):
            v = rates[:, i, j]
            p05, p95 = np.percentile(v, [5, 95])
            rows.append((name, t, float(v.mean()), float(p05), float(p95)))
    xs = spec.test_states()
    cost_rows = []
    # reference: true residual, no tightening
    feas, u_opt = solve_controls(spec, xs, spec.residual(xs), np.zeros_like(xs))
    for x, ok, u in zip(xs, feas, u_opt):
        cost_rows.append(("oracle", float(x), bool(ok), float(u), float(inferred_cost(spec, x, u))))
    for name, (feasible, u_star) in zip(cfg.bounds, results[0][1]):
        for x, ok, u in zip(xs, feasible, u_star):
            c = float(inferred_cost(spec, x, u)) if ok else float("nan")
            cost_rows.append((name, float(x), bool(ok), float(u), c))
    return Table(SUCCESS_COLUMNS, rows), Table(COST_COLUMNS, cost_rows)
