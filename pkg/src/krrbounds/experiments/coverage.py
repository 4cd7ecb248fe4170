"""Monte-Carlo check that bounds hold jointly over the grid and all checkpoints."""
from __future__ import annotations

import math

import numpy as np

from .. import noise as nm
from .. import selectors
from ..config import ExperimentConfig
from ..regressor import extend, fit
from .common import Table, map_runs, random_rkhs_function, run_rng

COLUMNS = ("bound", "runs", "violating_runs", "violation_fraction", "allowed_fraction",
           "pointwise_violation_rate")


def coverage_for_run(cfg: ExperimentConfig, run: int) -> np.ndarray:
    """Per bound: [any violation, violating (x, t) pairs, tested pairs]."""
    rng = run_rng(cfg, run)
    fsec = cfg.section("function")
    f = random_rkhs_function(cfg.kernel, cfg.domain, int(fsec.get("centers", 10)), cfg.B, rng)
    X = cfg.domain.sample(cfg.t_max, rng)
    y = f(X) + nm.sample(cfg.noise, cfg.t_max, rng)
    grid, _ = cfg.domain.grid(cfg.eval_grid)
    f_grid = f(grid)
    out = np.zeros((len(cfg.bounds), 3))
    state = fit(cfg.kernel, cfg.rho, np.zeros((0, cfg.domain.dim)), [], dim=cfg.domain.dim)
    for t in cfg.checkpoints:
        state = extend(state, X[state.t:t], y[state.t:t])
        for i, name in enumerate(cfg.bounds):
            ev = selectors.evaluate(name, state, cfg.bound_config(name), grid, t, cfg.options)
            mu = selectors.predict(name, state, grid, cfg.options)
            bad = np.abs(f_grid - mu) > np.asarray(ev.total)
            out[i, 0] = max(out[i, 0], float(bad.any()))
            out[i, 1] += bad.sum()
            out[i, 2] += bad.size
    return out


def allowed_violation_fraction(delta: float, runs: int) -> float:
    """delta plus three binomial standard errors."""
    return delta + 3.0 * math.sqrt(delta * (1.0 - delta) / runs)


def coverage(cfg: ExperimentConfig, jobs: int = 1) -> Table:
    per_run = np.stack(map_runs(coverage_for_run, cfg, jobs))
    rows = []
    for i, name in enumerate(cfg.bounds):
        bad_runs = int(per_run[:, i, 0].sum())
        rate = float(per_run[:, i, 1].sum() / per_run[:, i, 2].sum())
        rows.append((name, cfg.runs, bad_runs, bad_runs / cfg.runs,
                     allowed_violation_fraction(cfg.delta, cfg.runs), rate))
    return Table(COLUMNS, rows)
