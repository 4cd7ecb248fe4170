"""Size of the uncertainty region: integral of 2 * eta over the domain."""
from __future__ import annotations

import numpy as np

from .. import noise as nm
from .. import selectors
from ..config import ExperimentConfig
from ..regressor import extend, fit
from .common import Table, map_runs, run_rng, trapezoid_nd

COLUMNS = ("bound", "t", "mean", "p05", "median", "p95")


def region_sizes_for_run(cfg: ExperimentConfig, run: int) -> np.ndarray:
    """Array (n_bounds, n_checkpoints) of region sizes for one data-collection run."""
    rng = run_rng(cfg, run)
    X = cfg.domain.sample(cfg.t_max, rng)
    # widths do not depend on outputs; the zero function keeps the draw honest
    y = nm.sample(cfg.noise, cfg.t_max, rng)
    grid, axes = cfg.domain.grid(cfg.eval_grid)
    out = np.empty((len(cfg.bounds), len(cfg.checkpoints)))
    state = fit(cfg.kernel, cfg.rho, np.zeros((0, cfg.domain.dim)), [], dim=cfg.domain.dim)
    for j, t in enumerate(cfg.checkpoints):
        state = extend(state, X[state.t:t], y[state.t:t])
        for i, name in enumerate(cfg.bounds):
            ev = selectors.evaluate(name, state, cfg.bound_config(name), grid, t, cfg.options)
            out[i, j] = trapezoid_nd(2.0 * np.asarray(ev.total), axes)
    return out


def region_size(cfg: ExperimentConfig, jobs: int = 1) -> Table:
    per_run = np.stack(map_runs(region_sizes_for_run, cfg, jobs))  # (runs, bounds, checkpoints)
    rows = []
    for i, name in enumerate(cfg.bounds):
        for j, t in enumerate(cfg.checkpoints):
            v = per_run[:, i, j]
            p05, med, p95 = np.percentile(v, [5, 50, 95])
            rows.append((name, t, float(v.mean()), float(p05), float(med), float(p95)))
    return Table(COLUMNS, rows)
