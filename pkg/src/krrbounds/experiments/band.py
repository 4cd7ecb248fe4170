"""Regression bands along a 1-D grid for plotting."""
from __future__ import annotations

import numpy as np

from .. import noise as nm
from .. import selectors
from ..config import ExperimentConfig
from ..errors import ConfigurationError
from ..regressor import fit
from .common import Table, random_rkhs_function, run_rng

COLUMNS = ("bound", "x", "f", "mu", "sigma", "eta", "lower", "upper", "sigma_contained")


def regression_band(cfg: ExperimentConfig, jobs: int = 1) -> Table:
    """Single run at t_max points; ``sigma_contained`` flags mu +- sigma_t inside mu +- eta."""
    if cfg.domain.dim != 1:
        raise ConfigurationError("regression_band needs a 1-D domain")
    rng = run_rng(cfg, 0)
    f = random_rkhs_function(cfg.kernel, cfg.domain, int(cfg.section("function").get("centers", 10)), cfg.B, rng)
    X = cfg.domain.sample(cfg.t_max, rng)
    y = f(X) + nm.sample(cfg.noise, cfg.t_max, rng)
    state = fit(cfg.kernel, cfg.rho, X, y)
    xs, _ = cfg.domain.grid(cfg.eval_grid)
    fx = f(xs)
    sd = np.sqrt(np.asarray(state.query(xs).variance))
    rows = []
    for name in cfg.bounds:
        ev = selectors.evaluate(name, state, cfg.bound_config(name), xs, cfg.t_max, cfg.options)
        mu = selectors.predict(name, state, xs, cfg.options)
        eta = np.asarray(ev.total)
        for i in range(xs.shape[0]):
            rows.append((name, float(xs[i, 0]), float(fx[i]), float(mu[i]), float(sd[i]), float(eta[i]),
                         float(mu[i] - eta[i]), float(mu[i] + eta[i]), bool(sd[i] <= eta[i])))
    return Table(COLUMNS, rows)
