"""Decay of the parameter-error bound under persistently exciting random inputs."""
from __future__ import annotations

import numpy as np

from .. import noise as nm
from ..config import ExperimentConfig
from ..errors import ConfigurationError
from ..params import FEATURE_MODELS, FeatureModel, param_bound
from .common import Table, map_runs, run_rng

COLUMNS = ("t", "A_norm", "A_tilde_norm", "eta_theta", "error", "violation_fraction")


def feature_model(cfg: ExperimentConfig) -> FeatureModel:
    sec = dict(cfg.section("features") or {"model": "polynomial", "degree": 3})
    name = sec.pop("model", "polynomial")
    if name not in FEATURE_MODELS:
        raise ConfigurationError(f"unknown feature model {name!r}; valid: {', '.join(FEATURE_MODELS)}")
    if name == "random_fourier":
        sec.setdefault("seed", cfg.seed)
        sec.setdefault("dim", cfg.domain.dim)
    return FEATURE_MODELS[name](**sec)


def decay_run(cfg: ExperimentConfig, run: int) -> np.ndarray:
    model = feature_model(cfg)
    rng = run_rng(cfg, run)
    theta = rng.standard_normal(model.n_phi)
    theta *= cfg.B / np.linalg.norm(theta)
    X = cfg.domain.sample(cfg.t_max, rng)
    y = model.design(X).T @ theta + nm.sample(cfg.noise, cfg.t_max, rng)
    bcfg = cfg.bound_config()
    out = np.empty((len(cfg.checkpoints), 5))
    for j, t in enumerate(cfg.checkpoints):
        res = param_bound(model, bcfg, cfg.rho, X[:t], y[:t])
        err = float(np.linalg.norm(theta - res.theta_hat))
        out[j] = (res.A_norm, res.A_tilde_norm, res.eta_theta, err, float(err > res.eta_theta))
    return out


def param_decay(cfg: ExperimentConfig, jobs: int = 1) -> Table:
    per_run = np.stack(map_runs(decay_run, cfg, jobs))
    med = np.median(per_run, axis=0)
    viol = per_run[:, :, 4].mean(axis=0)
    rows = [(t, *map(float, med[j, :4]), float(viol[j])) for j, t in enumerate(cfg.checkpoints)]
    return Table(COLUMNS, rows)
