"""Experiment harnesses. Each returns one or more ``Table`` objects keyed by file stem."""
from __future__ import annotations

from ..config import ExperimentConfig
from .band import regression_band
from .common import RKHSFunction, Table, random_rkhs_function
from .control import SafeControlSpec, safe_control, solve_controls
from .coverage import coverage
from .decay import param_decay
from .region import region_size


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> dict[str, Table]:
    if cfg.experiment == "region_size":
        return {"region_size": region_size(cfg, jobs)}
    if cfg.experiment == "regression_band":
        return {"regression_band": regression_band(cfg, jobs)}
    if cfg.experiment == "safe_control":
        success, cost = safe_control(cfg, jobs)
        return {"safe_control": success, "safe_control_cost": cost}
    if cfg.experiment == "coverage":
        return {"coverage": coverage(cfg, jobs)}
    return {"param_decay": param_decay(cfg, jobs)}


__all__ = [
    "RKHSFunction", "SafeControlSpec", "Table", "coverage", "param_decay", "random_rkhs_function",
    "region_size", "regression_band", "run_experiment", "safe_control", "solve_controls",
]
