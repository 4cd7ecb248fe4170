"""Comparison bounds from the literature, in their closed forms.

All three use the ordinary posterior standard deviation sigma_t in the
exploration term, not the sharpened width.
"""
from __future__ import annotations

import math

import numpy as np

from . import noise as nm
from .bounds import BoundConfig, BoundEvaluation, _pack, _setup
from .errors import ConfigurationError
from .regressor import RegressorState


def _log_det_term(state: RegressorState, delta: float) -> float:
    return math.sqrt(2.0 * state.log_det_scaled() + 2.0 * math.log(1.0 / delta))


def abbasi_yadkori(state: RegressorState, config: BoundConfig, x, t=None) -> BoundEvaluation:
    """Self-normalized bound: noise term proportional to sigma_t via log det(I + K / rho^2)."""
    cfg, q, t = _setup(state, config, x, t)
    sigma_m = nm.sub_gaussian_scale(cfg.noise)
    sd = np.sqrt(np.asarray(q.variance))
    beta = sigma_m / state.rho * _log_det_term(state, cfg.delta)
    return _pack(cfg.B * sd, beta * sd, beta, 0.0, "abbasi", None)


def fiedler_scaling(t: int, config: BoundConfig) -> float:
    if t == 0:
        return 0.0
    lg = config.time_mode.log_pi(t) - math.log(config.delta)
    return math.sqrt(t + 2.0 * math.sqrt(t * lg) + 2.0 * lg)


def fiedler_time_uniform(state: RegressorState, config: BoundConfig, x, t=None) -> BoundEvaluation:
    """Chi-square-type bound with the confidence split over time by pi_t."""
    cfg, q, t = _setup(state, config, x, t)
    sigma_m = nm.sub_gaussian_scale(cfg.noise)
    beta = fiedler_scaling(t, cfg)
    sd = np.sqrt(np.asarray(q.variance))
    return _pack(cfg.B * sd, beta * sigma_m * np.asarray(q.h_norm2), beta, 0.0, "fiedler", None)


def chowdhury_levels(v_bar: float, t: int) -> np.ndarray:
    """Truncation levels v_bar * i^(1/4), i = 1..t."""
    return v_bar * np.arange(1, t + 1, dtype=float) ** 0.25


def chowdhury_gopalan(state: RegressorState, config: BoundConfig, x, t=None, v_bar: float = 1.0) -> BoundEvaluation:
    """Bound for the truncated predictor; requires k(x, x) <= 1."""
    if v_bar < 0:
        raise ConfigurationError("v_bar must be nonnegative")
    cfg, q, t = _setup(state, config, x, t)
    P = state.points(x)
    if np.any(state.kernel.diag(P) > 1.0 + 1e-12) or (
        state.kernel.family == "linear" and cfg.domain.max_norm() > 1.0
    ):
        raise ConfigurationError("this bound needs k(x, x) <= 1 on the domain")
    b_t = v_bar * t**0.25
    sd = np.sqrt(np.asarray(q.variance))
    beta = 3.0 / state.rho * b_t * _log_det_term(state, cfg.delta)
    return _pack(cfg.B * sd, beta * sd, beta, 0.0, "chowdhury", None, chowdhury_levels(v_bar, state.t))
