"""Name-based dispatch from config ``bound`` strings to bound functions and predictors."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import baselines, bounds
from .errors import ConfigurationError
from .regressor import RegressorState, truncated_mean

BOUND_NAMES = (
    "sg", "bnd", "se", "l2", "sg_corr", "sg_cond", "ht",
    "nonuniform_sg", "nonuniform_bnd", "nonuniform_se", "nonuniform_l2",
    "abbasi", "fiedler", "chowdhury",
)
# bounds that hold only pointwise, not jointly over the domain
POINTWISE = frozenset(n for n in BOUND_NAMES if n.startswith("nonuniform_"))


@dataclass(frozen=True)
class SelectorOptions:
    ht_a: float = 1.0
    ht_v_bar: float = 1.0
    chowdhury_v_bar: float = 1.0


def check_name(name: str) -> str:
    if name not in BOUND_NAMES:
        raise ConfigurationError(f"unknown bound {name!r}; valid names: {', '.join(BOUND_NAMES)}")
    return name


def evaluate(name: str, state: RegressorState, config: bounds.BoundConfig, x, t=None,
             options: SelectorOptions = SelectorOptions()) -> bounds.BoundEvaluation:
    check_name(name)
    if name == "sg":
        return bounds.bound_sub_gaussian(state, config, x, t)
    if name == "bnd":
        return bounds.bound_bounded(state, config, x, t)
    if name == "se":
        return bounds.bound_sub_exponential(state, config, x, t)
    if name == "l2":
        return bounds.bound_variance(state, config, x, t)
    if name == "sg_corr":
        return bounds.noise_bound_correlated(state, config, x, t)
    if name == "sg_cond":
        return bounds.noise_bound_conditional(state, config, x, t)
    if name == "ht":
        return bounds.heavy_tailed_bound(state, config, x, t, a=options.ht_a, v_bar=options.ht_v_bar)
    if name in POINTWISE:
        return bounds.noise_bound_nonuniform(state, config, x, t, case=name.split("_", 1)[1])
    if name == "abbasi":
        return baselines.abbasi_yadkori(state, config, x, t)
    if name == "fiedler":
        return baselines.fiedler_time_uniform(state, config, x, t)
    return baselines.chowdhury_gopalan(state, config, x, t, v_bar=options.chowdhury_v_bar)


def truncation_levels(name: str, t: int, options: SelectorOptions = SelectorOptions()):
    """Per-index truncation levels when the bound needs the truncated predictor, else None."""
    if name == "ht":
        return bounds.truncation_schedule(options.ht_a, options.ht_v_bar, t)
    if name == "chowdhury":
        return baselines.chowdhury_levels(options.chowdhury_v_bar, t)
    return None


def predict(name: str, state: RegressorState, x, options: SelectorOptions = SelectorOptions()) -> np.ndarray:
    """The estimator each bound is stated for."""
    levels = truncation_levels(name, state.t, options)
    if levels is None:
        return state.predict(x)
    return np.atleast_1d(truncated_mean(state, levels, state.points(x)))
