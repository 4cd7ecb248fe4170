"""Uniform error bounds for kernel ridge regression under several noise classes.

Every bound has the form ``eta(x) = B * sigma_tilde(x) + noise_term(x)``.
The noise term is a concentration part scaled by a norm of the weight
vector h(x), plus a discretization part that pays for extending a
bound on a finite cover of the domain to the whole domain. The cover's
mesh width ``zeta`` is picked by a grid rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

import numpy as np
from scipy.optimize import brentq

from . import noise as nm
from .domain import DomainBox
from .errors import ConfigurationError, InputError, NumericalError
from .kernels import KernelSpec
from .regressor import RegressorState, query

LOG_PI2_6 = math.log(math.pi**2 / 6.0)


@dataclass(frozen=True)
class TimeMode:
    """Confidence split over time: all_times, finite_horizon (needs horizon), or single."""

    kind: str = "all_times"
    horizon: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("all_times", "finite_horizon", "single"):
            raise ConfigurationError(f"unknown time mode {self.kind!r}")
        if self.kind == "finite_horizon" and not (self.horizon and self.horizon >= 1):
            raise ConfigurationError("finite_horizon needs a horizon >= 1")

    def log_pi(self, t: int) -> float:
        if self.kind == "all_times":
            return LOG_PI2_6 + 2.0 * math.log(t)
        if self.kind == "finite_horizon":
            if t > self.horizon:
                raise ConfigurationError(f"t={t} exceeds the horizon {self.horizon}")
            return math.log(self.horizon)
        return 0.0

    def pi(self, t: int) -> float:
        return math.exp(self.log_pi(t))


@dataclass(frozen=True)
class GridRule:
    """How zeta is chosen: fixed_delta (target), fixed_zeta (zeta), weighted (weight)."""

    kind: str = "fixed_delta"
    value: float = 1e-3

    def __post_init__(self):
        if self.kind not in ("fixed_delta", "fixed_zeta", "weighted"):
            raise ConfigurationError(f"unknown grid rule {self.kind!r}")
        if not (self.value > 0 and math.isfinite(self.value)):
            raise ConfigurationError(f"grid rule {self.kind} needs a positive value, got {self.value}")


@dataclass(frozen=True)
class BoundConfig:
    noise: nm.NoiseModel
    domain: DomainBox
    delta: float = 1e-3
    B: float = 1.0
    time_mode: TimeMode = field(default_factory=TimeMode)
    grid_rule: GridRule = field(default_factory=GridRule)
    hoelder: Optional[tuple[float, float]] = None
    bnd_independent_zeta: bool = False
    ht_delta: str = "proof"  # "proof": 2 b_t Delta_t(1); "table": 2 b_t Delta_t(sigma_M)

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ConfigurationError(f"delta must lie in (0, 1), got {self.delta}")
        if not (self.B >= 0 and math.isfinite(self.B)):
            raise ConfigurationError(f"B must be finite and >= 0, got {self.B}")
        if self.ht_delta not in ("proof", "table"):
            raise ConfigurationError("ht_delta must be 'proof' or 'table'")

    def for_kernel(self, kernel: KernelSpec) -> BoundConfig:
        """Fill in Hölder constants from the kernel when not set explicitly."""
        if self.hoelder is not None:
            return self
        return replace(self, hoelder=kernel.hoelder(self.domain))


@dataclass(frozen=True)
class TableParams:
    beta1: float
    beta2: float
    a1: float
    a2: float
    zeta: float

    def delta_sg(self, sigma: float) -> float:
        return math.sqrt(self.beta1) * sigma * self.a1 + math.sqrt(self.beta2) * sigma * self.a2


Value = Union[float, np.ndarray]


@dataclass(frozen=True)
class BoundEvaluation:
    total: Value
    exploration: Value
    noise_term: Value
    beta: Value
    discretization: Value
    variant: str
    zeta: Optional[float] = None
    truncation: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        def conv(v):
            if v is None:
                return None
            a = np.asarray(v)
            return a.tolist() if a.ndim else float(a)

        return {
            "variant": self.variant,
            "total": conv(self.total),
            "exploration": conv(self.exploration),
            "noise_term": conv(self.noise_term),
            "beta": conv(self.beta),
            "discretization": conv(self.discretization),
            "zeta": self.zeta,
            "truncation": conv(self.truncation),
        }


# ---------------------------------------------------------------- covering

def log_covering_upper_bound(domain: DomainBox, zeta: float) -> float:
    if not zeta > 0:
        raise InputError(f"zeta must be positive, got {zeta}")
    n = domain.dim
    return n * math.log1p(math.sqrt(n) * domain.edge / (2.0 * zeta))


def covering_upper_bound(domain: DomainBox, zeta: float) -> float:
    """Upper bound on the number of zeta-balls needed to cover the box."""
    if not zeta > 0:
        raise InputError(f"zeta must be positive, got {zeta}")
    n = domain.dim
    return (1.0 + math.sqrt(n) * domain.edge / (2.0 * zeta)) ** n


def table_params(config: BoundConfig, rho: float, t: int, zeta: float) -> TableParams:
    if config.hoelder is None:
        raise ConfigurationError("Hölder constants unresolved; call config.for_kernel(kernel)")
    if t < 1:
        raise InputError(f"t must be >= 1, got {t}")
    if not rho > 0:
        raise ConfigurationError(f"rho must be positive, got {rho}")
    L, p = config.hoelder
    base = math.log(4.0) + config.time_mode.log_pi(t) - math.log(config.delta)
    beta1 = 2.0 * (base + log_covering_upper_bound(config.domain, zeta))
    beta2 = 2.0 * (base + math.log(t))
    a1 = math.sqrt(L / (2.0 * rho**2)) * zeta ** (p / 2.0)
    a2 = t * L * zeta**p
    return TableParams(beta1, beta2, a1, a2, zeta)


def l2_scaling(beta: float) -> float:
    """sqrt(exp(beta / 2) / 2), the Chebyshev-type analogue of sqrt(beta)."""
    return math.exp(beta / 4.0) / math.sqrt(2.0)


# ----------------------------------------------------- per-variant terms

VARIANTS = ("sg", "bnd1", "bnd2", "bnd", "se", "l2")


def _scale_for(config: BoundConfig, which: str, scale: Optional[float]):
    if which == "sg":
        return nm.sub_gaussian_scale(config.noise) if scale is None else scale
    if which in ("bnd1", "bnd2", "bnd"):
        return nm.bounded_parameters(config.noise)
    if which == "se":
        return nm.sub_exponential_parameters(config.noise)
    if which == "l2":
        return nm.standard_deviation_bound(config.noise) if scale is None else scale
    raise ConfigurationError(f"unknown discretization variant {which!r}; valid: {', '.join(VARIANTS)}")


def _terms(tp: TableParams, which: str, s) -> tuple[float, float]:
    """(dimensionless scaling, discretization term) for one variant."""
    sb1, sb2 = math.sqrt(tp.beta1), math.sqrt(tp.beta2)
    if which == "sg":
        return sb1, tp.delta_sg(s)
    if which in ("bnd1", "bnd2", "bnd"):
        m_bar, sigma_bar = s
        d1 = tp.delta_sg(m_bar)
        d2 = (sb1 * sigma_bar + tp.beta1 * m_bar / 3.0) * tp.a1 + (sb2 * sigma_bar + tp.beta2 * m_bar / 3.0) * tp.a2
        return sb1, {"bnd1": d1, "bnd2": d2, "bnd": max(d1, d2)}[which]
    if which == "se":
        nu, alpha = s
        d = max(tp.beta1 * alpha, sb1 * nu) * tp.a1 + max(tp.beta2 * alpha, sb2 * nu) * tp.a2
        return tp.beta1, d
    if which == "l2":
        b = l2_scaling(tp.beta1)
        return b, b * s * tp.a1 + l2_scaling(tp.beta2) * s * tp.a2
    raise ConfigurationError(f"unknown discretization variant {which!r}")


def discretization(config: BoundConfig, rho: float, t: int, zeta: float, which: str, scale=None) -> float:
    return _terms(table_params(config, rho, t, zeta), which, _scale_for(config, which, scale))[1]


def _objective_parts(config, rho, t, which, scale) -> Callable[[float], tuple[float, float]]:
    s = _scale_for(config, which, scale)
    return lambda z: _terms(table_params(config, rho, t, z), which, s)


def _reference_zeta(domain: DomainBox) -> float:
    return domain.edge if domain.edge > 0 else 1.0


def solve_zeta_for_delta(config: BoundConfig, rho: float, t: int, target: float, which: str = "sg", scale=None) -> float:
    """Grid constant at which the discretization term equals ``target``."""
    if not target > 0:
        raise ConfigurationError(f"discretization target must be positive, got {target}")
    parts = _objective_parts(config, rho, t, which, scale)
    disc = lambda u: parts(math.exp(u))[1]
    u = math.log(_reference_zeta(config.domain))
    if disc(u) == 0.0 and disc(u + 50.0) == 0.0:
        raise ConfigurationError("discretization term is identically zero; a target cannot be reached")
    f0 = disc(u) - target
    if f0 == 0.0:
        return math.exp(u)
    step = math.log(2.0) if f0 < 0 else -math.log(2.0)
    inner = u
    for _ in range(200):
        outer = inner + step
        if (disc(outer) > target) == (step > 0):
            break
        inner = outer
    else:
        raise NumericalError(f"could not bracket zeta for discretization target {target:g} ({which})")
    lo, hi = sorted((inner, outer))
    root = brentq(lambda v: disc(v) - target, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    return math.exp(root)


_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


def _golden(fn, a: float, b: float, tol: float = 1e-10, maxiter: int = 200) -> float:
    c = b - _GOLD * (b - a)
    d = a + _GOLD * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(maxiter):
        if abs(b - a) < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLD * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLD * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def solve_zeta_weighted(config: BoundConfig, rho: float, t: int, weight: float = 100.0, which: str = "l2", scale=None) -> float:
    """Minimize scaling(zeta) + weight * discretization(zeta) over log zeta in [1e-8 r, r]."""
    if not weight > 0:
        raise ConfigurationError(f"weight must be positive, got {weight}")
    parts = _objective_parts(config, rho, t, which, scale)

    def obj(u):
        b, d = parts(math.exp(u))
        return b + weight * d

    r = _reference_zeta(config.domain)
    hi = math.log(r)
    lo = hi - 8.0 * math.log(10.0)
    coarse = np.linspace(lo, hi, 81)
    vals = np.array([obj(u) for u in coarse])
    i = int(np.argmin(vals))
    diffs = np.diff(vals)
    unimodal = np.all(diffs[:i] <= 0) and np.all(diffs[i:] >= 0) and np.all(np.isfinite(vals))
    if unimodal:
        a = coarse[max(i - 1, 0)]
        b = coarse[min(i + 1, len(coarse) - 1)]
        u = _golden(obj, a, b)
        return math.exp(u if obj(u) <= vals[i] else coarse[i])
    dense = np.linspace(lo, hi, 1601)
    dvals = np.array([obj(u) for u in dense])
    return math.exp(dense[int(np.nanargmin(dvals))])


def resolve_zeta(config: BoundConfig, rho: float, t: int, which: str, scale=None) -> float:
    rule = config.grid_rule
    if rule.kind == "fixed_zeta":
        return rule.value
    if rule.kind == "weighted":
        return solve_zeta_weighted(config, rho, t, rule.value, which, scale)
    parts = _objective_parts(config, rho, t, which, scale)
    r = _reference_zeta(config.domain)
    if parts(r)[1] == 0.0 and parts(r * math.exp(50.0))[1] == 0.0:
        # discretization vanishes for every zeta (zero noise scale or flat kernel)
        return r
    return solve_zeta_for_delta(config, rho, t, rule.value, which, scale)


# ----------------------------------------------------------- evaluation

def _setup(state: RegressorState, config: BoundConfig, x, t: Optional[int], correlation=None):
    cfg = config.for_kernel(state.kernel)
    q = query(state, x, correlation)
    t = state.t if t is None else int(t)
    if t < state.t:
        raise InputError(f"t={t} is smaller than the number of observations {state.t}")
    return cfg, q, t


def _no_data(q, cfg: BoundConfig, variant: str) -> BoundEvaluation:
    expl = cfg.B * np.asarray(q.sigma_tilde)
    zero = np.zeros_like(expl)
    return _pack(expl, zero, zero, zero, variant, None)


def _pack(expl, noise, beta, disc, variant, zeta, truncation=None) -> BoundEvaluation:
    expl = np.asarray(expl, dtype=float)
    noise = np.broadcast_to(np.asarray(noise, dtype=float), expl.shape)
    beta = np.broadcast_to(np.asarray(beta, dtype=float), expl.shape)
    disc = np.broadcast_to(np.asarray(disc, dtype=float), expl.shape)
    total = expl + noise
    if expl.ndim == 0:
        total, expl, noise, beta, disc = (float(v) for v in (total, expl, noise, beta, disc))
    else:
        noise, beta, disc = noise.copy(), beta.copy(), disc.copy()
    return BoundEvaluation(total, expl, noise, beta, disc, variant, zeta, truncation)


def noise_bound_uniform(state: RegressorState, config: BoundConfig, x, t: Optional[int] = None) -> BoundEvaluation:
    """Uniform bound matching the configured noise class."""
    kind = config.noise.kind
    if kind == "sub_gaussian":
        return bound_sub_gaussian(state, config, x, t)
    if kind == "bounded":
        return bound_bounded(state, config, x, t)
    if kind == "sub_exponential":
        return bound_sub_exponential(state, config, x, t)
    if kind == "variance_bounded":
        return bound_variance(state, config, x, t)
    if kind == "correlated_sub_gaussian":
        return noise_bound_correlated(state, config, x, t)
    raise ConfigurationError(f"no uniform bound for noise class {kind}")


def bound_sub_gaussian(state, config, x, t=None, variant="sg") -> BoundEvaluation:
    cfg, q, t = _setup(state, config, x, t)
    if t == 0:
        return _no_data(q, cfg, variant)
    sigma = nm.sub_gaussian_scale(cfg.noise)
    zeta = resolve_zeta(cfg, state.rho, t, "sg", sigma)
    tp = table_params(cfg, state.rho, t, zeta)
    beta, disc = _terms(tp, "sg", sigma)
    noise = beta * sigma * np.asarray(q.h_norm2) + disc
    return _pack(cfg.B * np.asarray(q.sigma_tilde), noise, beta, disc, variant, zeta)


def noise_bound_conditional(state, config, x, t=None) -> BoundEvaluation:
    """Same closed form as the sub-Gaussian bound; valid for conditionally sub-Gaussian noise."""
    return bound_sub_gaussian(state, config, x, t, variant="sg_cond")


def bound_bounded(state, config, x, t=None) -> BoundEvaluation:
    """Pointwise minimum of the Hoeffding-type and Bernstein-type forms."""
    cfg, q, t = _setup(state, config, x, t)
    if t == 0:
        return _no_data(q, cfg, "bnd")
    m_bar, sigma_bar = nm.bounded_parameters(cfg.noise)
    rho = state.rho
    if cfg.bnd_independent_zeta:
        z1 = resolve_zeta(cfg, rho, t, "bnd1")
        z2 = resolve_zeta(cfg, rho, t, "bnd2")
    else:
        z1 = z2 = resolve_zeta(cfg, rho, t, "bnd")
    tp1, tp2 = table_params(cfg, rho, t, z1), table_params(cfg, rho, t, z2)
    b1, d1 = _terms(tp1, "bnd1", (m_bar, sigma_bar))
    b2, d2 = _terms(tp2, "bnd2", (m_bar, sigma_bar))
    h2, hinf = np.asarray(q.h_norm2), np.asarray(q.h_norm_inf)
    hoeffding = b1 * m_bar * h2 + d1
    bernstein = b2 * sigma_bar * h2 + tp2.beta1 / 3.0 * m_bar * hinf + d2
    first = hoeffding <= bernstein
    noise = np.where(first, hoeffding, bernstein)
    beta = np.where(first, b1, b2)
    disc = np.where(first, d1, d2)
    zeta = z1 if z1 == z2 else None
    return _pack(cfg.B * np.asarray(q.sigma_tilde), noise, beta, disc, "bnd", zeta)


def bound_sub_exponential(state, config, x, t=None) -> BoundEvaluation:
    cfg, q, t = _setup(state, config, x, t)
    if t == 0:
        return _no_data(q, cfg, "se")
    nu, alpha = nm.sub_exponential_parameters(cfg.noise)
    zeta = resolve_zeta(cfg, state.rho, t, "se")
    tp = table_params(cfg, state.rho, t, zeta)
    beta, disc = _terms(tp, "se", (nu, alpha))
    conc = np.maximum(beta * alpha * np.asarray(q.h_norm_inf), math.sqrt(beta) * nu * np.asarray(q.h_norm2))
    return _pack(cfg.B * np.asarray(q.sigma_tilde), conc + disc, beta, disc, "se", zeta)


def bound_variance(state, config, x, t=None) -> BoundEvaluation:
    cfg, q, t = _setup(state, config, x, t)
    if t == 0:
        return _no_data(q, cfg, "l2")
    sigma = nm.standard_deviation_bound(cfg.noise)
    zeta = resolve_zeta(cfg, state.rho, t, "l2", sigma)
    tp = table_params(cfg, state.rho, t, zeta)
    beta, disc = _terms(tp, "l2", sigma)
    noise = beta * sigma * np.asarray(q.h_norm2) + disc
    return _pack(cfg.B * np.asarray(q.sigma_tilde), noise, beta, disc, "l2", zeta)


def noise_bound_correlated(state, config, x, t=None, C=None) -> BoundEvaluation:
    """Sub-Gaussian bound with a correlated variance-proxy matrix C (defaults to the model's)."""
    C = nm.correlation_block(config.noise, state.t) if C is None else np.asarray(C, dtype=float)
    if C.shape != (state.t, state.t):
        raise InputError(f"C must be {state.t}x{state.t}, got {C.shape}")
    cfg, q, t = _setup(state, config, x, t, correlation=C)
    if t == 0:
        return _no_data(q, cfg, "sg_corr")
    s = math.sqrt(nm.spectral_norm(C))
    zeta = resolve_zeta(cfg, state.rho, t, "sg", s)
    tp = table_params(cfg, state.rho, t, zeta)
    beta, disc = _terms(tp, "sg", s)
    noise = beta * np.asarray(q.h_norm_C) + disc
    return _pack(cfg.B * np.asarray(q.sigma_tilde), noise, beta, disc, "sg_corr", zeta)


def truncation_schedule(a: float, v_bar: float, t: int) -> np.ndarray:
    """Levels b_i = v_bar^(1/(1+a)) i^(1/(2(1+a))) for i = 1..t."""
    if not a > 0:
        raise ConfigurationError(f"moment order a must be positive, got {a}")
    if not v_bar >= 0:
        raise ConfigurationError(f"moment bound must be nonnegative, got {v_bar}")
    i = np.arange(1, t + 1, dtype=float)
    return v_bar ** (1.0 / (1.0 + a)) * i ** (1.0 / (2.0 * (1.0 + a)))


def heavy_tailed_bound(state, config, x, t=None, a: float = 1.0, v_bar: float = 1.0, levels=None) -> BoundEvaluation:
    """Bound for the truncated predictor under a (1+a)-th moment bound v_bar on the outputs."""
    cfg, q, t = _setup(state, config, x, t)
    schedule = truncation_schedule(a, v_bar, state.t)
    if levels is not None:
        lv = np.asarray(levels, dtype=float).reshape(-1)
        if lv.shape != schedule.shape or not np.allclose(lv, schedule, rtol=1e-12, atol=0):
            raise InputError("truncation levels do not match the schedule implied by (a, v_bar)")
    if t == 0:
        ev = _no_data(q, cfg, "ht")
        return replace(ev, truncation=schedule)
    b_t = float(truncation_schedule(a, v_bar, t)[-1])
    unit = 1.0 if cfg.ht_delta == "proof" else nm.sub_gaussian_scale(cfg.noise)
    scale = 2.0 * b_t * unit
    if scale == 0.0:
        zeta = _reference_zeta(cfg.domain) if cfg.grid_rule.kind != "fixed_zeta" else cfg.grid_rule.value
    else:
        zeta = resolve_zeta(cfg, state.rho, t, "sg", scale)
    tp = table_params(cfg, state.rho, t, zeta)
    beta = 2.0 * math.sqrt(tp.beta1) + math.sqrt(1.0 + a)
    disc = tp.delta_sg(scale)
    noise = beta * b_t * np.asarray(q.h_norm2) + disc
    return _pack(cfg.B * np.asarray(q.sigma_tilde), noise, beta, disc, "ht", zeta, schedule)


def moment_transfer(f_bar: float, m1: float, m2: float) -> float:
    """Second-moment bound on outputs |f| <= f_bar plus noise with E|M| = m1, E M^2 = m2."""
    if min(f_bar, m1, m2) < 0:
        raise ConfigurationError("moment_transfer arguments must be nonnegative")
    return min(2.0 * f_bar**2 + 2.0 * m2, f_bar**2 + 2.0 * f_bar * m1 + m2)


NONUNIFORM_CASES = {"sg": "sub_gaussian", "bnd": "bounded", "se": "sub_exponential", "l2": "variance_bounded"}


def noise_bound_nonuniform(state, config, x, t=None, case: Optional[str] = None) -> BoundEvaluation:
    """Pointwise (non-uniform) bounds: no cover, hence no discretization term."""
    if case is None:
        kind = config.noise.kind
        case = "sg" if kind == "correlated_sub_gaussian" else {v: k for k, v in NONUNIFORM_CASES.items()}.get(kind)
    if case not in NONUNIFORM_CASES:
        raise ConfigurationError(f"unknown nonuniform case {case!r}; valid: {', '.join(NONUNIFORM_CASES)}")
    C = None
    if case == "sg":
        C = nm.correlation_block(config.noise, state.t)
    cfg, q, t = _setup(state, config, x, t, correlation=C)
    variant = f"nonuniform_{case}"
    if t == 0:
        return _no_data(q, cfg, variant)
    lg = math.log(2.0 / cfg.delta)
    h2, hinf = np.asarray(q.h_norm2), np.asarray(q.h_norm_inf)
    if case == "sg":
        beta = math.sqrt(2.0 * lg)
        noise = beta * np.asarray(q.h_norm_C)
    elif case == "bnd":
        m_bar, sigma_bar = nm.bounded_parameters(cfg.noise)
        beta = math.sqrt(2.0 * lg)
        noise = np.minimum(beta * m_bar * h2, 2.0 / 3.0 * lg * m_bar * hinf + beta * sigma_bar * h2)
    elif case == "se":
        nu, alpha = nm.sub_exponential_parameters(cfg.noise)
        beta = 2.0 * lg
        noise = np.maximum(beta * alpha * hinf, math.sqrt(beta) * nu * h2)
    else:
        beta = math.sqrt(1.0 / cfg.delta)
        noise = beta * nm.standard_deviation_bound(cfg.noise) * h2
    return _pack(cfg.B * np.asarray(q.sigma_tilde), noise, beta, 0.0, variant, None)
