"""Noise distribution classes, their samplers, and conversions between classes.

Each model records the class parameters the bounds need and names a
concrete sampler for Monte-Carlo work. The sampler's scale follows from
the class parameters unless ``sampler_scale`` overrides it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy import stats

from .errors import ConfigurationError, InputError

SAMPLERS = ("gaussian", "uniform", "chi2", "lognormal", "truncated_gaussian", "gaussian_vector")


def _nonneg(name, value):
    if value is None:
        return
    if not (value >= 0 and math.isfinite(value)):
        raise ConfigurationError(f"{name} must be a finite nonnegative number, got {value}")


@dataclass(frozen=True)
class SubGaussian:
    sigma2: float
    sampler: str = "gaussian"
    sampler_scale: Optional[float] = None
    kind = "sub_gaussian"

    def __post_init__(self):
        _nonneg("sigma2", self.sigma2)
        _check_sampler(self, ("gaussian", "uniform"))


@dataclass(frozen=True)
class Bounded:
    m_bar: float
    sigma_bar2: Optional[float] = None
    sampler: str = "uniform"
    sampler_scale: Optional[float] = None
    kind = "bounded"

    def __post_init__(self):
        _nonneg("m_bar", self.m_bar)
        _nonneg("sigma_bar2", self.sigma_bar2)
        _check_sampler(self, ("uniform", "truncated_gaussian"))


@dataclass(frozen=True)
class SubExponential:
    nu2: float
    alpha: float
    variance: Optional[float] = None  # exact variance when known, used by the variance-only bound
    sampler: str = "chi2"
    sampler_scale: Optional[float] = None
    kind = "sub_exponential"

    def __post_init__(self):
        _nonneg("nu2", self.nu2)
        _nonneg("alpha", self.alpha)
        _nonneg("variance", self.variance)
        _check_sampler(self, ("chi2", "gaussian"))


@dataclass(frozen=True)
class VarianceBounded:
    sigma2: float
    sampler: str = "lognormal"
    sampler_scale: Optional[float] = None
    kind = "variance_bounded"

    def __post_init__(self):
        _nonneg("sigma2", self.sigma2)
        _check_sampler(self, ("lognormal", "gaussian", "chi2"))


@dataclass(frozen=True, eq=False)
class CorrelatedSubGaussian:
    C: np.ndarray = field(repr=False)
    sampler: str = "gaussian_vector"
    sampler_scale: Optional[float] = None
    kind = "correlated_sub_gaussian"

    def __post_init__(self):
        C = np.array(self.C, dtype=float)
        if C.ndim != 2 or C.shape[0] != C.shape[1]:
            raise InputError(f"C must be square, got shape {C.shape}")
        if not np.allclose(C, C.T, rtol=0, atol=1e-12 * max(1.0, np.abs(C).max(initial=0))):
            raise InputError("C must be symmetric")
        C.setflags(write=False)
        object.__setattr__(self, "C", C)
        _check_sampler(self, ("gaussian_vector",))

    @classmethod
    def ar1(cls, size: int, sigma2: float, phi: float) -> CorrelatedSubGaussian:
        """Stationary AR(1)-type covariance sigma2 * phi^|i-j|."""
        if not -1 < phi < 1:
            raise ConfigurationError("AR(1) coefficient must lie in (-1, 1)")
        idx = np.arange(size)
        return cls(sigma2 * phi ** np.abs(idx[:, None] - idx[None, :]))

    def block(self, t: int) -> np.ndarray:
        if t > self.C.shape[0]:
            raise InputError(f"correlation matrix has size {self.C.shape[0]}, need {t}")
        return self.C[:t, :t]


NoiseModel = Union[SubGaussian, Bounded, SubExponential, VarianceBounded, CorrelatedSubGaussian]


def _check_sampler(model, allowed):
    if model.sampler not in allowed:
        raise ConfigurationError(
            f"sampler {model.sampler!r} does not realize class {model.kind}; valid: {', '.join(allowed)}"
        )
    _nonneg("sampler_scale", model.sampler_scale)


@dataclass(frozen=True)
class ClassParameters:
    kind: str
    sigma: Optional[float] = None
    m_bar: Optional[float] = None
    sigma_bar: Optional[float] = None
    nu: Optional[float] = None
    alpha: Optional[float] = None
    C: Optional[np.ndarray] = field(default=None, repr=False)
    spectral_norm: Optional[float] = None


def spectral_norm(C: np.ndarray) -> float:
    if C.size == 0:
        return 0.0
    return float(max(np.linalg.eigvalsh(C).max(), 0.0))


def class_parameters(model: NoiseModel) -> ClassParameters:
    if isinstance(model, SubGaussian):
        return ClassParameters(model.kind, sigma=math.sqrt(model.sigma2))
    if isinstance(model, Bounded):
        sb = model.m_bar if model.sigma_bar2 is None else math.sqrt(model.sigma_bar2)
        return ClassParameters(model.kind, m_bar=model.m_bar, sigma_bar=sb)
    if isinstance(model, SubExponential):
        return ClassParameters(model.kind, nu=math.sqrt(model.nu2), alpha=model.alpha)
    if isinstance(model, VarianceBounded):
        return ClassParameters(model.kind, sigma=math.sqrt(model.sigma2))
    if isinstance(model, CorrelatedSubGaussian):
        return ClassParameters(model.kind, C=model.C, spectral_norm=spectral_norm(model.C))
    raise ConfigurationError(f"not a noise model: {model!r}")


# Class hierarchy: bounded ⊂ sub-Gaussian ⊂ sub-exponential ⊂ finite variance.

def sub_gaussian_scale(model: NoiseModel) -> float:
    """Sub-Gaussian proxy sigma_M; a bound m_bar also serves as one."""
    if isinstance(model, SubGaussian):
        return math.sqrt(model.sigma2)
    if isinstance(model, Bounded):
        return model.m_bar
    if isinstance(model, SubExponential) and model.alpha == 0:
        return math.sqrt(model.nu2)
    raise ConfigurationError(f"noise class {model.kind} has no sub-Gaussian proxy")


def bounded_parameters(model: NoiseModel) -> tuple[float, float]:
    if isinstance(model, Bounded):
        p = class_parameters(model)
        return p.m_bar, p.sigma_bar
    raise ConfigurationError(f"bounded-noise bound needs class bounded, got {model.kind}")


def sub_exponential_parameters(model: NoiseModel) -> tuple[float, float]:
    """(nu, alpha)."""
    if isinstance(model, SubExponential):
        return math.sqrt(model.nu2), model.alpha
    if isinstance(model, (SubGaussian, Bounded)):
        return sub_gaussian_scale(model), 0.0
    raise ConfigurationError(f"noise class {model.kind} is not sub-exponential")


def standard_deviation_bound(model: NoiseModel) -> float:
    if isinstance(model, (SubGaussian, VarianceBounded)):
        return math.sqrt(model.sigma2)
    if isinstance(model, Bounded):
        return class_parameters(model).sigma_bar
    if isinstance(model, SubExponential):
        return math.sqrt(model.variance if model.variance is not None else model.nu2)
    raise ConfigurationError(f"noise class {model.kind} has no scalar variance bound")


def correlation_block(model: NoiseModel, t: int) -> np.ndarray:
    """Variance-proxy matrix of the first t noise terms."""
    if isinstance(model, CorrelatedSubGaussian):
        return model.block(t)
    return sub_gaussian_scale(model) ** 2 * np.eye(t)


def sampler_scale(model: NoiseModel) -> float:
    if model.sampler_scale is not None:
        return model.sampler_scale
    s = model.sampler
    if isinstance(model, SubGaussian):
        return math.sqrt(model.sigma2)
    if isinstance(model, Bounded):
        return model.m_bar if s == "uniform" else class_parameters(model).sigma_bar
    if isinstance(model, SubExponential):
        # chi2 draws scale^2 (Z^2 - 1); the tail parameter alpha equals 4 scale^2
        return math.sqrt(model.alpha / 4.0) if s == "chi2" else math.sqrt(model.nu2)
    if isinstance(model, VarianceBounded):
        return (model.sigma2 / 2.0) ** 0.25 if s == "chi2" else math.sqrt(model.sigma2)
    return 1.0


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def lognormal_shape(variance: float) -> float:
    """Log-scale s such that exp(N(0, s^2)) has the given variance."""
    u = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * variance))
    return math.sqrt(math.log(u))


def sample(model: NoiseModel, count: int, seed=None) -> np.ndarray:
    """Zero-mean draws; deterministic for an integer seed."""
    if count < 0:
        raise InputError("count must be >= 0")
    rng = _rng(seed)
    scale = sampler_scale(model)
    s = model.sampler
    if s == "gaussian":
        return scale * rng.standard_normal(count)
    if s == "uniform":
        return rng.uniform(-scale, scale, count)
    if s == "chi2":
        z = rng.standard_normal(count)
        return scale**2 * (z * z - 1.0)
    if s == "lognormal":
        sh = lognormal_shape(scale**2)
        return np.exp(sh * rng.standard_normal(count)) - math.exp(0.5 * sh * sh)
    if s == "truncated_gaussian":
        # symmetric clipping keeps the mean at zero and only shrinks the variance
        return np.clip(scale * rng.standard_normal(count), -model.m_bar, model.m_bar)
    if s == "gaussian_vector":
        C = model.block(count)
        if count == 0:
            return np.zeros(0)
        w, V = np.linalg.eigh(C)
        if w.min() < -1e-10 * max(1.0, float(np.trace(C))):
            raise InputError(f"C is not positive semidefinite (min eigenvalue {w.min():.3e})")
        return (V * np.sqrt(np.maximum(w, 0.0))) @ rng.standard_normal(count)
    raise ConfigurationError(f"unknown sampler {s!r}")


def chi2_moments(scale: float) -> tuple[float, float]:
    """(E|M|, E M^2) for M = scale^2 (Z^2 - 1)."""
    # E|Z^2 - 1| = 2 E[(1 - Z^2)^+] = 2 (F_1(1) - F_3(1)) using x f_1(x) = f_3(x)
    abs_mean = 2.0 * (stats.chi2.cdf(1.0, 1) - stats.chi2.cdf(1.0, 3))
    return scale**2 * abs_mean, 2.0 * scale**4
