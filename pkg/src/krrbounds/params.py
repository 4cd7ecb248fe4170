"""Error bounds on the parameter vector of finite-dimensional feature models."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import noise as nm
from .bounds import BoundConfig, TimeMode
from .errors import ConfigurationError, InputError


@dataclass(frozen=True, eq=False)
class FeatureModel:
    features: Callable[[np.ndarray], np.ndarray]  # (n, d) -> (n, n_phi)
    n_phi: int
    theta_true: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.n_phi < 1:
            raise ConfigurationError("n_phi must be >= 1")

    def design(self, inputs) -> np.ndarray:
        """Feature matrix Phi of shape (n_phi, t)."""
        X = np.asarray(inputs, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        F = np.asarray(self.features(X), dtype=float)
        if F.shape != (X.shape[0], self.n_phi):
            raise InputError(f"features returned shape {F.shape}, expected ({X.shape[0]}, {self.n_phi})")
        if not np.all(np.isfinite(F)):
            raise InputError("feature values must be finite")
        return F.T


def polynomial(degree: int, theta_true=None) -> FeatureModel:
    """Monomials 1, x, ..., x^degree of a scalar input."""
    if degree < 0:
        raise ConfigurationError("degree must be >= 0")

    def phi(X):
        return X[:, :1] ** np.arange(degree + 1)

    return FeatureModel(phi, degree + 1, theta_true)


def random_fourier(count: int, lengthscale: float, seed: int, dim: int = 1, theta_true=None) -> FeatureModel:
    """Random cosine features approximating exp(-|x - x'|^2 / l^2)."""
    if count < 1 or lengthscale <= 0:
        raise ConfigurationError("random Fourier features need count >= 1 and lengthscale > 0")
    rng = np.random.default_rng(seed)
    omega = rng.normal(0.0, math.sqrt(2.0) / lengthscale, (dim, count))
    phase = rng.uniform(0.0, 2.0 * math.pi, count)
    amp = math.sqrt(2.0 / count)

    def phi(X):
        return amp * np.cos(X @ omega + phase)

    return FeatureModel(phi, count, theta_true)


FEATURE_MODELS = {"polynomial": polynomial, "random_fourier": random_fourier}


def fit_params(model: FeatureModel, rho: float, inputs, outputs) -> np.ndarray:
    if not rho > 0:
        raise ConfigurationError(f"rho must be positive, got {rho}")
    y = np.asarray(outputs, dtype=float).reshape(-1)
    if y.size == 0:
        return np.zeros(model.n_phi)
    Phi = model.design(inputs)
    if Phi.shape[1] != y.size:
        raise InputError("inputs and outputs differ in length")
    n, t = Phi.shape
    if n <= t:
        return np.linalg.solve(Phi @ Phi.T + rho**2 * np.eye(n), Phi @ y)
    return Phi @ np.linalg.solve(Phi.T @ Phi + rho**2 * np.eye(t), y)


def information_operators(model: FeatureModel, rho: float, inputs) -> tuple[np.ndarray, np.ndarray]:
    """A = (I + Phi Phi^T / rho^2)^{-1} and A - A^2."""
    n = model.n_phi
    X = np.asarray(inputs, dtype=float)
    if X.size == 0:
        return np.eye(n), np.zeros((n, n))
    Phi = model.design(X)
    t = Phi.shape[1]
    if n < t:
        A = np.linalg.inv(np.eye(n) + Phi @ Phi.T / rho**2)
    else:
        A = np.eye(n) - Phi @ np.linalg.solve(rho**2 * np.eye(t) + Phi.T @ Phi, Phi.T)
    A = 0.5 * (A + A.T)
    return A, A - A @ A


def class_scaling(noise: nm.NoiseModel, delta: float, time_mode: TimeMode, t: int, n_phi: int) -> float:
    lg = time_mode.log_pi(max(t, 1)) + math.log(2.0 * n_phi / delta)
    kind = noise.kind
    if kind == "sub_gaussian":
        return math.sqrt(2.0 * lg) * nm.sub_gaussian_scale(noise)
    if kind == "bounded":
        m_bar, sigma_bar = nm.bounded_parameters(noise)
        return 2.0 / 3.0 * lg * m_bar + math.sqrt(2.0 * lg) * sigma_bar
    if kind == "sub_exponential":
        nu, alpha = nm.sub_exponential_parameters(noise)
        return max(2.0 * lg * alpha, math.sqrt(2.0 * lg) * nu)
    if kind == "variance_bounded":
        return math.sqrt(math.exp(lg) / 2.0) * nm.standard_deviation_bound(noise)
    raise ConfigurationError(f"no parameter bound for noise class {kind}")


@dataclass(frozen=True)
class ParamBoundResult:
    theta_hat: np.ndarray
    eta_theta: float
    A_norm: float
    A_tilde_norm: float
    gamma: float


def param_bound(model: FeatureModel, config: BoundConfig, rho: float, inputs, outputs=None) -> ParamBoundResult:
    X = np.asarray(inputs, dtype=float)
    t = 0 if X.size == 0 else (X.shape[0] if X.ndim else 1)
    A, At = information_operators(model, rho, X)
    a_norm = float(np.linalg.eigvalsh(A).max())
    at_norm = float(max(np.linalg.eigvalsh(At).max(), 0.0))
    gamma = class_scaling(config.noise, config.delta, config.time_mode, t, model.n_phi)
    eta = config.B * a_norm + math.sqrt(model.n_phi) / rho * gamma * math.sqrt(at_norm)
    theta = fit_params(model, rho, X, outputs) if outputs is not None else np.zeros(model.n_phi)
    return ParamBoundResult(theta, eta, a_norm, at_norm, gamma)
