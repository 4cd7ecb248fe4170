"""Positive-definite kernels with Hölder metadata.

Distances: squared exponential uses the Euclidean norm, the Matérn
kernels the 1-norm. Hölder constants are stated with respect to the
Euclidean norm on inputs, which is what the covering-number argument uses.

With the 1-norm, Matérn-1/2 is a product of 1-D Laplace kernels and stays
positive definite in any dimension. Matérn-3/2 is positive definite only
in one dimension; its Gram matrices can be indefinite for dim >= 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from .domain import DomainBox
from .errors import ConfigurationError, InputError

FAMILIES = ("se", "linear", "matern12", "matern32")
_ALIASES = {
    "squared_exponential": "se",
    "squaredexponential": "se",
    "rbf": "se",
    "matern_12": "matern12",
    "matern_32": "matern32",
}


@dataclass(frozen=True)
class KernelSpec:
    family: str
    lengthscale: float = 1.0
    hoelder_L: Optional[float] = None
    hoelder_p: Optional[float] = None

    def __post_init__(self):
        fam = _ALIASES.get(self.family.lower(), self.family.lower())
        if fam not in FAMILIES:
            raise ConfigurationError(f"unknown kernel family {self.family!r}; valid: {', '.join(FAMILIES)}")
        object.__setattr__(self, "family", fam)
        if fam != "linear" and not (self.lengthscale > 0 and math.isfinite(self.lengthscale)):
            raise ConfigurationError(f"lengthscale must be positive, got {self.lengthscale}")
        if self.hoelder_L is not None and self.hoelder_L < 0:
            raise ConfigurationError("hoelder_L must be nonnegative")
        if self.hoelder_p is not None and not 0 < self.hoelder_p <= 1:
            raise ConfigurationError("hoelder_p must lie in (0, 1]")

    @property
    def stationary(self) -> bool:
        return self.family != "linear"

    def matrix(self, X1, X2) -> np.ndarray:
        """Cross-kernel matrix between row-stacked point sets."""
        A = _as_points(X1)
        C = _as_points(X2)
        if A.shape[1] != C.shape[1]:
            raise InputError(f"dimension mismatch: {A.shape[1]} vs {C.shape[1]}")
        if self.family == "linear":
            return A @ C.T
        if A.shape[0] == 0 or C.shape[0] == 0:
            return np.zeros((A.shape[0], C.shape[0]))
        l = self.lengthscale
        if self.family == "se":
            return np.exp(-cdist(A, C, "sqeuclidean") / l**2)
        d = cdist(A, C, "cityblock") / l
        if self.family == "matern12":
            return np.exp(-d)
        s = math.sqrt(3.0) * d
        return (1.0 + s) * np.exp(-s)

    def diag(self, X) -> np.ndarray:
        """k(x, x) for each row."""
        A = _as_points(X)
        if self.family == "linear":
            return np.einsum("ij,ij->i", A, A)
        return np.ones(A.shape[0])

    def hoelder(self, domain: DomainBox) -> tuple[float, float]:
        """Configured (L, p), filling gaps from the analytic defaults."""
        L0, p0 = default_hoelder(self, domain)
        L = L0 if self.hoelder_L is None else self.hoelder_L
        p = p0 if self.hoelder_p is None else self.hoelder_p
        return float(L), float(p)


def _as_points(X) -> np.ndarray:
    A = np.asarray(X, dtype=float)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    elif A.ndim == 1:
        A = A.reshape(1, -1)
    elif A.ndim != 2:
        raise InputError(f"points must be 1-D or 2-D, got shape {A.shape}")
    return A


def eval(k: KernelSpec, x, x_prime) -> float:  # noqa: A001 - mirrors the math name
    a = np.atleast_1d(np.asarray(x, dtype=float))
    b = np.atleast_1d(np.asarray(x_prime, dtype=float))
    if a.shape != b.shape or a.ndim != 1:
        raise InputError(f"points must be vectors of equal dimension, got {a.shape} and {b.shape}")
    return float(k.matrix(a[None, :], b[None, :])[0, 0])


def gram(k: KernelSpec, points) -> np.ndarray:
    P = _as_points(points)
    if P.shape[0] == 0:
        raise InputError("gram needs at least one point")
    K = k.matrix(P, P)
    return 0.5 * (K + K.T)


def default_hoelder(k: KernelSpec, domain: DomainBox) -> tuple[float, float]:
    """Lipschitz constants (order p = 1) of each kernel family."""
    n = domain.dim
    l = k.lengthscale
    if k.family == "se":
        return math.sqrt(2.0) / (l * math.sqrt(math.e)), 1.0
    if k.family == "matern12":
        # 1-norm distance: ||v||_1 <= sqrt(n) ||v||_2
        return math.sqrt(n) / l, 1.0
    if k.family == "matern32":
        return math.sqrt(3.0) * math.sqrt(n) / (l * math.e), 1.0
    bound = domain.max_norm()
    if not math.isfinite(bound):
        raise ConfigurationError("linear kernel needs a bounded domain")
    return bound, 1.0
