from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InputError


@dataclass(frozen=True)
class DomainBox:
    """Axis-aligned hypercube ``lower + [0, edge]^dim``."""

    lower: tuple[float, ...]
    edge: float

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(float(v) for v in np.atleast_1d(self.lower)))
        if len(self.lower) < 1:
            raise ConfigurationError("domain needs at least one dimension")
        if not np.isfinite(self.edge) or self.edge < 0:
            raise ConfigurationError(f"domain edge must be finite and >= 0, got {self.edge}")
        if not all(np.isfinite(self.lower)):
            raise ConfigurationError("domain lower corner must be finite")

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def upper(self) -> tuple[float, ...]:
        return tuple(v + self.edge for v in self.lower)

    @classmethod
    def interval(cls, lo: float, hi: float) -> DomainBox:
        if hi < lo:
            raise ConfigurationError(f"empty interval [{lo}, {hi}]")
        return cls((lo,), hi - lo)

    def max_norm(self) -> float:
        """Largest Euclidean norm of any point in the box."""
        lo = np.asarray(self.lower)
        far = np.maximum(np.abs(lo), np.abs(lo + self.edge))
        return float(np.linalg.norm(far))

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        lo = np.asarray(self.lower)
        return lo + self.edge * rng.random((count, self.dim))

    def grid(self, resolution: int) -> tuple[np.ndarray, list[np.ndarray]]:
        """Tensor grid: flattened points (resolution**dim, dim) and per-axis nodes."""
        if resolution < 2:
            raise InputError("grid resolution must be >= 2")
        axes = [np.linspace(lo, lo + self.edge, resolution) for lo in self.lower]
        mesh = np.meshgrid(*axes, indexing="ij")
        points = np.stack([m.ravel() for m in mesh], axis=1)
        return points, axes
