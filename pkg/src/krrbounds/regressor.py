"""Kernel ridge regression state with Cholesky updates and bound-ready queries."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular

from .errors import ConfigurationError, InputError, NumericalError
from .kernels import KernelSpec

# negative radicands down to this value are treated as roundoff
CLAMP_TOL = 1e-10
_CHUNK = 4096

Scalar = Union[float, np.ndarray]


@dataclass(frozen=True)
class QueryDecomposition:
    """Per-point quantities; fields are floats for a single point, arrays for a batch."""

    mean: Scalar
    variance: Scalar
    h_norm2: Scalar
    h_norm_inf: Scalar
    sigma_tilde: Scalar
    h_norm_C: Optional[Scalar] = None

    @property
    def sigma(self) -> Scalar:
        return np.sqrt(self.variance)


@dataclass(frozen=True, eq=False)
class RegressorState:
    kernel: KernelSpec
    rho: float
    inputs: np.ndarray
    outputs: np.ndarray
    gram_factor: np.ndarray
    alpha: np.ndarray

    @property
    def t(self) -> int:
        return self.outputs.shape[0]

    @property
    def dim(self) -> int:
        return self.inputs.shape[1]

    def log_det_scaled(self) -> float:
        """log det(I + K / rho^2) from the stored factor."""
        if self.t == 0:
            return 0.0
        return float(2.0 * np.sum(np.log(np.diag(self.gram_factor) / self.rho)))

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """(K + rho^2 I)^{-1} rhs."""
        return cho_solve((self.gram_factor, True), rhs, check_finite=False)

    def weights(self, X) -> np.ndarray:
        """Columns h(x) = (K + rho^2 I)^{-1} k(x) for each query row, shape (t, n)."""
        P = self.points(X)
        if self.t == 0:
            return np.zeros((0, P.shape[0]))
        return self.solve(self.kernel.matrix(self.inputs, P))

    def points(self, X) -> np.ndarray:
        """Coerce to (n, dim). A 1-D input is one point, except in 1-D where it is a column."""
        P = np.asarray(X, dtype=float)
        if P.ndim == 0 or (P.ndim == 1 and self.dim == 1):
            P = P.reshape(-1, 1)
        elif P.ndim == 1:
            P = P.reshape(1, -1)
        if P.ndim != 2 or P.shape[1] != self.dim:
            raise InputError(f"query points must have dimension {self.dim}, got shape {np.shape(X)}")
        return P

    def is_single(self, X) -> bool:
        return np.ndim(X) == 0 or (np.ndim(X) == 1 and (self.dim > 1 or np.size(X) == 1))

    def query(self, x, correlation=None) -> QueryDecomposition:
        return query(self, x, correlation)

    def predict(self, X) -> np.ndarray:
        P = self.points(X)
        if self.t == 0:
            return np.zeros(P.shape[0])
        return self.kernel.matrix(P, self.inputs) @ self.alpha


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not (rho > 0 and np.isfinite(rho)):
        raise ConfigurationError(f"rho must be positive, got {rho}")
    return rho


def _prep_data(inputs, outputs, dim: Optional[int]):
    y = np.asarray(outputs, dtype=float).reshape(-1)
    X = np.asarray(inputs, dtype=float)
    if X.size == 0:
        X = X.reshape(0, dim or (X.shape[1] if X.ndim == 2 else 1))
    elif X.ndim == 1:
        X = X.reshape(-1, dim or 1) if y.size != 1 else X.reshape(1, -1)
    if X.ndim != 2:
        raise InputError(f"inputs must be a 2-D array, got shape {X.shape}")
    if X.shape[0] != y.shape[0]:
        raise InputError(f"{X.shape[0]} inputs but {y.shape[0]} outputs")
    if dim is not None and X.shape[1] != dim:
        raise InputError(f"inputs have dimension {X.shape[1]}, expected {dim}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise InputError("inputs and outputs must be finite")
    return X, y


def _factor(M: np.ndarray) -> np.ndarray:
    try:
        return cholesky(M, lower=True, check_finite=False)
    except LinAlgError as exc:
        raise NumericalError(f"Cholesky factorization failed: {exc}") from exc


def fit(kernel: KernelSpec, rho: float, inputs, outputs, dim: Optional[int] = None) -> RegressorState:
    rho = _check_rho(rho)
    X, y = _prep_data(inputs, outputs, dim)
    t = y.shape[0]
    if t == 0:
        L = np.zeros((0, 0))
        alpha = np.zeros(0)
    else:
        K = kernel.matrix(X, X)
        K = 0.5 * (K + K.T)
        K[np.diag_indices(t)] += rho**2
        L = _factor(K)
        alpha = cho_solve((L, True), y, check_finite=False)
    return RegressorState(kernel, rho, _frozen(X), _frozen(y), _frozen(L), _frozen(alpha))


def extend(state: RegressorState, inputs, outputs) -> RegressorState:
    """Append a block of observations via a block Cholesky update."""
    Xn, yn = _prep_data(inputs, outputs, state.dim)
    m = yn.shape[0]
    if m == 0:
        return state
    X = np.vstack([state.inputs, Xn])
    y = np.concatenate([state.outputs, yn])
    t = state.t
    K22 = state.kernel.matrix(Xn, Xn)
    K22 = 0.5 * (K22 + K22.T)
    K22[np.diag_indices(m)] += state.rho**2
    if t == 0:
        L22 = _factor(K22)
        L = L22
    else:
        K12 = state.kernel.matrix(state.inputs, Xn)
        L21t = solve_triangular(state.gram_factor, K12, lower=True, check_finite=False)
        S = K22 - L21t.T @ L21t
        try:
            L22 = cholesky(0.5 * (S + S.T), lower=True, check_finite=False)
        except LinAlgError:
            return fit(state.kernel, state.rho, X, y, dim=state.dim)
        L = np.zeros((t + m, t + m))
        L[:t, :t] = state.gram_factor
        L[t:, :t] = L21t.T
        L[t:, t:] = L22
    alpha = cho_solve((L, True), y, check_finite=False)
    return RegressorState(state.kernel, state.rho, _frozen(X), _frozen(y), _frozen(L), _frozen(alpha))


def append(state: RegressorState, x, y: float) -> RegressorState:
    """Rank-1 update; falls back to a full refit if positivity is lost."""
    xv = np.asarray(x, dtype=float).reshape(1, -1)
    return extend(state, xv, [float(y)])


def _sigma_tilde_squared(variance, rho, h2_sq):
    return variance - rho**2 * h2_sq


def _clamp(values: np.ndarray, what: str) -> np.ndarray:
    if np.any(values < -CLAMP_TOL):
        worst = float(values.min())
        raise NumericalError(f"{what} is negative beyond roundoff ({worst:.3e})")
    return np.maximum(values, 0.0)


def query(state: RegressorState, x, correlation=None) -> QueryDecomposition:
    P = state.points(x)
    single = state.is_single(x)
    t = state.t
    C = None
    if correlation is not None:
        C = np.asarray(correlation, dtype=float)
        if C.shape != (t, t):
            raise InputError(f"correlation matrix must be {t}x{t}, got {C.shape}")
    n = P.shape[0]
    kxx = state.kernel.diag(P)
    mean = np.zeros(n)
    var = kxx.copy()
    h2 = np.zeros(n)
    hinf = np.zeros(n)
    hC = np.zeros(n) if C is not None else None
    for s in range(0, n if t else 0, _CHUNK):
        sl = slice(s, min(s + _CHUNK, n))
        Kq = state.kernel.matrix(state.inputs, P[sl])
        v = solve_triangular(state.gram_factor, Kq, lower=True, check_finite=False)
        H = solve_triangular(state.gram_factor.T, v, lower=False, check_finite=False)
        mean[sl] = Kq.T @ state.alpha
        var[sl] = kxx[sl] - np.einsum("ij,ij->j", v, v)
        h2[sl] = np.einsum("ij,ij->j", H, H)
        hinf[sl] = np.max(np.abs(H), axis=0)
        if C is not None:
            hC[sl] = np.einsum("ij,ij->j", H, C @ H)
    var = _clamp(var, "posterior variance")
    st2 = _clamp(_sigma_tilde_squared(var, state.rho, h2), "sharpened variance")
    out = dict(
        mean=mean,
        variance=var,
        h_norm2=np.sqrt(h2),
        h_norm_inf=hinf,
        sigma_tilde=np.sqrt(st2),
        h_norm_C=None if hC is None else np.sqrt(_clamp(hC, "C-weighted norm")),
    )
    if single:
        out = {k: (None if v is None else float(v[0])) for k, v in out.items()}
    return QueryDecomposition(**out)


def truncate_outputs(outputs, levels) -> np.ndarray:
    y = np.asarray(outputs, dtype=float)
    b = np.asarray(levels, dtype=float).reshape(-1)
    if b.shape != y.shape:
        raise InputError(f"need {y.shape[0]} truncation levels, got {b.shape[0]}")
    if np.any(b < 0):
        raise InputError("truncation levels must be nonnegative")
    return np.where(np.abs(y) <= b, y, 0.0)


def truncated_mean(state: RegressorState, truncation_levels, x):
    """Mean predictor built from outputs zeroed where |y_i| exceeds its level."""
    y_hat = truncate_outputs(state.outputs, truncation_levels)
    P = state.points(x)
    if state.t == 0:
        vals = np.zeros(P.shape[0])
    else:
        vals = state.kernel.matrix(P, state.inputs) @ state.solve(y_hat)
    if state.is_single(x):
        return float(vals[0])
    return vals
