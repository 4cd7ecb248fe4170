from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..config import ExperimentConfig, from_dict
from ..kernels import KernelSpec
from ..domain import DomainBox


@dataclass(frozen=True, eq=False)
class RKHSFunction:
    """f = sum_i c_i k(., z_i); its RKHS norm is sqrt(c^T K_z c)."""

    kernel: KernelSpec
    centers: np.ndarray
    coef: np.ndarray

    def __call__(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if self.coef.size == 0:
            return np.zeros(X.shape[0])
        return self.kernel.matrix(X, self.centers) @ self.coef

    @property
    def norm(self) -> float:
        if self.coef.size == 0:
            return 0.0
        K = self.kernel.matrix(self.centers, self.centers)
        return float(np.sqrt(max(self.coef @ K @ self.coef, 0.0)))


def random_rkhs_function(kernel: KernelSpec, domain: DomainBox, n_centers: int, norm: float,
                         rng: np.random.Generator) -> RKHSFunction:
    """Random kernel expansion rescaled to the requested RKHS norm."""
    Z = domain.sample(n_centers, rng)
    c = rng.standard_normal(n_centers)
    f = RKHSFunction(kernel, Z, c)
    cur = f.norm
    scale = norm / cur if cur > 0 else 0.0
    return RKHSFunction(kernel, Z, c * scale)


def run_rng(cfg: ExperimentConfig, run: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, run])


def _worker(args):
    fn, raw, run = args
    return fn(from_dict(raw), run)


def map_runs(fn: Callable, cfg: ExperimentConfig, jobs: int = 1) -> list:
    """Run ``fn(cfg, run)`` for every run index, in a pool when jobs > 1; results in run order."""
    raw = cfg.effective()
    tasks = [(fn, raw, r) for r in range(cfg.runs)]
    if jobs <= 1 or cfg.runs == 1:
        return [fn(cfg, r) for r in range(cfg.runs)]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_worker, tasks, chunksize=max(1, cfg.runs // (4 * jobs))))


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


@dataclass
class Table:
    columns: Sequence[str]
    rows: list

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([fmt(v) for v in row])
        return buf.getvalue()

    def column(self, name: str) -> list:
        i = list(self.columns).index(name)
        return [r[i] for r in self.rows]

    def where(self, **match) -> list[dict]:
        out = []
        for r in self.rows:
            d = dict(zip(self.columns, r))
            if all(d[k] == v for k, v in match.items()):
                out.append(d)
        return out


def write_atomic(path: str, text: str) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def trapezoid_nd(values: np.ndarray, axes: list[np.ndarray]) -> float:
    """Iterated trapezoid rule over a tensor grid (values flattened in 'ij' order)."""
    arr = values.reshape([len(a) for a in axes])
    for a in reversed(axes):
        arr = np.trapezoid(arr, a, axis=-1)
    return float(arr)
