"""CSV datasets with header ``x_1,...,x_d,y``; row order defines the data index."""
from __future__ import annotations

import csv

import numpy as np

from .errors import InputError


def read_dataset(path) -> tuple[np.ndarray, np.ndarray]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"{path}: cannot read dataset ({exc.strerror or exc})") from exc
    if not rows:
        raise InputError(f"{path}:1: missing header")
    header = [h.strip() for h in rows[0]]
    d = len(header) - 1
    if d < 1 or header != [f"x_{i}" for i in range(1, d + 1)] + ["y"]:
        raise InputError(f"{path}:1: header must be x_1,...,x_d,y; got {','.join(header)}")
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != d + 1:
            raise InputError(f"{path}:{lineno}: expected {d + 1} fields, got {len(row)}")
        try:
            vals = [float(c) for c in row]
        except ValueError:
            raise InputError(f"{path}:{lineno}: non-numeric field") from None
        if not all(np.isfinite(vals)):
            raise InputError(f"{path}:{lineno}: non-finite value")
        data.append(vals)
    arr = np.asarray(data, dtype=float).reshape(-1, d + 1)
    return arr[:, :d], arr[:, d]


def write_dataset(path, X, y) -> None:
    X = np.asarray(X, dtype=float)
    X = X.reshape(len(y), -1) if X.size else X.reshape(0, X.shape[-1] if X.ndim == 2 else 1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x_{i}" for i in range(1, X.shape[1] + 1)] + ["y"])
        for xi, yi in zip(X, y):
            w.writerow([repr(float(v)) for v in xi] + [repr(float(yi))])
