"""Command-line interface: ``run``, ``eval`` and ``selftest``.

Exit codes: 0 success, 1 failed self-test or unexpected error,
2 configuration or input error, 3 numerical error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import noise as nm
from .bounds import BoundConfig, GridRule, TimeMode
from .config import PROFILES, config_hash, load_config, parse_kernel
from .dataset import read_dataset
from .domain import DomainBox
from .errors import ConfigurationError, InputError, KRRBoundsError
from .experiments import run_experiment
from .experiments.common import write_atomic
from .regressor import fit
from .selectors import BOUND_NAMES, SelectorOptions, check_name, evaluate, predict
from .selftest import run_selftest

OUTPUT_ENV = "KC_OUTPUT_DIR"

_DEFAULT_CLASS = {
    "bnd": "bounded", "nonuniform_bnd": "bounded",
    "se": "sub_exponential", "nonuniform_se": "sub_exponential",
    "l2": "variance_bounded", "nonuniform_l2": "variance_bounded",
}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def cmd_run(args) -> int:
    cfg = load_config(args.config, profile=args.profile, seed=args.seed)
    root = Path(os.environ.get(OUTPUT_ENV) or args.output_dir or cfg.raw.get("output_dir") or "kc_output")
    outdir = root / cfg.name
    outdir.mkdir(parents=True, exist_ok=True)
    started = _now()
    t0 = time.perf_counter()
    tables = run_experiment(cfg, jobs=args.jobs or os.cpu_count() or 1)
    paths = []
    for stem, table in tables.items():
        p = outdir / f"{stem}.csv"
        write_atomic(str(p), table.to_csv())
        paths.append(str(p))
    manifest = {
        "experiment": cfg.experiment,
        "config_path": str(args.config),
        "config_hash": config_hash(cfg.effective()),
        "config": cfg.effective(),
        "profile": args.profile,
        "seed": cfg.seed,
        "started": started,
        "finished": _now(),
        "elapsed_seconds": round(time.perf_counter() - t0, 3),
        "outputs": paths,
        "version": __version__,
    }
    write_atomic(str(outdir / "manifest.json"), json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    for p in paths:
        print(p)
    return 0


def _noise_from_args(args) -> nm.NoiseModel:
    cls = args.noise_class or _DEFAULT_CLASS.get(args.bound, "sub_gaussian")
    if cls == "sub_gaussian":
        return nm.SubGaussian(args.sigma2)
    if cls == "bounded":
        if args.m_bar is None:
            raise ConfigurationError("bounded noise needs --m-bar")
        return nm.Bounded(args.m_bar, args.sigma_bar2)
    if cls == "sub_exponential":
        if args.nu2 is None or args.alpha is None:
            raise ConfigurationError("sub-exponential noise needs --nu2 and --alpha")
        return nm.SubExponential(args.nu2, args.alpha, args.variance)
    if cls == "variance_bounded":
        return nm.VarianceBounded(args.sigma2)
    raise ConfigurationError(f"unsupported noise class for eval: {cls!r}")


def _parse_point(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"malformed point {text!r}; use comma-separated numbers") from None


def cmd_eval(args) -> int:
    check_name(args.bound)
    X, y = read_dataset(args.dataset)
    pts = np.array([_parse_point(p) for p in args.x], dtype=float)
    if pts.shape[1] != X.shape[1]:
        raise InputError(f"query points have dimension {pts.shape[1]}, dataset has {X.shape[1]}")
    if args.domain_lower is not None:
        lower = _parse_point(args.domain_lower)
        if args.domain_edge is None:
            raise ConfigurationError("--domain-lower needs --domain-edge")
        domain = DomainBox(tuple(lower), args.domain_edge)
    else:
        allp = np.vstack([X, pts])
        lo, hi = allp.min(axis=0), allp.max(axis=0)
        domain = DomainBox(tuple(lo), float((hi - lo).max()))
    kernel = parse_kernel({"family": args.kernel, "lengthscale": args.lengthscale})
    rule_kind = args.grid_rule or ("weighted" if args.bound == "l2" else "fixed_delta")
    rule_value = args.grid_value if args.grid_value is not None else (100.0 if rule_kind == "weighted" else 1e-3)
    mode = TimeMode("finite_horizon", args.horizon) if args.horizon else TimeMode(args.time_mode)
    cfg = BoundConfig(
        noise=_noise_from_args(args), domain=domain, delta=args.delta, B=args.B, time_mode=mode,
        grid_rule=GridRule(rule_kind, rule_value),
    )
    opts = SelectorOptions(args.ht_a, args.ht_v_bar, args.chowdhury_v_bar)
    state = fit(kernel, args.rho, X, y, dim=X.shape[1])
    ev = evaluate(args.bound, state, cfg, pts, None, opts)
    out = ev.to_dict()
    out["mean"] = predict(args.bound, state, pts, opts).tolist()
    out["x"] = pts.tolist()
    out["t"] = state.t
    print(json.dumps(out, indent=2))
    return 0


def cmd_selftest(args) -> int:
    return run_selftest(seed=args.seed if args.seed is not None else 0)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="krrbounds", description="Kernel regression error bounds under non-Gaussian noise.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment from a JSON config")
    r.add_argument("config")
    r.add_argument("--seed", type=int, default=None, help="override the config seed")
    r.add_argument("--jobs", type=int, default=None, help="worker processes (default: logical cores)")
    r.add_argument("--profile", choices=sorted(PROFILES), default="ci")
    r.add_argument("--output-dir", default=None, help=f"output root (overridden by ${OUTPUT_ENV})")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("eval", help="evaluate one bound on a dataset at query points")
    e.add_argument("dataset", help="CSV with header x_1,...,x_d,y")
    e.add_argument("--bound", required=True, help=f"one of: {', '.join(BOUND_NAMES)}")
    e.add_argument("--x", action="append", required=True, help="query point, comma-separated; repeatable")
    e.add_argument("--delta", type=float, default=1e-3)
    e.add_argument("--rho", type=float, default=0.1)
    e.add_argument("--B", type=float, default=1.0)
    e.add_argument("--kernel", default="se")
    e.add_argument("--lengthscale", type=float, default=1.0)
    e.add_argument("--noise-class", default=None)
    e.add_argument("--sigma2", type=float, default=0.01)
    e.add_argument("--m-bar", type=float, default=None)
    e.add_argument("--sigma-bar2", type=float, default=None)
    e.add_argument("--nu2", type=float, default=None)
    e.add_argument("--alpha", type=float, default=None)
    e.add_argument("--variance", type=float, default=None)
    e.add_argument("--domain-lower", default=None, help="comma-separated lower corner")
    e.add_argument("--domain-edge", type=float, default=None)
    e.add_argument("--grid-rule", choices=["fixed_delta", "fixed_zeta", "weighted"], default=None)
    e.add_argument("--grid-value", type=float, default=None)
    e.add_argument("--time-mode", choices=["all_times", "single"], default="all_times")
    e.add_argument("--horizon", type=int, default=None, help="finite horizon T")
    e.add_argument("--ht-a", type=float, default=1.0)
    e.add_argument("--ht-v-bar", type=float, default=1.0)
    e.add_argument("--chowdhury-v-bar", type=float, default=1.0)
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("selftest", help="run the fast invariant suite")
    s.add_argument("--seed", type=int, default=None)
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KRRBoundsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
