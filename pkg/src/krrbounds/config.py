"""JSON experiment configuration: parsing, validation, profiles, hashing."""
from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

from . import noise as nm
from .bounds import BoundConfig, GridRule, TimeMode
from .domain import DomainBox
from .errors import ConfigurationError, KRRBoundsError
from .kernels import KernelSpec
from .selectors import BOUND_NAMES, SelectorOptions, check_name

EXPERIMENTS = ("region_size", "regression_band", "safe_control", "coverage", "param_decay")
PROFILES = {
    "ci": {"runs": 20, "t_max": 300},
    "paper": {"runs": 100, "t_max": 1000},
}
# variance-only bounds cannot reach small discretization targets, so they default to the weighted rule
DEFAULT_RULES = {"l2": {"kind": "weighted", "value": 100.0}}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    raw: dict = field(repr=False)
    seed: int
    runs: int
    t_max: int
    checkpoints: tuple[int, ...]
    eval_grid: int
    bounds: tuple[str, ...]
    kernel: KernelSpec
    domain: DomainBox
    noise: nm.NoiseModel
    rho: float
    delta: float
    B: float
    time_mode: TimeMode
    grid_rule: GridRule
    grid_rules: dict
    bnd_independent_zeta: bool
    ht_delta: str
    options: SelectorOptions
    name: str = "experiment"

    def bound_config(self, bound: Optional[str] = None) -> BoundConfig:
        rule = self.grid_rules.get(bound, self.grid_rule)
        return BoundConfig(
            noise=self.noise, domain=self.domain, delta=self.delta, B=self.B,
            time_mode=self.time_mode, grid_rule=rule,
            hoelder=self.kernel.hoelder(self.domain),
            bnd_independent_zeta=self.bnd_independent_zeta, ht_delta=self.ht_delta,
        )

    def effective(self) -> dict:
        """Raw config with profile and seed overrides resolved; re-parses to an equal config."""
        out = dict(self.raw)
        out.update(seed=self.seed, runs=self.runs, t_max=self.t_max, checkpoints=list(self.checkpoints),
                   name=self.name)
        out.pop("profiles", None)
        return out

    def section(self, key: str) -> dict:
        val = self.raw.get(key, {})
        if not isinstance(val, dict):
            raise ConfigurationError(f"{key!r} must be an object")
        return val


def config_hash(raw: dict) -> str:
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


class _Anchor:
    """Maps config keys to the source line where they first appear."""

    def __init__(self, text: str, origin: str):
        self.text = text
        self.origin = origin

    def line_of(self, key: str) -> Optional[int]:
        m = re.search(r'"%s"\s*:' % re.escape(key), self.text)
        return self.text.count("\n", 0, m.start()) + 1 if m else None

    def error(self, key: str, msg: str) -> ConfigurationError:
        line = self.line_of(key)
        where = f"{self.origin}:{line}" if line else self.origin
        return ConfigurationError(f"{where}: {msg}")


def load_config(path, profile: str = "ci", seed: Optional[int] = None) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigurationError(f"{path}: cannot read config ({exc.strerror or exc})") from exc
    return parse_config(text, origin=str(path), profile=profile, seed=seed, default_name=p.stem)


def parse_config(text: str, origin: str = "<config>", profile: str = "ci", seed: Optional[int] = None,
                 default_name: str = "experiment") -> ExperimentConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{origin}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError(f"{origin}:1: top level must be a JSON object")
    anchor = _Anchor(text, origin)
    try:
        return from_dict(raw, profile=profile, seed=seed, default_name=default_name, anchor=anchor)
    except KRRBoundsError as exc:
        if str(exc).startswith(origin):
            raise
        raise ConfigurationError(f"{origin}: {exc}") from exc


def _get(raw: dict, key: str, kind, default, anchor: _Anchor, check=None):
    val = raw.get(key, default)
    if val is None:
        if default is None and check is not None:
            raise anchor.error(key, f"missing required key {key!r}")
        return val
    try:
        out = kind(val)
    except (TypeError, ValueError):
        raise anchor.error(key, f"{key!r} must be {kind.__name__}, got {val!r}") from None
    if kind is int and isinstance(val, float) and val != out:
        raise anchor.error(key, f"{key!r} must be an integer, got {val!r}")
    if check is not None and not check(out):
        raise anchor.error(key, f"invalid value for {key!r}: {val!r}")
    return out


def parse_kernel(d: dict) -> KernelSpec:
    if not isinstance(d, dict) or "family" not in d:
        raise ConfigurationError("kernel must be an object with a 'family'")
    return KernelSpec(
        d["family"], float(d.get("lengthscale", 1.0)),
        None if d.get("hoelder_L") is None else float(d["hoelder_L"]),
        None if d.get("hoelder_p") is None else float(d["hoelder_p"]),
    )


def parse_domain(d: dict) -> DomainBox:
    if not isinstance(d, dict):
        raise ConfigurationError("domain must be an object")
    if "interval" in d:
        lo, hi = d["interval"]
        return DomainBox.interval(float(lo), float(hi))
    if "lower" not in d or "edge" not in d:
        raise ConfigurationError("domain needs 'interval' or both 'lower' and 'edge'")
    return DomainBox(tuple(float(v) for v in d["lower"]), float(d["edge"]))


def parse_noise(d: dict) -> nm.NoiseModel:
    if not isinstance(d, dict) or "class" not in d:
        raise ConfigurationError("noise must be an object with a 'class'")
    cls = d["class"]
    extra = {k: d[k] for k in ("sampler", "sampler_scale") if k in d}
    opt = lambda k: None if d.get(k) is None else float(d[k])
    try:
        if cls == "sub_gaussian":
            if "sigma" in d:
                return nm.SubGaussian(float(d["sigma"]) ** 2, **extra)
            return nm.SubGaussian(float(d["sigma2"]), **extra)
        if cls == "bounded":
            return nm.Bounded(float(d["m_bar"]), opt("sigma_bar2"), **extra)
        if cls == "sub_exponential":
            return nm.SubExponential(float(d["nu2"]), float(d["alpha"]), opt("variance"), **extra)
        if cls == "variance_bounded":
            return nm.VarianceBounded(float(d["sigma2"]), **extra)
        if cls == "correlated_sub_gaussian":
            if "C" in d:
                return nm.CorrelatedSubGaussian(d["C"], **extra)
            return nm.CorrelatedSubGaussian.ar1(int(d["size"]), float(d["sigma2"]), float(d["phi"]))
    except KeyError as exc:
        raise ConfigurationError(f"noise class {cls!r} is missing parameter {exc.args[0]!r}") from None
    raise ConfigurationError(
        f"unknown noise class {cls!r}; valid: bounded, sub_gaussian, sub_exponential, "
        "variance_bounded, correlated_sub_gaussian"
    )


def parse_time_mode(v) -> TimeMode:
    if isinstance(v, str):
        return TimeMode(v)
    if isinstance(v, dict):
        return TimeMode(v.get("kind", "all_times"), v.get("horizon"))
    raise ConfigurationError("time_mode must be a string or an object")


def parse_grid_rule(v) -> GridRule:
    if not isinstance(v, dict):
        raise ConfigurationError("grid_rule must be an object with 'kind' and 'value'")
    return GridRule(v.get("kind", "fixed_delta"), float(v.get("value", 1e-3)))


def default_checkpoints(t_max: int) -> tuple[int, ...]:
    pts = {t_max}
    for dec in (1, 10, 100, 1000, 10000):
        for m in (1, 2, 5):
            if m * dec < t_max:
                pts.add(m * dec)
    return tuple(sorted(pts))


def from_dict(raw: dict, profile: str = "ci", seed: Optional[int] = None, default_name: str = "experiment",
              anchor: Optional[_Anchor] = None) -> ExperimentConfig:
    anchor = anchor or _Anchor(json.dumps(raw, indent=1), "<config>")
    if profile not in PROFILES:
        raise ConfigurationError(f"unknown profile {profile!r}; valid: {', '.join(PROFILES)}")
    exp = raw.get("experiment")
    if exp not in EXPERIMENTS:
        raise anchor.error("experiment", f"'experiment' must be one of {', '.join(EXPERIMENTS)}, got {exp!r}")

    scale = dict(PROFILES["ci"])
    if profile == "paper":
        scale.update(PROFILES["paper"])
        scale.update(raw.get("profiles", {}).get("paper", {}))
        eff = {**raw, **scale}
    else:
        eff = {**scale, **raw}

    runs = _get(eff, "runs", int, None, anchor, lambda v: v >= 1)
    t_max = _get(eff, "t_max", int, None, anchor, lambda v: v >= 1)
    cps = eff.get("checkpoints")
    if cps is None:
        checkpoints = default_checkpoints(t_max)
    else:
        if not isinstance(cps, list) or not all(isinstance(c, int) and c >= 0 for c in cps):
            raise anchor.error("checkpoints", "'checkpoints' must be a list of nonnegative integers")
        checkpoints = tuple(sorted({c for c in cps if c <= t_max}))
        if profile == "paper" and t_max not in checkpoints:
            checkpoints = checkpoints + (t_max,)
        if not checkpoints:
            raise anchor.error("checkpoints", "no checkpoint within t_max")

    names = raw.get("bounds", raw.get("bound", []))
    if isinstance(names, str):
        names = [names]
    if not isinstance(names, list):
        raise anchor.error("bounds", "'bounds' must be a list of bound names")
    for n in names:
        if n not in BOUND_NAMES:
            key = "bounds" if "bounds" in raw else "bound"
            raise anchor.error(key, f"unknown bound {n!r}; valid names: {', '.join(BOUND_NAMES)}")

    def sub(key, parser, default=None):
        if key not in raw:
            if default is None:
                raise anchor.error(key, f"missing required section {key!r}")
            return parser(default)
        try:
            return parser(raw[key])
        except KRRBoundsError as exc:
            raise anchor.error(key, str(exc)) from None
        except (TypeError, ValueError) as exc:
            raise anchor.error(key, f"malformed {key!r}: {exc}") from None

    kernel = sub("kernel", parse_kernel)
    domain = sub("domain", parse_domain)
    noise = sub("noise", parse_noise)
    time_mode = sub("time_mode", parse_time_mode, "all_times")
    grid_rule = sub("grid_rule", parse_grid_rule, {"kind": "fixed_delta", "value": 1e-3})
    rules_raw = {**DEFAULT_RULES, **raw.get("grid_rules", {})}
    grid_rules = {}
    for k, v in rules_raw.items():
        try:
            grid_rules[check_name(k)] = parse_grid_rule(v)
        except KRRBoundsError as exc:
            raise anchor.error("grid_rules", str(exc)) from None

    ht = raw.get("heavy_tailed", {})
    ch = raw.get("chowdhury", {})
    options = SelectorOptions(
        ht_a=float(ht.get("a", 1.0)), ht_v_bar=float(ht.get("v_bar", 1.0)),
        chowdhury_v_bar=float(ch.get("v_bar", 1.0)),
    )
    seed_v = seed if seed is not None else _get(raw, "seed", int, 0, anchor)
    rho = _get(raw, "rho", float, None, anchor, lambda v: v > 0 and math.isfinite(v))
    delta = _get(raw, "delta", float, 1e-3, anchor, lambda v: 0 < v < 1)
    B = _get(raw, "B", float, 1.0, anchor, lambda v: v >= 0 and math.isfinite(v))
    eval_grid = _get(raw, "eval_grid", int, 200, anchor, lambda v: v >= 2)
    ht_delta = raw.get("ht_delta", "proof")
    if ht_delta not in ("proof", "table"):
        raise anchor.error("ht_delta", "'ht_delta' must be 'proof' or 'table'")
    cfg = ExperimentConfig(
        experiment=exp, raw=raw, seed=seed_v, runs=runs, t_max=t_max, checkpoints=checkpoints,
        eval_grid=eval_grid, bounds=tuple(names), kernel=kernel, domain=domain, noise=noise,
        rho=rho, delta=delta, B=B, time_mode=time_mode, grid_rule=grid_rule, grid_rules=grid_rules,
        bnd_independent_zeta=bool(raw.get("bnd_independent_zeta", False)), ht_delta=ht_delta,
        options=options, name=str(raw.get("name", default_name)),
    )
    return cfg


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(cfg, **kw)
