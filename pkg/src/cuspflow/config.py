"""Experiment configuration: line-oriented ``key = value`` files.

Keys are dotted (``grid.n = 400``); ``#`` starts a comment. Lists are comma
separated. Unknown keys are rejected, and every violation found while
parsing and validating is reported at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, List, Tuple

from .cusp_model import HolderOrders, RadialGrid, WeightSpec
from .errors import ConfigError
from .flow import PROFILES, SCHEMES, FlowConfig, Perturbation


def _floats(text: str) -> Tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


# key -> (section attribute, field, parser)
_KEYS = {
    "seed": ("", "seed", int),
    "out": ("", "out", str),
    "weight.lambda": ("", "lam", float),
    "weight.s": ("", "s", float),
    "holder.sigma": ("", "sigma", float),
    "holder.rho": ("", "rho", float),
    "holder.alpha": ("", "alpha", float),
    "grid.R": ("", "R", float),
    "grid.n": ("", "n", int),
    "grid.torus_area0": ("", "torus_area0", float),
    "flow.dt": ("flow", "dt", float),
    "flow.T": ("flow", "T", float),
    "flow.scheme": ("flow", "scheme", str),
    "flow.amplitude": ("flow", "amplitude", float),
    "flow.profile": ("flow", "profile", str),
    "flow.support": ("flow", "support", _floats),
    "flow.stride": ("flow", "stride", int),
    "flow.lambdas": ("flow", "lambdas", _floats),
    "flow.window": ("flow", "window", _floats),
    "smoothing.R": ("smoothing", "R", float),
    "smoothing.n": ("smoothing", "n", int),
    "smoothing.dt": ("smoothing", "dt", float),
    "smoothing.T": ("smoothing", "T", float),
    "smoothing.jumps": ("smoothing", "jumps", int),
    "smoothing.amplitude": ("smoothing", "amplitude", float),
    "sweep.lambdas": ("sweep", "lambdas", _floats),
    "sweep.omega_offsets": ("sweep", "omega_offsets", _floats),
    "sweep.omega_count": ("sweep", "omega_count", int),
    "sweep.probes": ("sweep", "probes", int),
    "sweep.root_points": ("sweep", "root_points", int),
    "sweep.fields": ("sweep", "fields", int),
    "ode.omega": ("sweep", "ode_omega", complex),
    "coercivity.samples": ("sweep", "coercivity_samples", int),
    "coercivity.omegas": ("sweep", "coercivity_omegas", _floats),
    "apriori.samples": ("sweep", "apriori_samples", int),
    "apriori.omega": ("sweep", "apriori_omega", float),
    "apriori.xi": ("sweep", "apriori_xi", float),
    "kfun.fields": ("sweep", "kfun_fields", int),
    "kfun.scales": ("sweep", "kfun_scales", int),
    "kfun.fine_n": ("sweep", "kfun_fine_n", int),
}


@dataclass(frozen=True)
class FlowSection:
    dt: float = 0.05
    T: float = 12.0
    scheme: str = "imex-euler"
    amplitude: float = 1e-3
    profile: str = "bump"
    support: Tuple[float, ...] = (4.0, 12.0)
    stride: int = 1
    lambdas: Tuple[float, ...] = (1.0, 0.5)
    window: Tuple[float, ...] = (2.0, 12.0)


@dataclass(frozen=True)
class SmoothingSection:
    """Fine grid and step for the rough-data smoothing runs."""

    R: float = 12.0
    n: int = 1201
    dt: float = 1e-3
    T: float = 0.1
    jumps: int = 4
    amplitude: float = 1e-3


@dataclass(frozen=True)
class SweepSection:
    lambdas: Tuple[float, ...] = (0.25, 0.5, 0.75, 1.0)
    omega_offsets: Tuple[float, ...] = (0.25, 10.0)
    omega_count: int = 41
    probes: int = 20
    root_points: int = 100
    fields: int = 10
    ode_omega: complex = 0j
    coercivity_samples: int = 100
    coercivity_omegas: Tuple[float, ...] = (-0.9, 0.0, 1.0, 5.0)
    apriori_samples: int = 50
    apriori_omega: float = 0.0
    apriori_xi: float = 0.5
    kfun_fields: int = 10
    kfun_scales: int = 24
    kfun_fine_n: int = 24001


@dataclass(frozen=True)
class ExperimentConfig:
    lam: float = 1.0
    s: float = 0.0
    sigma: float = 0.2
    rho: float = 0.6
    alpha: float = 0.5
    R: float = 20.0
    n: int = 400
    torus_area0: float = 1.0
    seed: int = 0
    out: str = "out"
    flow: FlowSection = FlowSection()
    smoothing: SmoothingSection = SmoothingSection()
    sweep: SweepSection = SweepSection()

    @property
    def weight(self) -> WeightSpec:
        return WeightSpec(self.lam, self.s)

    @property
    def holder(self) -> HolderOrders:
        return HolderOrders(self.sigma, self.rho, self.alpha)

    @property
    def grid(self) -> RadialGrid:
        return RadialGrid(self.s, self.R + self.s, self.n, self.torus_area0)

    def flow_config(self, lam: float | None = None, **over) -> FlowConfig:
        f = self.flow
        pert = Perturbation(f.amplitude, f.profile, tuple(f.support), self.seed)
        kw = dict(
            dt=f.dt, T=f.T, scheme=f.scheme, perturbation=pert, stride=f.stride, grid=self.grid,
            weight=WeightSpec(self.lam if lam is None else lam, self.s), holder=self.holder,
        )
        kw.update(over)
        return FlowConfig(**kw)

    def as_dict(self) -> Dict[str, object]:
        """Flat dotted-key echo of every setting."""
        out = {}
        for key, (sec, name, _) in _KEYS.items():
            obj = getattr(self, sec) if sec else self
            v = getattr(obj, name)
            if isinstance(v, complex):
                v = [v.real, v.imag]
            elif isinstance(v, tuple):
                v = list(v)
            out[key] = v
        return out

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, seed=seed)


def validate(cfg: ExperimentConfig) -> List[str]:
    """All invariant violations, each prefixed by the offending key."""
    errs = []

    def attempt(keys, fn):
        try:
            fn()
        except ValueError as exc:
            errs.append(f"{keys}: {exc}")

    attempt("weight.lambda/weight.s", lambda: cfg.weight)
    attempt("holder.*", lambda: cfg.holder)
    attempt("grid.*", lambda: cfg.grid)
    if cfg.seed < 0 or cfg.seed >= 2**64:
        errs.append("seed: must be an unsigned 64-bit integer")
    f = cfg.flow
    if f.scheme not in SCHEMES:
        errs.append(f"flow.scheme: must be one of {SCHEMES}")
    if f.profile not in PROFILES:
        errs.append(f"flow.profile: must be one of {PROFILES}")
    if len(f.support) != 2 or not (cfg.s < f.support[0] < f.support[1] < cfg.s + cfg.R):
        errs.append("flow.support: need two radii inside (s, s + R) in increasing order")
    if len(f.window) != 2 or not (0 <= f.window[0] < f.window[1] <= f.T):
        errs.append("flow.window: need 0 <= t0 < t1 <= flow.T")
    for lam in f.lambdas:
        if not 0 < lam <= 1:
            errs.append(f"flow.lambdas: {lam} outside (0, 1]")
    for lam in cfg.sweep.lambdas:
        if not 0 < lam <= 1:
            errs.append(f"sweep.lambdas: {lam} outside (0, 1]")
    if not errs:
        attempt("flow.*", lambda: cfg.flow_config())
    sm = cfg.smoothing
    if not (sm.dt > 0 and sm.T > 10 * sm.dt):
        errs.append("smoothing.dt/T: need T > 10 dt > 0")
    if sm.n < 5 or sm.R < 6:
        errs.append("smoothing.R/n: need R >= 6 and n >= 5")
    sw = cfg.sweep
    if len(sw.omega_offsets) != 2 or not 0 < sw.omega_offsets[0] < sw.omega_offsets[1]:
        errs.append("sweep.omega_offsets: need 0 < a < b")
    for name in ("omega_count", "probes", "root_points", "fields", "coercivity_samples", "apriori_samples", "kfun_fields"):
        if getattr(sw, name) < 1:
            errs.append(f"sweep.{name}: must be positive")
    if sw.kfun_scales < 2:
        errs.append("kfun.scales: need at least 2")
    if not 0 <= sw.apriori_xi:
        errs.append("apriori.xi: must be nonnegative")
    return errs


def parse_text(text: str, source: str = "<config>") -> ExperimentConfig:
    errs: List[str] = []
    top: Dict[str, object] = {}
    sections: Dict[str, Dict[str, object]] = {"flow": {}, "smoothing": {}, "sweep": {}}
    for num, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errs.append(f"{source}:{num}: malformed line {raw.strip()!r} (expected key = value)")
            continue
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in _KEYS:
            errs.append(f"{source}:{num}: unknown key {key!r}")
            continue
        sec, name, parse = _KEYS[key]
        try:
            v = parse(value.replace(" ", "") if parse is complex else value)
        except ValueError:
            errs.append(f"{source}:{num}: {key}: cannot parse {value!r}")
            continue
        (sections[sec] if sec else top)[name] = v
    if errs:
        raise ConfigError(errs)
    cfg = ExperimentConfig(
        **top,
        flow=FlowSection(**sections["flow"]),
        smoothing=SmoothingSection(**sections["smoothing"]),
        sweep=SweepSection(**sections["sweep"]),
    )
    errs = validate(cfg)
    if errs:
        raise ConfigError(errs)
    return cfg


def parse_config(path) -> ExperimentConfig:
    """Read and validate a config file; raises ConfigError listing every violation."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError([f"config file not found: {p}"])
    return parse_text(p.read_text(), str(p))
