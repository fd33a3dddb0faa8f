"""Time integration of the normalized Ricci-DeTurck flow on the truncated cusp.

The state is the metric h(t) on the radial grid with h = h0 held at both ends.
Both schemes advance the well-balanced velocity

    V(h) = deturck_rhs(h) - deturck_rhs(h0),

which vanishes exactly at h0. The discrete rhs(h0) is an O(dr^2) truncation
residue; keeping it would make the scheme relax to a nearby discrete steady
state instead of h0 and swamp small perturbations.

``imex-euler`` treats the linearization implicitly:

    (I - dt A)(h' - h0) = (h - h0) + dt N(h),   N(h) = V(h) - A (h - h0),

with one sparse LU of the interior frame system per (grid, dt).
``explicit-euler`` is h' = h + dt V(h) and needs dt <= c dr^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Optional, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy import stats

from .cusp_model import (
    HolderOrders,
    MetricState,
    RadialGrid,
    SymTensorField,
    WeightSpec,
    background_comps,
    from_matrix,
    to_matrix,
    trivial_einstein,
)
from .errors import BlowupError, DegenerateMetricError, NearSingularError, NonpositiveNormError, PositivityLossError
from .norms import holder_norm, weighted_ck_norm, frame_jets
from .operators import _rhs_array, linearized_apply, linearized_matrix
from .probes import bump, rough_field, smooth_field
from .rng import SplitMix64

SCHEMES = ("imex-euler", "explicit-euler")
PROFILES = ("bump", "rough", "einstein", "zero")
NORM_KEYS = ("x0", "x1", "c0", "c1", "c2", "d1", "d2")
EXPLICIT_CFL = 0.4  # explicit Euler is stable for dt <= EXPLICIT_CFL * dr^2
BLOWUP_FACTOR = 1e6


@dataclass(frozen=True)
class Perturbation:
    amplitude: float = 1e-3
    profile: str = "bump"
    support: Tuple[float, float] = (4.0, 12.0)
    seed: int = 0
    jumps: int = 4  # discontinuities of the rough profile

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ValueError(f"profile must be one of {PROFILES}")
        if not self.amplitude >= 0:
            raise ValueError("amplitude must be nonnegative")
        lo, hi = self.support
        if not lo < hi:
            raise ValueError("support must be an increasing interval")


@dataclass(frozen=True)
class FlowConfig:
    """Run parameters. ``norms`` selects which entries of ``NORM_KEYS`` to record."""

    dt: float = 0.05
    T: float = 12.0
    scheme: str = "imex-euler"
    perturbation: Perturbation = Perturbation()
    stride: int = 1
    grid: RadialGrid = RadialGrid()
    weight: WeightSpec = WeightSpec()
    holder: HolderOrders = HolderOrders()
    norms: Tuple[str, ...] = ("x0", "x1", "c0", "c1", "c2")
    check_cfl: bool = True

    def __post_init__(self):
        if not self.dt > 0 or not self.T > 0:
            raise ValueError("dt and T must be positive")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.stride < 1:
            raise ValueError("stride must be at least 1")
        bad = set(self.norms) - set(NORM_KEYS)
        if bad:
            raise ValueError(f"unknown norm keys {sorted(bad)}")
        if self.check_cfl and self.scheme == "explicit-euler" and self.dt > self.cfl_bound:
            raise ValueError(f"explicit-euler needs dt <= {self.cfl_bound:.3g} (c dr^2)")

    @property
    def cfl_bound(self) -> float:
        return EXPLICIT_CFL * self.grid.dr**2

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))


@dataclass
class FlowTrace:
    """Sampled norms of g(t) - h0. ``min_eig`` is the smallest frame eigenvalue of g(t)."""

    times: np.ndarray
    norms: Dict[str, np.ndarray]
    min_eig: np.ndarray
    final: Optional[SymTensorField] = None
    fits: Dict[str, "DecayFit"] = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        for k, v in self.norms.items():
            v = np.asarray(v, dtype=float)
            if v.shape != self.times.shape or np.any(v < 0):
                raise ValueError(f"norm series {k!r} malformed")
            self.norms[k] = v

    @property
    def positive(self) -> np.ndarray:
        return self.min_eig > 0


@dataclass(frozen=True)
class DecayFit:
    rate: float
    intercept: float
    residual: float
    ci: Tuple[float, float]


# ----------------------------------------------------------------------------
# velocity pieces


@lru_cache(maxsize=16)
def _rhs_background(grid: RadialGrid) -> np.ndarray:
    return from_matrix(_rhs_array(to_matrix(background_comps(grid)), grid))


def velocity(h: MetricState) -> SymTensorField:
    """Well-balanced velocity deturck_rhs(h) - deturck_rhs(h0)."""
    g = h.grid
    return SymTensorField(g, from_matrix(_rhs_array(h.matrix(), g)) - _rhs_background(g))


def nonlinear_remainder(h: MetricState) -> SymTensorField:
    """N(h) = V(h) - A_{h0}(h - h0), quadratic in h - h0."""
    e = SymTensorField(h.grid, h.comps - background_comps(h.grid))
    return velocity(h) - linearized_apply(e)


# ----------------------------------------------------------------------------
# stepping


@lru_cache(maxsize=8)
def _imex_factor(grid: RadialGrid, dt: float):
    A = linearized_matrix(grid)[6:-6, 6:-6]
    M = (sp.identity(A.shape[0], format="csc") - dt * A).tocsc()
    try:
        lu = spla.splu(M)
    except RuntimeError as exc:
        raise NearSingularError(f"IMEX factorization failed for dt={dt}: {exc}") from exc
    return lu


def _as_state(comps: np.ndarray, grid: RadialGrid, t: float) -> MetricState:
    try:
        return MetricState(SymTensorField(grid, comps))
    except DegenerateMetricError as exc:
        raise PositivityLossError(f"positivity lost at t={t:.6g}: {exc}", time=t, nodes=exc.nodes) from exc


def step(h: MetricState, dt: float, scheme: str = "imex-euler", t: float = 0.0) -> MetricState:
    """One time step with h = h0 imposed at both boundary nodes."""
    grid = h.grid
    base = background_comps(grid)
    if scheme == "explicit-euler":
        new = h.comps + dt * velocity(h).comps
    elif scheme == "imex-euler":
        E = (h.comps - base) * grid.frame_scale
        N = nonlinear_remainder(h).comps * grid.frame_scale
        b = (E + dt * N)[1:-1].ravel()
        x = _imex_factor(grid, float(dt)).solve(b)
        L = np.zeros_like(E)
        L[1:-1] = x.reshape(-1, 6)
        new = base + L / grid.frame_scale
    else:
        raise ValueError(f"scheme must be one of {SCHEMES}")
    new[0], new[-1] = base[0], base[-1]
    if not np.all(np.isfinite(new)):
        raise BlowupError(f"non-finite metric at t={t + dt:.6g}", time=t + dt)
    return _as_state(new, grid, t + dt)


# ----------------------------------------------------------------------------
# perturbations and recording


def initial_perturbation(cfg: FlowConfig) -> SymTensorField:
    """Perturbation g(0) - h0 from the config profile (coordinate components)."""
    p, grid = cfg.perturbation, cfg.grid
    if p.profile == "zero" or p.amplitude == 0:
        return SymTensorField.zeros(grid)
    rng = SplitMix64(p.seed).spawn(f"flow-{p.profile}")
    lo, hi = p.support
    if p.profile == "bump":
        l = smooth_field(grid, rng, support=(lo, hi), n_bumps=1, widths=(0.5 * (hi - lo), 0.5 * (hi - lo)))
    elif p.profile == "rough":
        l = rough_field(grid, rng, (lo, hi), n_jumps=p.jumps)
    else:
        c, w = 0.5 * (lo + hi), 0.5 * (hi - lo)
        l = trivial_einstein(grid, profile=lambda r: bump(r, c, w))
    scale = np.abs(l.frame()).max()
    return l * (p.amplitude / scale)


def _norms_of(e: SymTensorField, cfg: FlowConfig) -> Dict[str, float]:
    W, H = cfg.weight, cfg.holder
    out = {}
    for key in cfg.norms:
        if key == "x0":
            out[key] = holder_norm(e, 0, H.rho, W)
        elif key == "x1":
            out[key] = holder_norm(e, 2, H.rho, W)
        elif key[0] == "c":
            out[key] = weighted_ck_norm(e, int(key[1]), W)
        else:
            # top-order piece sup w |nabla^k e| alone
            k = int(key[1])
            T = frame_jets(e, k)[k]
            out[key] = float(np.max(W.on_grid(e.grid) * np.sqrt(np.sum(T.reshape(T.shape[0], -1) ** 2, axis=1))))
    return out


def _min_eig(h: MetricState) -> float:
    F = to_matrix(h.comps * h.grid.frame_scale)
    return float(np.linalg.eigvalsh(F).min())


def run_flow(cfg: FlowConfig, init: Optional[SymTensorField] = None) -> FlowTrace:
    """Integrate to T from h0 + ``init`` (default from the config perturbation)."""
    grid = cfg.grid
    e0 = initial_perturbation(cfg) if init is None else init
    base = background_comps(grid)
    comps = base + e0.comps
    comps[0], comps[-1] = base[0], base[-1]
    h = _as_state(comps, grid, 0.0)
    times, mins = [0.0], [_min_eig(h)]
    series = {k: [v] for k, v in _norms_of(SymTensorField(grid, h.comps - base), cfg).items()}
    ref = max(max(v[0] for v in series.values()) if series else 0.0, 1e-300)
    for i in range(1, cfg.steps + 1):
        t_prev = (i - 1) * cfg.dt
        h = step(h, cfg.dt, cfg.scheme, t_prev)
        if i % cfg.stride and i != cfg.steps:
            continue
        t = i * cfg.dt
        vals = _norms_of(SymTensorField(grid, h.comps - base), cfg)
        for k, v in vals.items():
            if not math.isfinite(v) or (ref > 1e-300 and v > BLOWUP_FACTOR * ref):
                raise BlowupError(f"norm {k} blew up at t={t:.6g} ({v:.3g})", time=t)
            series[k].append(v)
        times.append(t)
        mins.append(_min_eig(h))
    return FlowTrace(np.array(times), {k: np.array(v) for k, v in series.items()}, np.array(mins), h.field)


# ----------------------------------------------------------------------------
# fitting


def _window(times, values, window):
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    lo, hi = window
    sel = (t >= lo - 1e-12) & (t <= hi + 1e-12)
    if sel.sum() < 2:
        raise ValueError(f"window {window} holds fewer than two samples")
    if np.any(y[sel] <= 0):
        raise NonpositiveNormError(f"nonpositive norm inside window {window}")
    return t[sel], y[sel]


def _linfit(x, y) -> DecayFit:
    res = stats.linregress(x, y)
    pred = res.intercept + res.slope * x
    resid = float(np.sqrt(np.mean((y - pred) ** 2)))
    half = float(stats.t.ppf(0.975, max(x.size - 2, 1)) * res.stderr) if x.size > 2 else float("nan")
    return DecayFit(float(-res.slope), float(res.intercept), resid, (float(-res.slope - half), float(-res.slope + half)))


def fit_decay_rate(times, values, window: Tuple[float, float] = (2.0, np.inf)) -> DecayFit:
    """Least-squares fit log(values) ~ intercept - rate * t on ``window``."""
    t, y = _window(times, values, window)
    return _linfit(t, np.log(y))


def fit_trace(trace: FlowTrace, key: str = "x1", window: Tuple[float, float] = (2.0, np.inf)) -> DecayFit:
    fit = fit_decay_rate(trace.times, trace.norms[key], window)
    trace.fits[key] = fit
    return fit


def smoothing_exponent(
    times, values, initial_c0: float, window: Tuple[float, float]
) -> DecayFit:
    """Log-log slope of values / initial_c0 against t; reported in ``rate`` as the slope.

    The returned ``rate`` field holds the slope itself (not its negative).
    """
    if not initial_c0 > 0:
        raise NonpositiveNormError("initial C0 norm must be positive")
    t, y = _window(times, np.asarray(values) / initial_c0, window)
    fit = _linfit(np.log(t), np.log(y))
    return DecayFit(-fit.rate, fit.intercept, fit.residual, (-fit.ci[1], -fit.ci[0]))
