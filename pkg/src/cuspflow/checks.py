"""Named verification checks, one per acceptance criterion, plus sanity checks.

Every check returns a :class:`Check` and appends tidy ``(x, series, value)``
rows to a CSV buffer. ``scale`` multiplies every tolerance (slack around a
target, or a bound) so that the same code serves strict and relaxed runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Tuple

import numpy as np

from .config import ExperimentConfig
from .cusp_model import MetricState, RadialGrid, SymTensorField, WeightSpec, background_metric, trivial_einstein
from .cusp_ode import AveragedField, averaged_residual, characteristic_roots, ode_left_sides, solve_averaged, weighted_sup_constant
from .flow import FlowConfig, Perturbation, fit_decay_rate, run_flow, smoothing_exponent
from .norms import holder_norm, k_profile, l2_norm, scale_sweep, weighted_ck_norm
from .operators import deturck_rhs, linearized_apply
from .probes import holder_corpus, smooth_ensemble
from .spectral import (
    ResolventSpec,
    apriori_ratio,
    assemble_resolvent,
    coercivity_margin,
    conjugated_spectrum,
    graph_norm_ratio,
    resolvent_bound,
)

Row = Tuple[object, str, object]


@dataclass
class Check:
    name: str
    passed: bool
    value: object
    tolerance: object
    criterion: int = 0
    detail: Dict[str, object] = field(default_factory=dict)

    def as_json(self) -> Dict[str, object]:
        return {
            "pass": bool(self.passed),
            "value": _plain(self.value),
            "tolerance": _plain(self.tolerance),
            "criterion": self.criterion,
            "detail": {k: _plain(v) for k, v in self.detail.items()},
        }


def _plain(v):
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_plain(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def _in_band(x, center, half):
    return bool(center - half <= x <= center + half)


# ----------------------------------------------------------------------------
# ode


def check_roots(cfg: ExperimentConfig, rows: List[Row], scale: float = 1.0) -> Check:
    """Roots against numpy.roots of m^2 - 2m - (k - 1 + omega) on a 10 x 10 grid."""
    side = max(int(round(np.sqrt(cfg.sweep.root_points))), 2)
    re = np.linspace(-0.9, 5.0, side)
    im = np.linspace(-2.0, 2.0, side)
    worst = 0.0
    for a in re:
        for b in im:
            w = complex(a, b)
            for k, (mm, mp) in zip((1, 4, 5), characteristic_roots(w)):
                ref = np.roots([1.0, -2.0, -(k - 1 + w)])
                ref = ref[np.argsort(ref.real)]
                worst = max(worst, abs(mm - ref[0]), abs(mp - ref[1]))
    w0 = cfg.sweep.ode_omega
    for k, (mm, mp) in zip((1, 4, 5), characteristic_roots(w0)):
        for tag, m in (("minus", mm), ("plus", mp)):
            rows.append((w0.real, f"root_k{k}_{tag}_re", float(np.real(m))))
            rows.append((w0.real, f"root_k{k}_{tag}_im", float(np.imag(m))))
    tol = 1e-12 * scale
    return Check("c01_characteristic_roots", worst <= tol, worst, tol, 1, {"grid_points": side * side})


def _manufactured(grid: RadialGrid, omega: complex):
    a = np.array([0.3, -0.2, 0.5, 0.4, -0.1, 0.8])
    c, w = 6.0, 1.5
    x = grid.r - c
    G = np.exp(-x * x / (2 * w * w))
    L = np.outer(G, a)
    L1 = np.outer(-x / w**2 * G, a)
    L2 = np.outer((x * x / w**4 - 1 / w**2) * G, a)
    F = ode_left_sides(L, L1, L2, omega)
    fhat = AveragedField.from_frame(grid, F)
    inner = L[0] / grid.frame_scale[0]
    return L, fhat, inner


def check_ode(cfg: ExperimentConfig, rows: List[Row], scale: float = 1.0) -> Check:
    """Manufactured-solution order plus finite weighted sup constants over the sweep."""
    grid, W, H = cfg.grid, cfg.weight, cfg.holder
    w0 = cfg.sweep.ode_omega
    errs = []
    for g in (grid, grid.refined()):
        L, fhat, inner = _manufactured(g, w0)
        lh = solve_averaged(fhat, w0, inner, W)
        errs.append(float(np.abs(lh.frame() - L).max()))
        if g is grid:
            for key, v in averaged_residual(lh, fhat, w0).items():
                rows.append((w0.real, f"residual_{key}", v))
    ratio = errs[0] / errs[1]
    omegas = _omega_sweep(cfg)
    probes = smooth_ensemble(grid, cfg.seed, cfg.sweep.probes, "resolvent-probes")
    consts = []
    for w in omegas:
        best = 0.0
        for f in probes:
            lh = solve_averaged(AveragedField(grid, f.comps), w, np.zeros(6), W)
            best = max(best, weighted_sup_constant(lh, AveragedField(grid, f.comps), W, H))
        consts.append(best)
        rows.append((w, "weighted_sup_constant", best))
    consts = np.array(consts)
    ok = _in_band(ratio, 4.0, 0.5 * scale) and bool(np.all(np.isfinite(consts)))
    return Check(
        "c08_ode_solver", ok, ratio, [4.0 - 0.5 * scale, 4.0 + 0.5 * scale], 8,
        {"errors": errs, "sup_constant_min": consts.min(), "sup_constant_max": consts.max()},
    )


# ----------------------------------------------------------------------------
# spectrum (operator level)


def check_fixed_point(cfg: ExperimentConfig, rows: List[Row], scale: float = 1.0) -> Check:
    res = []
    for g in (cfg.grid, cfg.grid.refined()):
        res.append(float(np.abs(deturck_rhs(background_metric(g)).comps[1:-1]).max()))
        rows.append((g.dr, "rhs_h0_sup", res[-1]))
    ratio = res[0] / res[1]
    bound = 1e-3 * scale
    ok = res[0] <= bound and _in_band(ratio, 4.0, 0.5 * scale)
    return Check("c02_fixed_point_order", ok, {"sup": res[0], "ratio": ratio}, {"sup_max": bound, "ratio": [4 - 0.5 * scale, 4 + 0.5 * scale]}, 2,
                 {"sup_refined": res[1]})


def check_linearization(cfg: ExperimentConfig, rows: List[Row], scale: float = 1.0) -> Check:
    """Second-order remainder of the background-subtracted expansion."""
    grid = cfg.grid
    h0 = background_metric(grid)
    base = deturck_rhs(h0).comps
    eps = (1e-2, 1e-3, 1e-4)
    worst, literal = 0.0, []
    for i, l in enumerate(smooth_ensemble(grid, cfg.seed, cfg.sweep.fields, "linearization")):
        Al = linearized_apply(l).comps
        q = []
        for e in eps:
            v = deturck_rhs(MetricState(SymTensorField(grid, h0.comps + e * l.comps)))
            q.append(np.abs(v.comps - base - e * Al)[1:-1].max() / e**2)
            if i == 0:
                literal.append(float(np.abs(v.comps - e * Al)[1:-1].max() / e**2))
            rows.append((e, f"remainder_ratio_field{i}", q[-1]))
        worst = max(worst, max(q) / min(q) - 1.0)
    tol = 0.25 * scale
    return Check("c03_linearization", worst < tol, worst, tol, 3, {"literal_ratio_field0": literal})


def check_trivial_einstein(cfg: ExperimentConfig, rows: List[Row], scale: float = 1.0) -> Check:
    res = []
    for g in (cfg.grid, cfg.grid.refined()):
        u = trivial_einstein(g)
        res.append(float(np.abs(linearized_apply(u).frame()[1:-1]).max() / np.abs(u.frame()).max()))
        rows.append((g.dr, "A_trivial_einstein_sup", res[-1]))
    ratio = res[0] / res[1]
    bound = 1e-3 * scale
    ok = res[0] <= bound and _in_band(ratio, 4.0, 0.5 * scale)
    return Check("c04_trivial_einstein", ok, {"sup": res[0], "ratio": ratio}, {"sup_max": bound, "ratio": [4 - 0.5 * scale, 4 + 0.5 * scale]}, 4,
                 {"sup_refined": res[1]})


def check_spectrum(cfg: ExperimentConfig, rows: List[Row], scale: float = 1.0) -> Check:
    margins = {}
    for lam in cfg.sweep.lambdas:
        W = WeightSpec(lam, cfg.s)
        ev = conjugated_spectrum(W, cfg.grid, 5)
        for j, e in enumerate(ev):
            rows.append((lam, f"eig{j}_re", float(e.real)))
            rows.append((lam, f"eig{j}_im", float(e.imag)))
        margins[str(lam)] = float(ev[0].real - W.omega0)
    tol = 0.05 * scale
    worst = max(margins.values())
    return Check("c05_spectral_threshold", worst <= tol, worst, tol, 5, {"rightmost_minus_threshold": margins})


# ----------------------------------------------------------------------------
# coercivity, resolvent, a priori


def check_coercivity(cfg: ExperimentConfig, rows: List[Row], scale: float = 1.0) -> Check:
    samples = smooth_ensemble(cfg.grid, cfg.seed, cfg.sweep.coercivity_samples, "coercivity", trace_free=True)
    worst = np.inf
    for w in cfg.sweep.coercivity_omegas:
        res = coercivity_margin(w, samples)
        rows.append((w, "min_relative_margin", res.min_relative))
        worst = min(worst, res.min_relative)
    tol = -1e-8 * scale
    return Check("c06_coercivity", worst >= tol, worst, tol, 6)


def _omega_sweep(cfg: ExperimentConfig) -> np.ndarray:
    a, b = cfg.sweep.omega_offsets
    return cfg.weight.omega0 + np.linspace(a, b, cfg.sweep.omega_count)


def check_resolvent(cfg: ExperimentConfig, rows: List[Row], scale: float = 1.0) -> Check:
    omegas = _omega_sweep(cfg)
    tab = resolvent_bound(omegas, cfg.sweep.probes, cfg.seed, cfg.grid, cfg.weight, cfg.holder)
    for w, c in zip(tab.omegas, tab.bounds):
        rows.append((float(w), "C", float(c)))
    finite = bool(np.all(np.isfinite(tab.bounds)))
    tol = 50.0 * scale
    spread = tab.spread if finite else np.inf
    return Check("c07_resolvent_bound", finite and spread <= tol, spread, tol, 7,
                 {"C_min": tab.bounds.min(), "C_max": tab.bounds.max()})


def check_apriori(cfg: ExperimentConfig, rows: List[Row], scale: float = 1.0) -> Check:
    caps = []
    for g in (cfg.grid, cfg.grid.refined()):
        system = assemble_resolvent(ResolventSpec(cfg.sweep.apriori_omega, g))
        fs = smooth_ensemble(g, cfg.seed, cfg.sweep.apriori_samples, "apriori")
        ratios = [apriori_ratio(f, cfg.sweep.apriori_omega, cfg.sweep.apriori_xi, system) for f in fs]
        for i, q in enumerate(ratios):
            rows.append((i, f"ratio_n{g.n}", q))
        caps.append(float(np.max(ratios)))
    drift = abs(caps[0] / caps[1] - 1.0)
    tol = 0.2 * scale
    return Check("c09_apriori_cap", bool(np.all(np.isfinite(caps))) and drift <= tol, drift, tol, 9, {"caps": caps})


# ----------------------------------------------------------------------------
# flow


def check_flow_decay(cfg: ExperimentConfig, rows: List[Row], scale: float = 1.0) -> Check:
    zero = cfg.flow.profile == "zero" or cfg.flow.amplitude == 0.0
    rates, need = {}, {}
    ok = True
    for lam in cfg.flow.lambdas:
        tr = run_flow(cfg.flow_config(lam))
        for i, t in enumerate(tr.times):
            for key in ("x0", "x1", "c0"):
                rows.append((t, f"lambda{lam}_{key}", tr.norms[key][i]))
        if zero:
            top = max(float(v.max()) for v in tr.norms.values())
            rates[str(lam)] = top
            ok = ok and top == 0.0
            continue
        fit = fit_decay_rate(tr.times, tr.norms["x1"], tuple(cfg.flow.window))
        target = (1.0 - 0.2 * scale) * lam * (2 - lam)
        rates[str(lam)], need[str(lam)] = fit.rate, target
        ok = ok and fit.rate >= target
    if zero:
        return Check("c10_flow_decay", ok, rates, 0.0, 10, {"mode": "zero perturbation stays at h0"})
    return Check("c10_flow_decay", ok, rates, need, 10, {"window": list(cfg.flow.window), "norm": "x1"})


def smoothing_runs(cfg: ExperimentConfig, seed: int):
    sm = cfg.smoothing
    g = RadialGrid(cfg.s, cfg.s + sm.R, sm.n, cfg.torus_area0)
    pert = Perturbation(sm.amplitude, "rough", (cfg.s + 2.0, cfg.s + sm.R - 2.0), seed, sm.jumps)
    fc = FlowConfig(dt=sm.dt, T=sm.T, grid=g, weight=cfg.weight, holder=cfg.holder, perturbation=pert, norms=("c0", "c1", "c2"))
    tr = run_flow(fc)
    window = (10 * sm.dt, sm.T)
    c00 = tr.norms["c0"][0]
    return tr, {k: smoothing_exponent(tr.times, tr.norms[k], c00, window).rate for k in ("c0", "c1", "c2")}


def check_smoothing(cfg: ExperimentConfig, rows: List[Row], scale: float = 1.0) -> Check:
    tr, slopes = smoothing_runs(cfg, cfg.seed)
    for i, t in enumerate(tr.times):
        for k in ("c0", "c1", "c2"):
            rows.append((t, f"smoothing_{k}", tr.norms[k][i]))
    ok = _in_band(slopes["c1"], -0.5, 0.15 * scale) and _in_band(slopes["c2"], -1.0, 0.2 * scale)
    return Check("c11_smoothing_exponents", ok, slopes, {"c1": [-0.5, 0.15 * scale], "c2": [-1.0, 0.2 * scale]}, 11)


# ----------------------------------------------------------------------------
# norms and K-functional


def check_kfunctional(cfg: ExperimentConfig, rows: List[Row], scale: float = 1.0) -> Check:
    grid, W = cfg.grid, cfg.weight
    theta = cfg.holder.theta
    ts = scale_sweep(grid, cfg.sweep.kfun_scales)
    ratios = []
    for i, l in enumerate(holder_corpus(grid, cfg.seed, cfg.sweep.kfun_fields, theta)):
        top = float(np.max(k_profile(l, ts, theta, W)))
        ratios.append(top / holder_norm(l, 0, theta, W))
        rows.append((i, "sup_k_over_holder", ratios[-1]))
    factor = 10.0 * scale
    equiv = bool(min(ratios) >= 1 / factor and max(ratios) <= factor)

    def decay(g: RadialGrid):
        lo, hi = g.s + 0.5, g.R - 0.5
        l = smooth_ensemble(g, cfg.seed, 1, "k-smooth", support=(lo, hi))[0]
        t = np.geomspace(10 * g.dr, 1.0, cfg.sweep.kfun_scales)
        prof = k_profile(l, t, theta, W)
        return t, prof, bool(np.all(np.diff(prof[:-1]) > 0)), float(prof[0] / prof[-1])

    t, prof, mono, rel = decay(grid)
    for a, b in zip(t, prof):
        rows.append((a, "smooth_profile", b))
    fine = RadialGrid(cfg.s, cfg.s + 3.0, cfg.sweep.kfun_fine_n, cfg.torus_area0)
    _, _, mono_f, rel_f = decay(fine)
    tol = 0.01 * scale
    ok = equiv and mono and rel < tol
    return Check(
        "c12_k_functional", ok, {"ratio_min": min(ratios), "ratio_max": max(ratios), "profile_at_10dr": rel},
        {"factor": factor, "profile_at_10dr_max": tol}, 12,
        {"monotone_below_t1": mono, "fine_grid_dr": fine.dr, "fine_profile_at_10dr": rel_f, "fine_monotone": mono_f},
    )


def check_norms(cfg: ExperimentConfig, rows: List[Row], scale: float = 1.0) -> Check:
    """Homogeneity of every norm on seeded probes, and a finite graph-norm ratio."""
    grid, W, H = cfg.grid, cfg.weight, cfg.holder
    probes = smooth_ensemble(grid, cfg.seed, cfg.sweep.fields, "norm-probes")
    worst = 0.0
    for i, l in enumerate(probes):
        vals = {
            "x0": holder_norm(l, 0, H.rho, W),
            "x1": holder_norm(l, 2, H.rho, W),
            "c0": weighted_ck_norm(l, 0, W),
            "c2": weighted_ck_norm(l, 2, W),
            "l2": l2_norm(l),
        }
        for k, v in vals.items():
            rows.append((i, k, v))
        doubled = {"x0": holder_norm(l * 2.0, 0, H.rho, W), "c0": weighted_ck_norm(l * 2.0, 0, W), "l2": l2_norm(l * 2.0)}
        worst = max(worst, max(abs(doubled[k] / vals[k] - 2.0) for k in doubled))
    st = graph_norm_ratio(probes, W, H)
    for i, q in enumerate(st.ratios):
        rows.append((i, "graph_ratio", q))
    ok = worst <= 1e-12 * scale and 0 < st.min <= st.max < np.inf
    return Check("norms_sanity", ok, worst, 1e-12 * scale, 0, {"graph_ratio_min": st.min, "graph_ratio_max": st.max})


SUBCOMMANDS: Dict[str, List[Callable]] = {
    "ode": [check_roots, check_ode],
    "spectrum": [check_fixed_point, check_linearization, check_trivial_einstein, check_spectrum],
    "coercivity": [check_coercivity],
    "resolvent": [check_resolvent],
    "apriori": [check_apriori],
    "flow": [check_flow_decay, check_smoothing],
    "norms": [check_norms],
    "kfun": [check_kfunctional],
}
