"""Seeded test fields.

Every generator draws from a :class:`SplitMix64` stream and builds fields from
analytic profiles, so an ensemble does not depend on the grid resolution.
"""

from __future__ import annotations

from typing import List, Sequence, Tuple

import numpy as np

from .cusp_model import RadialGrid, SymTensorField
from .rng import SplitMix64


def bump(r: np.ndarray, center: float, width: float) -> np.ndarray:
    """C-infinity bump exp(1 - 1/(1-u^2)), peak 1, support |r - center| < width."""
    u = (np.asarray(r) - center) / width
    out = np.zeros_like(u, dtype=float)
    inside = np.abs(u) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    return out


def smooth_field(
    grid: RadialGrid,
    rng: SplitMix64,
    support: Tuple[float, float] | None = None,
    n_bumps: int = 3,
    widths: Tuple[float, float] = (0.75, 2.0),
    trace_free: bool = False,
    symmetric: bool = False,
) -> SymTensorField:
    """Sum of seeded bumps in frame components, compactly supported in ``support``.

    ``trace_free`` removes the h0-trace pointwise; ``symmetric`` enforces the
    x1 <-> x2 relabelling symmetry (L11 = L22, L13 = L23).
    """
    lo, hi = support if support is not None else (grid.s + 1.0, grid.R - 1.0)
    L = np.zeros((grid.n, 6))
    for _ in range(n_bumps):
        w = rng.uniform(*widths)
        w = min(w, 0.5 * (hi - lo))
        c = rng.uniform(lo + w, hi - w)
        amp = rng.uniforms(6, -1.0, 1.0)
        osc = rng.uniform(0.0, 2.0)
        phase = rng.uniform(0.0, 2 * np.pi)
        prof = bump(grid.r, c, w) * (1.0 + 0.3 * np.sin(osc * grid.r + phase))
        L += prof[:, None] * amp[None, :]
    if symmetric:
        L[:, 2] = L[:, 0]
        L[:, 4] = L[:, 3]
    if trace_free:
        tr = L[:, 0] + L[:, 2] + L[:, 5]
        L[:, 0] -= tr / 3.0
        L[:, 2] -= tr / 3.0
        L[:, 5] -= tr / 3.0
    return SymTensorField.from_frame(grid, L)


def smooth_ensemble(grid: RadialGrid, seed: int, count: int, label: str, **kw) -> List[SymTensorField]:
    rng = SplitMix64(seed).spawn(label)
    return [smooth_field(grid, rng, **kw) for _ in range(count)]


def holder_field(grid: RadialGrid, rng: SplitMix64, theta: float, support: Tuple[float, float]) -> SymTensorField:
    """Field whose frame components behave like |r - r0|^theta near a seeded r0."""
    lo, hi = support
    w = 0.45 * (hi - lo)
    c = rng.uniform(lo + w, hi - w)
    r0 = c + rng.uniform(-0.3, 0.3) * w
    amp = rng.uniforms(6, -1.0, 1.0)
    prof = bump(grid.r, c, w) * np.abs(grid.r - r0) ** theta
    return SymTensorField.from_frame(grid, prof[:, None] * amp[None, :])


def holder_corpus(grid: RadialGrid, seed: int, count: int, theta: float, support=None) -> List[SymTensorField]:
    rng = SplitMix64(seed).spawn("holder-corpus")
    support = support or (grid.s + 0.5, grid.R - 0.5)
    return [holder_field(grid, rng, theta, support) for _ in range(count)]


def rough_field(
    grid: RadialGrid,
    rng: SplitMix64,
    support: Tuple[float, float],
    n_jumps: int = 12,
    amplitude: float = 1.0,
) -> SymTensorField:
    """Seeded piecewise-constant frame components (jumps at random radii)."""
    lo, hi = support
    cuts = np.sort(np.array([rng.uniform(lo, hi) for _ in range(n_jumps)]))
    edges = np.concatenate([[lo], cuts, [hi]])
    L = np.zeros((grid.n, 6))
    for a, b in zip(edges[:-1], edges[1:]):
        vals = rng.uniforms(6, -1.0, 1.0)
        mask = (grid.r >= a) & (grid.r < b)
        L[mask] = vals
    return SymTensorField.from_frame(grid, amplitude * L)
