"""Weighted C^k, Holder and L2 norms; mollifier, K- and J-functionals.

Covariant derivatives are taken in the orthonormal frame (e^r d1, e^r d2, d_r)
of h0, so frame-constant fields have zero Holder seminorm. Holder quotients
compare nodes with |r1 - r2| <= 1 and carry the weight at the smaller r.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.signal import oaconvolve

from .cusp_model import (
    RadialGrid,
    SymTensorField,
    WeightSpec,
    frame_covariant_derivative,
    to_matrix,
)
from .errors import UnderResolvedError

NORM_KINDS = ("weighted-ck", "weighted-holder", "little-holder", "weighted-l2", "k-functional", "j-functional")


@dataclass(frozen=True)
class NormReport:
    value: float
    kind: str
    params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in NORM_KINDS:
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if not self.value >= 0.0:
            raise ValueError("norm values are nonnegative")


def weight_value(r, spec: WeightSpec):
    """w_lambda(r) with r the distance beyond the thick boundary."""
    return spec.value(r)


def frame_jets(l: SymTensorField, k: int) -> List[np.ndarray]:
    """[l, nabla l, ..., nabla^k l] as frame tensors of rank 2 .. k+2."""
    if not 0 <= k <= 2:
        raise ValueError("k must be 0, 1 or 2")
    out = [to_matrix(l.frame())]
    for _ in range(k):
        out.append(frame_covariant_derivative(out[-1], l.grid.dr))
    return out


def _pointwise(T: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.abs(T.reshape(T.shape[0], -1)) ** 2, axis=1))


def weighted_ck_norm(l: SymTensorField, k: int, spec: WeightSpec) -> float:
    """sum_{j <= k} sup_r w(r) |nabla^j l|."""
    w = spec.on_grid(l.grid)
    return float(sum(np.max(w * _pointwise(T)) for T in frame_jets(l, k)))


def _seminorm_of(T: np.ndarray, grid: RadialGrid, exponent: float, spec: WeightSpec) -> float:
    flat = T.reshape(T.shape[0], -1)
    w = spec.on_grid(grid)
    max_lag = min(int(np.floor(1.0 / grid.dr + 1e-9)), grid.n - 1)
    best = 0.0
    for m in range(1, max_lag + 1):
        diff = flat[m:] - flat[:-m]
        q = np.sqrt(np.sum(np.abs(diff) ** 2, axis=1)) * w[:-m]
        best = max(best, float(q.max()) / (m * grid.dr) ** exponent)
    return best


def weighted_holder_seminorm(l: SymTensorField, k: int, exponent: float, spec: WeightSpec) -> float:
    """sup over node pairs with |dr| <= 1 of w(min r) |nabla^k l(r1) - nabla^k l(r2)| / |dr|^exponent."""
    if not 0.0 < exponent < 1.0:
        raise ValueError("Holder exponent must lie in (0, 1)")
    return _seminorm_of(frame_jets(l, k)[k], l.grid, exponent, spec)


def holder_norm(l: SymTensorField, k: int, exponent: float, spec: WeightSpec) -> float:
    """Weighted Holder norm: C^k part plus the k-th order seminorm."""
    jets = frame_jets(l, k)
    w = spec.on_grid(l.grid)
    ck = sum(np.max(w * _pointwise(T)) for T in jets)
    return float(ck + _seminorm_of(jets[k], l.grid, exponent, spec))


def weighted_l2(l: SymTensorField, xi: float, spec: Optional[WeightSpec] = None, order: int = 0) -> float:
    """Squared weighted L2 norm int e^{-2 xi r} |D l|^2 dvol, dvol = A0 e^{-2r} dr.

    ``order`` selects D: 0 identity, 1 covariant derivative, 2 rough Laplacian.
    ``spec`` is accepted for interface symmetry; the exponential uses absolute r.
    """
    if xi < 0:
        raise ValueError("xi must be nonnegative")
    grid = l.grid
    if order == 2:
        N2 = frame_jets(l, 2)[2]
        T = np.einsum("niiab->nab", N2)
    else:
        T = frame_jets(l, order)[order]
    dens = _pointwise(T) ** 2 * np.exp(-(2.0 * xi + 2.0) * grid.r) * grid.torus_area0
    return float(trapezoid(dens, grid.r))


def l2_norm(l: SymTensorField, xi: float = 0.0, order: int = 0) -> float:
    """Square root of ``weighted_l2``."""
    return float(np.sqrt(weighted_l2(l, xi, order=order)))


# ----------------------------------------------------------------------------
# mollifier and interpolation functionals


def bump_kernel(t: float, dr: float) -> np.ndarray:
    """Discrete (1 - u^2)^3 kernel of radius t, unnormalized."""
    m = int(np.floor(t / dr))
    u = np.arange(-m, m + 1) * dr / t
    return np.clip(1.0 - u * u, 0.0, None) ** 3


def mollifier_decompose(l: SymTensorField, t: float) -> Tuple[SymTensorField, SymTensorField]:
    """Split ``l = a_t + b_t`` with ``b_t`` the kernel average at scale t.

    The average acts on frame components and is renormalized where the
    kernel leaves the grid, so constants are reproduced exactly.
    """
    grid = l.grid
    if t < 2.0 * grid.dr:
        raise UnderResolvedError(f"scale t={t:g} is below 2 dr = {2 * grid.dr:g}")
    ker = bump_kernel(t, grid.dr)
    L = l.frame()
    mass = oaconvolve(np.ones(grid.n), ker, mode="same")
    if np.iscomplexobj(L):
        smooth = oaconvolve(L.real, ker[:, None], mode="same", axes=0) + 1j * oaconvolve(
            L.imag, ker[:, None], mode="same", axes=0
        )
    else:
        smooth = oaconvolve(L, ker[:, None], mode="same", axes=0)
    smooth = smooth / mass[:, None]
    # flush FFT round-off on exactly constant columns
    const = np.all(L == L[:1], axis=0)
    smooth[:, const] = L[:1, const]
    b = SymTensorField.from_frame(grid, smooth)
    return l - b, b


def _pair_norms(pair: str, spec: WeightSpec, rho: float):
    if pair == "c0c1":
        return (lambda f: weighted_ck_norm(f, 0, spec)), (lambda f: weighted_ck_norm(f, 1, spec))
    if pair == "x0x1":
        return (lambda f: holder_norm(f, 0, rho, spec)), (lambda f: holder_norm(f, 2, rho, spec))
    raise ValueError(f"unknown space pair {pair!r}")


def k_functional_upper(
    l: SymTensorField, t: float, spec: WeightSpec = WeightSpec(), pair: str = "c0c1", rho: float = 0.6
) -> float:
    """Decomposition bound on K(t, l): ||a_t||_0 + t ||b_t||_1 for t < 1, ||l||_0 otherwise."""
    n0, n1 = _pair_norms(pair, spec, rho)
    if t >= 1.0:
        return n0(l)
    a, b = mollifier_decompose(l, t)
    return n0(a) + t * n1(b)


def j_functional(l: SymTensorField, t: float, spec: WeightSpec = WeightSpec(), pair: str = "c0c1", rho: float = 0.6) -> float:
    """max(||l||_0, t ||l||_1)."""
    n0, n1 = _pair_norms(pair, spec, rho)
    return max(n0(l), t * n1(l))


def k_profile(l: SymTensorField, ts, theta: float, spec: WeightSpec = WeightSpec(), pair: str = "c0c1") -> np.ndarray:
    """t^{-theta} K_upper(t, l) over the scales ``ts``."""
    return np.array([t ** (-theta) * k_functional_upper(l, t, spec, pair) for t in ts])


def interpolation_constant(l: SymTensorField, theta: float, ts, spec: WeightSpec = WeightSpec()) -> float:
    """sup_t t^{-theta} K_upper divided by ||l||_0^{1-theta} ||l||_1^theta."""
    top = float(np.max(k_profile(l, ts, theta, spec)))
    n0, n1 = weighted_ck_norm(l, 0, spec), weighted_ck_norm(l, 1, spec)
    den = n0 ** (1 - theta) * n1**theta
    return top / den if den > 0 else 0.0


def scale_sweep(grid: RadialGrid, count: int = 24) -> np.ndarray:
    """Log-spaced scales from 10 dr up to (and including) 1."""
    return np.geomspace(10.0 * grid.dr, 1.0, count)
