"""Truncated cusp geometry, background metric and discrete differential geometry.

Coordinates are (x1, x2, r) on T^2 x [s, R] with background
``h0 = exp(-2r) (dx1^2 + dx2^2) + dr^2``. Every field is torus-invariant, so
only r-derivatives survive. Tensors are stored as six coordinate components
in the order ``(11, 12, 22, 13, 23, 33)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import DegenerateMetricError

COMPONENTS = ("11", "12", "22", "13", "23", "33")
PAIRS = ((0, 0), (0, 1), (1, 1), (0, 2), (1, 2), (2, 2))
# multiplicity of each stored component inside a full 3x3 contraction
MULTIPLICITY = np.array([1.0, 2.0, 1.0, 2.0, 2.0, 1.0])
# frame component L_c = exp(FRAME_POWER[c] * r) * c_c
FRAME_POWER = np.array([2.0, 2.0, 2.0, 1.0, 1.0, 0.0])


@dataclass(frozen=True)
class WeightSpec:
    """Weight parameters: exponent ``lam`` in (0, 1] and base radius ``s``."""

    lam: float = 1.0
    s: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.lam <= 1.0):
            raise ValueError(f"weight lambda must lie in (0, 1], got {self.lam}")
        if self.s < 0.0:
            raise ValueError(f"weight s must be >= 0, got {self.s}")

    @property
    def omega0(self) -> float:
        """Spectral threshold -lambda (2 - lambda)."""
        return -self.lam * (2.0 - self.lam)

    def value(self, rho):
        """w_lambda at distance ``rho`` beyond the thick boundary."""
        rho = np.asarray(rho, dtype=float)
        if self.lam == 1.0:
            return (rho + 1.0) * np.exp(-rho)
        return np.exp(-self.lam * rho)

    def on_grid(self, grid: "RadialGrid") -> np.ndarray:
        return self.value(np.maximum(grid.r - self.s, 0.0))


@dataclass(frozen=True)
class HolderOrders:
    """Holder exponents. ``theta`` is derived as (rho - sigma) / 2."""

    sigma: float = 0.2
    rho: float = 0.6
    alpha: float = 0.5

    def __post_init__(self):
        problems = []
        if not (0.0 < self.sigma < 1.0):
            problems.append(f"sigma must lie in (0, 1), got {self.sigma}")
        if not (0.0 < self.rho < 1.0):
            problems.append(f"rho must lie in (0, 1), got {self.rho}")
        if not self.sigma < self.rho:
            problems.append(f"need sigma < rho, got sigma={self.sigma}, rho={self.rho}")
        if not (0.0 < self.alpha < 1.0):
            problems.append(f"alpha must lie in (0, 1), got {self.alpha}")
        for bad in ((1.0 - self.rho) / 2.0, 1.0 - self.rho / 2.0):
            if abs(self.alpha - bad) < 1e-12:
                problems.append(f"alpha must avoid {bad:g}")
        if problems:
            raise ValueError("; ".join(problems))

    @property
    def theta(self) -> float:
        return 0.5 * (self.rho - self.sigma)


@dataclass(frozen=True)
class RadialGrid:
    """Uniform grid on [s, R] with ``n`` nodes."""

    s: float = 0.0
    R: float = 20.0
    n: int = 400
    torus_area0: float = 1.0

    def __post_init__(self):
        if self.n < 5:
            raise ValueError(f"grid needs at least 5 nodes, got {self.n}")
        if self.R - self.s < 2.0:
            raise ValueError(f"need R - s >= 2, got R={self.R}, s={self.s}")
        if self.torus_area0 <= 0.0:
            raise ValueError("torus_area0 must be positive")

    @property
    def dr(self) -> float:
        return (self.R - self.s) / (self.n - 1)

    @cached_property
    def r(self) -> np.ndarray:
        r = self.s + self.dr * np.arange(self.n)
        r[-1] = self.R
        r.setflags(write=False)
        return r

    def refined(self) -> "RadialGrid":
        """Grid with exactly half the spacing (shares every node)."""
        return RadialGrid(self.s, self.R, 2 * self.n - 1, self.torus_area0)

    @cached_property
    def frame_scale(self) -> np.ndarray:
        """(n, 6) factors mapping coordinate to frame components."""
        out = np.exp(np.outer(self.r, FRAME_POWER))
        out.setflags(write=False)
        return out


# ----------------------------------------------------------------------------
# fields


@dataclass(frozen=True, eq=False)
class SymTensorField:
    """Torus-invariant symmetric (0,2)-tensor stored as coordinate components.

    Parameters
    ----------
    grid : RadialGrid
    comps : ndarray, shape (n, 6)
        Columns ``c11, c12, c22, c13, c23, c33``; real or complex.
    """

    grid: RadialGrid
    comps: np.ndarray

    def __post_init__(self):
        c = np.array(self.comps, copy=True)
        if c.dtype.kind not in "fc":
            c = c.astype(float)
        if c.shape != (self.grid.n, 6):
            raise ValueError(f"expected components of shape {(self.grid.n, 6)}, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "comps", c)

    # constructors
    @classmethod
    def zeros(cls, grid: RadialGrid, dtype=float) -> "SymTensorField":
        return cls(grid, np.zeros((grid.n, 6), dtype=dtype))

    @classmethod
    def from_components(cls, grid: RadialGrid, **kw) -> "SymTensorField":
        """Build from keyword arrays ``c11=...`` etc; missing components are zero."""
        unknown = set(kw) - {"c" + c for c in COMPONENTS}
        if unknown:
            raise ValueError(f"unknown components {sorted(unknown)}")
        cplx = any(np.iscomplexobj(v) for v in kw.values())
        out = np.zeros((grid.n, 6), dtype=complex if cplx else float)
        for j, name in enumerate(COMPONENTS):
            if "c" + name in kw:
                out[:, j] = np.broadcast_to(kw["c" + name], (grid.n,))
        return cls(grid, out)

    @classmethod
    def from_frame(cls, grid: RadialGrid, frame: np.ndarray) -> "SymTensorField":
        return cls(grid, np.asarray(frame) / grid.frame_scale)

    @classmethod
    def from_matrix(cls, grid: RadialGrid, mat: np.ndarray) -> "SymTensorField":
        return cls(grid, np.stack([mat[:, a, b] for a, b in PAIRS], axis=1))

    # views
    def __getattr__(self, name):
        if len(name) == 3 and name[0] == "c" and name[1:] in COMPONENTS:
            return self.comps[:, COMPONENTS.index(name[1:])]
        raise AttributeError(name)

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.comps) or not np.any(self.comps.imag)

    def frame(self) -> np.ndarray:
        """Components in the orthonormal frame (e^r d1, e^r d2, d_r)."""
        return self.comps * self.grid.frame_scale

    def matrix(self) -> np.ndarray:
        return to_matrix(self.comps)

    # algebra
    def _wrap(self, comps):
        return SymTensorField(self.grid, comps)

    def __add__(self, other):
        return self._wrap(self.comps + other.comps)

    def __sub__(self, other):
        return self._wrap(self.comps - other.comps)

    def __mul__(self, c):
        return self._wrap(self.comps * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self._wrap(-self.comps)

    def swap12(self) -> "SymTensorField":
        """Relabel x1 <-> x2."""
        return self._wrap(self.comps[:, [2, 1, 0, 4, 3, 5]])


def to_matrix(comps: np.ndarray) -> np.ndarray:
    n = comps.shape[0]
    m = np.empty((n, 3, 3), dtype=comps.dtype)
    for j, (a, b) in enumerate(PAIRS):
        m[:, a, b] = comps[:, j]
        m[:, b, a] = comps[:, j]
    return m


def from_matrix(mat: np.ndarray) -> np.ndarray:
    return np.stack([mat[:, a, b] for a, b in PAIRS], axis=1)


def positive_definite_failures(mat: np.ndarray) -> np.ndarray:
    """Indices of nodes whose leading principal minors are not all positive."""
    m = mat.real
    d1 = m[:, 0, 0]
    d2 = m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]
    d3 = np.linalg.det(m)
    ok = (d1 > 0) & (d2 > 0) & (d3 > 0) & np.all(np.isfinite(m), axis=(1, 2))
    return np.flatnonzero(~ok)


@dataclass(frozen=True, eq=False)
class MetricState:
    """A positive-definite real field."""

    field: SymTensorField

    def __post_init__(self):
        if not self.field.is_real:
            raise ValueError("metric components must be real")
        bad = positive_definite_failures(self.field.matrix())
        if bad.size:
            raise DegenerateMetricError(
                f"metric not positive-definite at {bad.size} node(s), first r={self.grid.r[bad[0]]:.4g}",
                nodes=bad,
            )

    @property
    def grid(self) -> RadialGrid:
        return self.field.grid

    @property
    def comps(self) -> np.ndarray:
        return self.field.comps

    def matrix(self) -> np.ndarray:
        return self.field.matrix()


def background_comps(grid: RadialGrid) -> np.ndarray:
    out = np.zeros((grid.n, 6))
    e = np.exp(-2.0 * grid.r)
    out[:, 0] = e
    out[:, 2] = e
    out[:, 5] = 1.0
    return out


def background_metric(grid: RadialGrid) -> MetricState:
    """The cusp metric h0 on ``grid``."""
    return MetricState(SymTensorField(grid, background_comps(grid)))


def trivial_einstein(grid: RadialGrid, const: float = 1.0, profile=None) -> SymTensorField:
    """Trace-free variation c11 = -c22 = const * exp(-2r), optionally times ``profile(r)``."""
    v = const * np.exp(-2.0 * grid.r)
    if profile is not None:
        v = v * profile(grid.r)
    return SymTensorField.from_components(grid, c11=v, c22=-v)


# ----------------------------------------------------------------------------
# finite differences (second order everywhere)


def d1(f: np.ndarray, dr: float) -> np.ndarray:
    """First r-derivative along axis 0; centred inside, one-sided at the ends."""
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * dr)
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dr)
    out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * dr)
    return out


def d2(f: np.ndarray, dr: float) -> np.ndarray:
    """Second r-derivative along axis 0; 4-point one-sided stencil at the ends."""
    out = np.empty_like(f)
    h2 = dr * dr
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h2
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2
    out[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) / h2
    return out


# ----------------------------------------------------------------------------
# jets of the metric: everything below works on (n, 3, 3) arrays and is
# written so complex input passes through untouched (complex-step friendly)


@dataclass(frozen=True)
class MetricJet:
    """Metric with first and second r-derivatives and the derived connection."""

    H: np.ndarray
    H1: np.ndarray
    H2: np.ndarray
    Hinv: np.ndarray = field(init=False)
    Hinv1: np.ndarray = field(init=False)
    Hinv2: np.ndarray = field(init=False)
    gamma: np.ndarray = field(init=False)
    gamma1: np.ndarray = field(init=False)

    def __post_init__(self):
        H, H1, H2 = self.H, self.H1, self.H2
        Hinv = np.linalg.inv(H)
        Hinv1 = -Hinv @ H1 @ Hinv
        Hinv2 = -(Hinv1 @ H1 @ Hinv + Hinv @ H2 @ Hinv + Hinv @ H1 @ Hinv1)
        object.__setattr__(self, "Hinv", Hinv)
        object.__setattr__(self, "Hinv1", Hinv1)
        object.__setattr__(self, "Hinv2", Hinv2)
        g, g1 = _christoffel_jet(Hinv, Hinv1, H1, H2)
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "gamma1", g1)

    @classmethod
    def from_nodal(cls, H: np.ndarray, dr: float) -> "MetricJet":
        return cls(H, d1(H, dr), d2(H, dr))


def _lowered_gamma(D: np.ndarray) -> np.ndarray:
    # D[n,k,b,c] = d_k h_bc ; returns L[n,d,b,c] = 1/2(d_b h_dc + d_c h_db - d_d h_bc)
    return 0.5 * (D.transpose(0, 2, 1, 3) + D.transpose(0, 2, 3, 1) - D)


def _radial(X: np.ndarray) -> np.ndarray:
    """Embed an r-derivative as the k=3 slot of a full partial-derivative array."""
    D = np.zeros((X.shape[0], 3) + X.shape[1:], dtype=X.dtype)
    D[:, 2] = X
    return D


def _christoffel_jet(Hinv, Hinv1, H1, H2):
    low = _lowered_gamma(_radial(H1))
    low1 = _lowered_gamma(_radial(H2))
    gamma = np.einsum("nad,ndbc->nabc", Hinv, low)
    gamma1 = np.einsum("nad,ndbc->nabc", Hinv1, low) + np.einsum("nad,ndbc->nabc", Hinv, low1)
    return gamma, gamma1


def ricci_from_jet(jet: MetricJet) -> np.ndarray:
    """R_bd = d_a G^a_bd - d_d G^a_ab + G^a_ae G^e_bd - G^a_de G^e_ab."""
    g, g1 = jet.gamma, jet.gamma1
    ric = g1[:, 2].copy()
    ric[:, :, 2] -= np.einsum("naab->nb", g1)
    ric += np.einsum("naae,nebd->nbd", g, g)
    ric -= np.einsum("nade,neab->nbd", g, g)
    return ric


def _checked_matrix(h: MetricState) -> np.ndarray:
    H = h.matrix()
    bad = positive_definite_failures(H)
    if bad.size:
        raise DegenerateMetricError("metric not positive-definite", nodes=bad)
    return H


def christoffel(h: MetricState, grid: Optional[RadialGrid] = None) -> np.ndarray:
    """Christoffel symbols per node.

    Returns
    -------
    ndarray, shape (n, 3, 3, 3)
        ``out[i, a, b, c]`` is Gamma^a_{bc} at node i (0-based indices, 2 = r).
    """
    grid = grid or h.grid
    return MetricJet.from_nodal(_checked_matrix(h), grid.dr).gamma


def ricci(h: MetricState, grid: Optional[RadialGrid] = None) -> SymTensorField:
    """Coordinate Ricci tensor. Boundary rows use one-sided stencils."""
    grid = grid or h.grid
    jet = MetricJet.from_nodal(_checked_matrix(h), grid.dr)
    return SymTensorField(grid, from_matrix(ricci_from_jet(jet)))


# ----------------------------------------------------------------------------
# orthonormal frame calculus


def _frame_tangent_connection():
    # C[i, a, m]: nabla_{e_i} e_a = sum_m C[i,a,m] e_m for tangential i
    C = np.zeros((3, 3, 3))
    C[0, 0, 2] = 1.0
    C[0, 2, 0] = -1.0
    C[1, 1, 2] = 1.0
    C[1, 2, 1] = -1.0
    return C


FRAME_CONNECTION = _frame_tangent_connection()


def frame_covariant_derivative(T: np.ndarray, dr: float) -> np.ndarray:
    """Frame components of nabla T for a torus-invariant (0,p) tensor.

    ``T`` has shape (n, 3, ..., 3) in the orthonormal frame; the result has
    one extra leading slot for the differentiation direction.
    """
    p = T.ndim - 1
    out = np.zeros((T.shape[0], 3) + T.shape[1:], dtype=T.dtype)
    out[:, 2] = d1(T, dr)
    for slot in range(p):
        # nabla_{e_i} T(.., e_a, ..) picks up -T(.., nabla_{e_i} e_a, ..)
        Tm = np.moveaxis(T, 1 + slot, -1)
        term = np.einsum("iam,n...m->ni...a", FRAME_CONNECTION, Tm)
        out -= np.moveaxis(term, -1, 2 + slot)
    return out


# ----------------------------------------------------------------------------
# pointwise algebra against h0


def pointwise_norm(l: SymTensorField, node: Optional[int] = None):
    """|l|_{h0}; all nodes when ``node`` is None."""
    L = l.frame()
    sq = np.sum(MULTIPLICITY * np.abs(L) ** 2, axis=1)
    out = np.sqrt(sq)
    return out if node is None else float(out[node])


def trace(l: SymTensorField, node: Optional[int] = None):
    """tr_{h0} l = exp(2r)(c11 + c22) + c33."""
    L = l.frame()
    out = L[:, 0] + L[:, 2] + L[:, 5]
    return out if node is None else out[node]
