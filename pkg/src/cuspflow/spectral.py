"""Resolvent solves, conjugated spectrum, coercivity and a priori checks.

Unknowns are frame components at every node, ordered node-major
(index ``6*i + c``). Interior rows carry ``omega L - A L = F``; the first and
last six rows carry the boundary conditions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse.csgraph import connected_components

from .cusp_model import RadialGrid, SymTensorField, WeightSpec, HolderOrders, trace
from .cusp_ode import principal_sqrt
from .errors import IllPosedThresholdError, NearSingularError, PreconditionError, SpectralError
from .norms import holder_norm, weighted_l2
from .operators import linearized_apply, linearized_matrix
from .probes import smooth_ensemble

INNER_BC = ("dirichlet-zero", "dirichlet-data")
OUTER_BC = ("dirichlet-zero", "decaying-asymptotic")
PIVOT_RATIO = 1e-13

# combinations of frame components that decouple at the outer boundary,
# paired with the shift c in y'' - 2y' - c y = 0
_ROBIN_ROWS = (
    (np.array([0, 1, 0, 0, 0, 0.0]), 0.0),  # 12
    (np.array([1, 0, -1, 0, 0, 0.0]), 0.0),  # 11 - 22
    (np.array([0, 0, 0, 1, 0, 0.0]), 3.0),  # 13
    (np.array([0, 0, 0, 0, 1, 0.0]), 3.0),  # 23
    (np.array([0, 0, 0, 0, 0, 1.0]), 4.0),  # 33
    (np.array([1, 0, 1, 0, 0, 1.0]), 4.0),  # trace
)


@dataclass(frozen=True)
class ResolventSpec:
    omega: complex
    grid: RadialGrid = RadialGrid()
    weight: WeightSpec = WeightSpec()
    inner_bc: str = "dirichlet-zero"
    outer_bc: str = "dirichlet-zero"
    inner_data: Optional[tuple] = None  # six coordinate components at r = s

    def __post_init__(self):
        if self.inner_bc not in INNER_BC:
            raise ValueError(f"inner_bc must be one of {INNER_BC}")
        if self.outer_bc not in OUTER_BC:
            raise ValueError(f"outer_bc must be one of {OUTER_BC}")
        if self.inner_bc == "dirichlet-data" and self.inner_data is None:
            raise ValueError("dirichlet-data needs inner_data")

    @property
    def omega0(self) -> float:
        return self.weight.omega0

    @property
    def above_threshold(self) -> float:
        """Re(omega) - omega0."""
        return complex(self.omega).real - self.omega0


@dataclass
class ResolventSystem:
    """Assembled (omega I - A) with boundary rows."""

    spec: ResolventSpec
    matrix: sp.csc_matrix
    _lu: object = field(default=None, repr=False)

    @property
    def bandwidth(self) -> int:
        coo = self.matrix.tocoo()
        return int(np.max(np.abs(coo.row - coo.col)))

    def banded(self):
        """(l, u, ab) in LAPACK band storage for ``scipy.linalg.solve_banded``."""
        coo = self.matrix.tocoo()
        lo = int(max(0, np.max(coo.row - coo.col)))
        up = int(max(0, np.max(coo.col - coo.row)))
        N = self.matrix.shape[0]
        ab = np.zeros((lo + up + 1, N), dtype=self.matrix.dtype)
        ab[up + coo.row - coo.col, coo.col] = coo.data
        return lo, up, ab

    def factor(self):
        if self._lu is None:
            try:
                lu = spla.splu(self.matrix)
            except RuntimeError as exc:
                raise NearSingularError(f"factorization failed at omega={self.spec.omega}: {exc}") from exc
            diag = np.abs(lu.U.diagonal())
            if diag.min() <= PIVOT_RATIO * diag.max():
                raise NearSingularError(
                    f"pivot collapse at omega={self.spec.omega} (ratio {diag.min() / diag.max():.2e})"
                )
            self._lu = lu
        return self._lu

    def solve(self, b: np.ndarray) -> np.ndarray:
        return self.factor().solve(b)


def _robin_block(grid: RadialGrid, omega: complex):
    """Rows imposing v' = m v at R for each decoupled combination v."""
    dr, n = grid.dr, grid.n
    rows, cols, vals = [], [], []
    base = 6 * (n - 1)
    for k, (vec, c) in enumerate(_ROBIN_ROWS):
        m = 1 - principal_sqrt(1 + c + omega)
        # second-order one-sided derivative: (3 v_n - 4 v_{n-1} + v_{n-2}) / 2dr
        for off, coef in ((0, 1.5 / dr - m), (1, -2.0 / dr), (2, 0.5 / dr)):
            for comp in np.flatnonzero(vec):
                rows.append(base + k)
                cols.append(6 * (n - 1 - off) + comp)
                vals.append(coef * vec[comp])
    return rows, cols, vals


def assemble_resolvent(spec: ResolventSpec) -> ResolventSystem:
    """Banded system for (omega I - A_{h0}) on frame components with boundary rows."""
    grid = spec.grid
    n = grid.n
    N = 6 * n
    omega = complex(spec.omega)
    shift = omega if omega.imag != 0.0 else omega.real
    A = linearized_matrix(grid)
    M = (shift * sp.identity(N, format="csr") - A).tolil()
    # inner rows: identity
    for c in range(6):
        M.rows[c] = [c]
        M.data[c] = [1.0]
    last = 6 * (n - 1)
    if spec.outer_bc == "dirichlet-zero":
        for c in range(6):
            M.rows[last + c] = [last + c]
            M.data[last + c] = [1.0]
        out = M.tocsc()
    else:
        for c in range(6):
            M.rows[last + c] = []
            M.data[last + c] = []
        rows, cols, vals = _robin_block(grid, omega)
        out = (M.tocsr() + sp.csr_matrix((vals, (rows, cols)), shape=(N, N))).tocsc()
    out.eliminate_zeros()
    return ResolventSystem(spec, out)


def _rhs_vector(f: SymTensorField, spec: ResolventSpec) -> np.ndarray:
    grid = spec.grid
    b = f.frame().reshape(-1).astype(complex)
    b[:6] = 0.0
    if spec.inner_bc == "dirichlet-data":
        b[:6] = np.asarray(spec.inner_data) * grid.frame_scale[0]
    b[-6:] = 0.0
    return b


def solve_resolvent(f: SymTensorField, spec: ResolventSpec, system: Optional[ResolventSystem] = None) -> SymTensorField:
    """Discrete solution of (omega - A) l = f with the boundary rows of ``spec``."""
    system = system or assemble_resolvent(spec)
    b = _rhs_vector(f, spec)
    if np.iscomplexobj(system.matrix.data):
        x = system.solve(b)
    elif np.any(b.imag):
        # real operator: split the data to keep the factorization real
        x = system.solve(np.ascontiguousarray(b.real)) + 1j * system.solve(np.ascontiguousarray(b.imag))
    else:
        x = system.solve(np.ascontiguousarray(b.real))
    return SymTensorField.from_frame(spec.grid, x.reshape(-1, 6))


def resolvent_residual(l: SymTensorField, f: SymTensorField, omega: complex) -> float:
    """max interior |omega l - A l - f| in frame components."""
    r = omega * l.frame() - linearized_apply(l).frame() - f.frame()
    return float(np.abs(r[1:-1]).max())


# ----------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class ResolventBoundTable:
    omegas: np.ndarray
    bounds: np.ndarray
    lam: float

    @property
    def spread(self) -> float:
        return float(self.bounds.max() / self.bounds.min())


def e0_norm(f: SymTensorField, weight: WeightSpec, holder: HolderOrders) -> float:
    return holder_norm(f, 0, holder.sigma, weight)


def e1_norm(l: SymTensorField, weight: WeightSpec, holder: HolderOrders) -> float:
    return holder_norm(l, 2, holder.sigma, weight)


def resolvent_bound(
    omegas: Sequence[complex],
    m: int,
    seed: int,
    grid: RadialGrid = RadialGrid(),
    weight: WeightSpec = WeightSpec(),
    holder: HolderOrders = HolderOrders(),
    outer_bc: str = "dirichlet-zero",
    probes: Optional[List[SymTensorField]] = None,
) -> ResolventBoundTable:
    """C(omega) = max over m seeded probes of ||l||_E1 / ||f||_E0."""
    probes = probes if probes is not None else smooth_ensemble(grid, seed, m, "resolvent-probes")
    bounds = []
    for w in omegas:
        spec = ResolventSpec(w, grid, weight, outer_bc=outer_bc)
        system = assemble_resolvent(spec)
        best = 0.0
        for f in probes:
            l = solve_resolvent(f, spec, system)
            best = max(best, e1_norm(l, weight, holder) / e0_norm(f, weight, holder))
        bounds.append(best)
    return ResolventBoundTable(np.asarray(omegas), np.asarray(bounds), weight.lam)


def resolvent_identity_error(f: SymTensorField, w1: complex, w2: complex, grid: RadialGrid) -> float:
    """Relative defect of R(w1) - R(w2) = (w2 - w1) R(w1) R(w2) on ``f``."""
    s1 = ResolventSpec(w1, grid)
    s2 = ResolventSpec(w2, grid)
    r1f = solve_resolvent(f, s1).frame()
    r2f = solve_resolvent(f, s2).frame()
    r1r2f = solve_resolvent(SymTensorField.from_frame(grid, r2f), s1).frame()
    lhs = r1f - r2f
    rhs = (w2 - w1) * r1r2f
    # interior only: boundary rows of the composed solve see the data as zero
    return float(np.abs(lhs - rhs)[1:-1].max() / np.abs(lhs).max())


def conjugated_matrix(weight: WeightSpec, grid: RadialGrid) -> sp.csr_matrix:
    """W A W^{-1} on interior frame unknowns (Dirichlet at both ends).

    Entries at round-off level (relative 1e-11) left behind by the complex-step
    probing are dropped so the decoupled component blocks separate exactly.
    """
    A = linearized_matrix(grid)[6:-6, 6:-6].tocoo()
    keep = np.abs(A.data) > 1e-11 * np.abs(A.data).max()
    w = np.repeat(weight.on_grid(grid)[1:-1], 6)
    vals = A.data[keep] * w[A.row[keep]] / w[A.col[keep]]
    return sp.csr_matrix((vals, (A.row[keep], A.col[keep])), shape=A.shape)


def conjugated_spectrum(weight: WeightSpec, grid: RadialGrid, count: int = 10) -> np.ndarray:
    """Rightmost ``count`` eigenvalues of the weight-conjugated operator, by real part.

    The matrix is split into its weakly connected blocks (the 12, 13 and 23
    chains decouple from the diagonal block) and each block is solved densely.
    """
    M = conjugated_matrix(weight, grid)
    nblocks, labels = connected_components(M, directed=True, connection="weak")
    parts = []
    try:
        for b in range(nblocks):
            idx = np.flatnonzero(labels == b)
            parts.append(sla.eigvals(M[idx][:, idx].toarray(), check_finite=False))
    except sla.LinAlgError as exc:
        raise SpectralError(f"eigensolver failed: {exc}") from exc
    ev = np.concatenate(parts)
    order = np.lexsort((ev.imag, -ev.real))
    return ev[order][:count]


def l2_inner(a: SymTensorField, b: SymTensorField) -> complex:
    """<a, b> in L2(h0) with dvol = A0 e^{-2r} dr."""
    from scipy.integrate import trapezoid

    from .cusp_model import MULTIPLICITY

    grid = a.grid
    dens = np.sum(MULTIPLICITY * a.frame() * np.conj(b.frame()), axis=1) * np.exp(-2.0 * grid.r)
    return complex(trapezoid(dens, grid.r) * grid.torus_area0)


def rayleigh_quotient(l: SymTensorField) -> complex:
    """<A l, l> / <l, l>."""
    return l2_inner(linearized_apply(l), l) / l2_inner(l, l)


def curvature_term(l: SymTensorField) -> SymTensorField:
    """Ric(l) = -6 l + 2 tr_{h0}(l) h0 on the hyperbolic background."""
    from .cusp_model import background_metric

    h0 = background_metric(l.grid).field
    return l * (-6.0) + SymTensorField(l.grid, trace(l)[:, None] * h0.comps)


@dataclass(frozen=True)
class CoercivityResult:
    margins: np.ndarray  # absolute margins per sample
    scales: np.ndarray  # ||l||^2 per sample

    @property
    def min_relative(self) -> float:
        return float(np.min(self.margins / self.scales))


def coercivity_margin(omega: complex, samples: Sequence[SymTensorField], tol: float = 1e-10) -> CoercivityResult:
    """Re a2(l, l) - (Re omega + 1) ||l||^2 per trace-free sample."""
    margins, scales = [], []
    for l in samples:
        norm2 = weighted_l2(l, 0.0)
        scale = np.sqrt(np.max(np.abs(l.frame()) ** 2))
        if np.max(np.abs(trace(l))) > tol * max(scale, 1.0):
            raise PreconditionError("coercivity samples must be trace-free")
        edge = np.abs(l.frame()[[0, 1, -2, -1]]).max()
        if edge > tol * max(scale, 1.0):
            raise PreconditionError("coercivity samples must vanish near both boundaries")
        grad2 = weighted_l2(l, 0.0, order=1)
        ric = l2_inner(curvature_term(l), l).real
        a2 = grad2 + ric + (4.0 + complex(omega).real) * norm2
        margins.append(a2 - (complex(omega).real + 1.0) * norm2)
        scales.append(norm2)
    return CoercivityResult(np.asarray(margins), np.asarray(scales))


def apriori_ratio(
    f: SymTensorField,
    omega: complex,
    xi: float,
    system: Optional[ResolventSystem] = None,
) -> float:
    """int e^{-2 xi r}(|l|^2 + |nabla l|^2 + |Delta l|^2) / int e^{-2 xi r}|f|^2."""
    omega = complex(omega)
    if omega.real <= -1.0:
        raise IllPosedThresholdError("a priori bound needs Re(omega) > -1")
    if not xi < np.sqrt(1.0 + omega.real):
        raise IllPosedThresholdError(f"xi={xi:g} must be below sqrt(1 + Re omega)")
    den = weighted_l2(f, xi)
    if den == 0.0:
        return 0.0
    spec = system.spec if system is not None else ResolventSpec(omega, f.grid)
    l = solve_resolvent(f, spec, system)
    num = weighted_l2(l, xi) + weighted_l2(l, xi, order=1) + weighted_l2(l, xi, order=2)
    return num / den


@dataclass(frozen=True)
class GraphNormStats:
    ratios: np.ndarray

    @property
    def min(self) -> float:
        return float(self.ratios.min())

    @property
    def max(self) -> float:
        return float(self.ratios.max())


def graph_norm_ratio(
    samples: Sequence[SymTensorField], weight: WeightSpec = WeightSpec(), holder: HolderOrders = HolderOrders()
) -> GraphNormStats:
    """||l||_X1 / (||l||_X0 + ||A l||_X0) per sample, X_k = weighted h^{2k + rho}."""
    out = []
    for l in samples:
        x1 = holder_norm(l, 2, holder.rho, weight)
        x0 = holder_norm(l, 0, holder.rho, weight)
        ax0 = holder_norm(linearized_apply(l), 0, holder.rho, weight)
        if x0 + ax0 == 0.0:
            raise PreconditionError("graph-norm ratio undefined for l = 0")
        out.append(x1 / (x0 + ax0))
    return GraphNormStats(np.asarray(out))
