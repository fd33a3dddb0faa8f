"""DeTurck operator, its building blocks, and the linearization at h0.

The nonlinear operator is evaluated from a compact jet: the metric and its
first two r-derivatives are differenced once at each node, and every later
derivative (of the inverse metric, Christoffels, G, its divergence and the
DeTurck one-form) is obtained by the chain rule. This keeps the stencil
three points wide and avoids odd-even decoupling from nested differences.

``linearized_apply`` is the exact Jacobian of the discrete ``deturck_rhs`` at
h0, evaluated by complex step. ``linearized_apply_explicit`` is the closed
form Delta l + 2 l - 2 tr(l) h0 with a rough Laplacian assembled from frame
covariant derivatives; the two agree to O(dr^2).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .cusp_model import (
    MetricJet,
    MetricState,
    RadialGrid,
    SymTensorField,
    background_comps,
    d1,
    d2,
    frame_covariant_derivative,
    from_matrix,
    positive_definite_failures,
    ricci_from_jet,
    to_matrix,
)
from .errors import DegenerateMetricError

_CSTEP = 1e-20


@dataclass(frozen=True, eq=False)
class OneFormField:
    """Torus-invariant one-form with components ``w`` of shape (n, 3)."""

    grid: RadialGrid
    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, copy=True)
        if w.shape != (self.grid.n, 3):
            raise ValueError(f"expected shape {(self.grid.n, 3)}, got {w.shape}")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)


# ----------------------------------------------------------------------------
# tensor calculus on jets


def _cov_2tensor(gamma, T, T1):
    """(nabla T)[n,i,j,k] = d_i T_jk - G^m_ij T_mk - G^m_ik T_jm."""
    out = -np.einsum("nmij,nmk->nijk", gamma, T) - np.einsum("nmik,njm->nijk", gamma, T)
    out[:, 2] += T1
    return out


def _cov_2tensor_jet(gamma, gamma1, T, T1, T2):
    N = _cov_2tensor(gamma, T, T1)
    N1 = -(
        np.einsum("nmij,nmk->nijk", gamma1, T)
        + np.einsum("nmij,nmk->nijk", gamma, T1)
        + np.einsum("nmik,njm->nijk", gamma1, T)
        + np.einsum("nmik,njm->nijk", gamma, T1)
    )
    N1[:, 2] += T2
    return N, N1


def _sym_cov_oneform(gamma, w, w1):
    """Symmetrized covariant derivative 1/2(nabla_i w_j + nabla_j w_i)."""
    N = -np.einsum("nmij,nm->nij", gamma, w)
    N[:, 2] += w1
    return 0.5 * (N + N.transpose(0, 2, 1))


def _divergence_jet(jet: MetricJet, T, T1, T2):
    """delta_h T = -h^{ij} nabla_i T_jk and its r-derivative."""
    N, N1 = _cov_2tensor_jet(jet.gamma, jet.gamma1, T, T1, T2)
    X = -np.einsum("nij,nijk->nk", jet.Hinv, N)
    X1 = -np.einsum("nij,nijk->nk", jet.Hinv1, N) - np.einsum("nij,nijk->nk", jet.Hinv, N1)
    return X, X1


def _gmap_jet(jet: MetricJet, U, U1, U2):
    """G(h,u) = u - 1/2 tr_h(u) h with two r-derivatives."""
    H, H1, H2 = jet.H, jet.H1, jet.H2
    tau = np.einsum("nij,nij->n", jet.Hinv, U)
    tau1 = np.einsum("nij,nij->n", jet.Hinv1, U) + np.einsum("nij,nij->n", jet.Hinv, U1)
    tau2 = (
        np.einsum("nij,nij->n", jet.Hinv2, U)
        + 2.0 * np.einsum("nij,nij->n", jet.Hinv1, U1)
        + np.einsum("nij,nij->n", jet.Hinv, U2)
    )
    t, t1, t2 = tau[:, None, None], tau1[:, None, None], tau2[:, None, None]
    G = U - 0.5 * t * H
    G1 = U1 - 0.5 * (t1 * H + t * H1)
    G2 = U2 - 0.5 * (t2 * H + 2.0 * t1 * H1 + t * H2)
    return G, G1, G2


@lru_cache(maxsize=16)
def _background_jet(grid: RadialGrid):
    U = to_matrix(background_comps(grid))
    U1, U2 = d1(U, grid.dr), d2(U, grid.dr)
    Uinv = np.linalg.inv(U)
    Uinv1 = -Uinv @ U1 @ Uinv
    for a in (U, U1, U2, Uinv, Uinv1):
        a.setflags(write=False)
    return U, U1, U2, Uinv, Uinv1


def _pmap_array(jet: MetricJet, grid: RadialGrid) -> np.ndarray:
    U, U1, U2, Uinv, Uinv1 = _background_jet(grid)
    G, G1, G2 = _gmap_jet(jet, U, U1, U2)
    X, X1 = _divergence_jet(jet, G, G1, G2)
    # raise with h0, lower with h
    W = np.einsum("nkl,nl->nk", Uinv, X)
    W1 = np.einsum("nkl,nl->nk", Uinv1, X) + np.einsum("nkl,nl->nk", Uinv, X1)
    w = np.einsum("njk,nk->nj", jet.H, W)
    w1 = np.einsum("njk,nk->nj", jet.H1, W) + np.einsum("njk,nk->nj", jet.H, W1)
    return -2.0 * _sym_cov_oneform(jet.gamma, w, w1)


def _rhs_array(H: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """-2 Ric(h) - 4h - P_{h0}(h) on an (n,3,3) array (real or complex)."""
    jet = MetricJet.from_nodal(H, grid.dr)
    return -2.0 * ricci_from_jet(jet) - 4.0 * H - _pmap_array(jet, grid)


def _check(h: MetricState) -> np.ndarray:
    H = h.matrix()
    bad = positive_definite_failures(H)
    if bad.size:
        raise DegenerateMetricError("metric not positive-definite", nodes=bad)
    return H


# ----------------------------------------------------------------------------
# public building blocks


def gmap(h: MetricState, u: SymTensorField) -> SymTensorField:
    """G(h, u) = u - 1/2 tr_h(u) h."""
    H = _check(h)
    U = u.matrix()
    tau = np.einsum("nij,nij->n", np.linalg.inv(H), U)
    return SymTensorField(h.grid, from_matrix(U - 0.5 * tau[:, None, None] * H))


def divergence(h: MetricState, l: SymTensorField) -> OneFormField:
    """delta_h l = -h^{ij} nabla_i l_jk."""
    H = _check(h)
    grid = h.grid
    jet = MetricJet.from_nodal(H, grid.dr)
    T = l.matrix()
    N = _cov_2tensor(jet.gamma, T, d1(T, grid.dr))
    return OneFormField(grid, -np.einsum("nij,nijk->nk", jet.Hinv, N))


def adjoint_divergence(h: MetricState, w: OneFormField) -> SymTensorField:
    """delta_h^* w = 1/2(nabla_i w_j + nabla_j w_i), the L2 adjoint of ``divergence``."""
    H = _check(h)
    grid = h.grid
    jet = MetricJet.from_nodal(H, grid.dr)
    S = _sym_cov_oneform(jet.gamma, w.w, d1(w.w, grid.dr))
    return SymTensorField(grid, from_matrix(S))


def pmap(h: MetricState) -> SymTensorField:
    """DeTurck term P_{h0}(h) = -2 delta_h^*(h0^{-1} delta_h G(h, h0))."""
    H = _check(h)
    jet = MetricJet.from_nodal(H, h.grid.dr)
    return SymTensorField(h.grid, from_matrix(_pmap_array(jet, h.grid)))


def deturck_rhs(h: MetricState) -> SymTensorField:
    """Velocity of the normalized Ricci-DeTurck flow, -2Ric(h) - 4h - P_{h0}(h)."""
    H = _check(h)
    return SymTensorField(h.grid, from_matrix(_rhs_array(H, h.grid)))


# ----------------------------------------------------------------------------
# linearization at h0


def _jacobian_real(grid: RadialGrid, comps: np.ndarray) -> np.ndarray:
    H0 = to_matrix(background_comps(grid)).astype(complex)
    Hc = H0 + 1j * _CSTEP * to_matrix(comps)
    return from_matrix(_rhs_array(Hc, grid)).imag / _CSTEP


def linearized_apply(l: SymTensorField) -> SymTensorField:
    """A_{h0} l as the exact derivative of the discrete ``deturck_rhs`` at h0.

    Complex fields are handled by linearity, A(Re l) + i A(Im l).
    """
    c = l.comps
    out = _jacobian_real(l.grid, c.real)
    if np.iscomplexobj(c) and np.any(c.imag):
        out = out + 1j * _jacobian_real(l.grid, np.ascontiguousarray(c.imag))
    return SymTensorField(l.grid, out)


def linearized_matrix(grid: RadialGrid) -> sp.csr_matrix:
    """Sparse matrix of A_{h0} acting on frame components.

    Unknowns are ordered node-major: index ``6*i + c`` is frame component
    ``c`` at node ``i``. Built by coloured probing of the complex-step
    Jacobian (the stencil touches at most four consecutive nodes).
    """
    return _linearized_matrix_cached(grid).copy()


@lru_cache(maxsize=8)
def _linearized_matrix_cached(grid: RadialGrid) -> sp.csr_matrix:
    n, period = grid.n, 4
    scale = grid.frame_scale
    rows, cols, vals = [], [], []
    node = np.arange(n)
    for colour in range(period):
        probe_nodes = node[colour::period]
        for c in range(6):
            L = np.zeros((n, 6))
            L[probe_nodes, c] = 1.0
            resp = _jacobian_real(grid, L / scale) * scale
            # response row i belongs to the probe node within distance < period
            for j in probe_nodes:
                lo, hi = max(j - 3, 0), min(j + 4, n)
                for i in range(lo, hi):
                    owner = probe_nodes[np.argmin(np.abs(probe_nodes - i))]
                    if owner != j:
                        continue
                    nz = np.flatnonzero(resp[i] != 0.0)
                    rows.extend(6 * i + nz)
                    cols.extend([6 * j + c] * nz.size)
                    vals.extend(resp[i, nz])
    A = sp.csr_matrix((vals, (rows, cols)), shape=(6 * n, 6 * n))
    A.sum_duplicates()
    return A


def frame_matrix(l: SymTensorField) -> np.ndarray:
    return to_matrix(l.frame())


def rough_laplacian_frame(l: SymTensorField) -> np.ndarray:
    """Frame components (n,3,3) of the h0 rough Laplacian of ``l``."""
    dr = l.grid.dr
    N2 = frame_covariant_derivative(frame_covariant_derivative(frame_matrix(l), dr), dr)
    return np.einsum("niiab->nab", N2)


def linearized_apply_explicit(l: SymTensorField) -> SymTensorField:
    """Delta l + 2 l - 2 tr_{h0}(l) h0 via frame covariant derivatives."""
    lap = rough_laplacian_frame(l)
    Lm = frame_matrix(l)
    tr = np.einsum("naa->n", Lm)
    A = lap + 2.0 * Lm - 2.0 * tr[:, None, None] * np.eye(3)
    return SymTensorField.from_frame(l.grid, from_matrix(A))
