"""Torus-averaged ODE system for (omega I - A_{h0}) l = f on the cusp.

In frame variables ``L_ij = e^{2r} l_ij``, ``L_i3 = e^r l_i3``, ``L_33 = l_33``
every equation has the form ``y'' - 2y' - c y = g`` with characteristic roots
``1 +- sqrt(1 + c)``. The system is triangular: solve 33, then i3, then the
trace T, then the diagonal block with source ``2(T - L33)``; 12 is decoupled.

Particular solutions use the decaying-branch Green's function

    y_p(r) = -1/(2q) [ int_s^r e^{m-(r-t)} g dt + int_r^R e^{m+(r-t)} g dt ]

with both integrals accumulated by a stable trapezoidal recursion, and the
inner boundary value is matched with the decaying mode only.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Dict, Tuple, Union

import numpy as np
from scipy.signal import lfilter

from .cusp_model import RadialGrid, SymTensorField, WeightSpec, HolderOrders, d1, d2
from .errors import DegenerateRootError, IllPosedThresholdError

DISCRIMINANT_TOL = 1e-9

# index into frame arrays
I11, I12, I22, I13, I23, I33 = range(6)


class AveragedField(SymTensorField):
    """Torus average of a field; in the invariant model it equals the field."""


def average(l: SymTensorField) -> AveragedField:
    """Torus average. Component copy in the torus-invariant sector."""
    return AveragedField(l.grid, l.comps)


@dataclass(frozen=True)
class OdeModeCoefficients:
    """(growing, decaying) coefficients per decoupled scalar equation.

    Keys are ``"12"``, ``"11-22"`` (block, a), ``"13"``, ``"23"`` (b),
    ``"33"`` (c) and ``"trace"`` (d).
    """

    pairs: Dict[str, Tuple[complex, complex]]


def principal_sqrt(z: complex) -> complex:
    """sqrt with Re >= 0 and positive imaginary part on the branch cut."""
    q = cmath.sqrt(complex(z))
    if q.real == 0.0 and q.imag < 0.0:
        q = -q
    return q


def characteristic_roots(omega: complex):
    """Root pairs (m-, m+) for the 1 + omega, 4 + omega and 5 + omega families."""
    out = []
    for k in (1.0, 4.0, 5.0):
        q = principal_sqrt(k + omega)
        out.append((_tidy(1 - q), _tidy(1 + q)))
    return tuple(out)


def _tidy(z: complex):
    # real input gives real roots; keep them real so exact comparisons work
    return z.real if z.imag == 0.0 else z


def homogeneous_modes(c: complex, rr: np.ndarray):
    """Growing and decaying solutions of y'' - 2y' - c y = 0 in ``rr = r - s``.

    At the double root (1 + c = 0) the pair is ``(rr e^{rr}, e^{rr})``.
    """
    disc = 1.0 + c
    if abs(disc) < DISCRIMINANT_TOL:
        return rr * np.exp(rr), np.exp(rr)
    q = principal_sqrt(disc)
    return np.exp((1 + q) * rr), np.exp((1 - q) * rr)


def solve_scalar(g: np.ndarray, c: complex, y_s: complex, grid: RadialGrid, return_coefficient: bool = False):
    """Decaying-branch solution of ``y'' - 2y' - c y = g`` with ``y(s) = y_s``.

    With ``return_coefficient`` the decaying-mode coefficient ``y_s - y_p(s)``
    is returned as well.
    """
    disc = 1.0 + c
    if abs(disc) < DISCRIMINANT_TOL:
        raise DegenerateRootError(f"double characteristic root at c = {c}")
    q = principal_sqrt(disc)
    m_minus, m_plus = 1 - q, 1 + q
    half = 0.5 * grid.dr
    g = np.asarray(g, dtype=complex)
    em = np.exp(m_minus * grid.dr)
    ep = np.exp(-m_plus * grid.dr)
    # J1[i+1] = em J1[i] + dr/2 (em g[i] + g[i+1]),  J1[0] = 0
    x = np.zeros_like(g)
    x[1:] = half * (em * g[:-1] + g[1:])
    j1 = lfilter([1.0], [1.0, -em], x)
    # J2[i] = ep J2[i+1] + dr/2 (g[i] + ep g[i+1]),  J2[n-1] = 0
    x = np.zeros_like(g)
    x[:-1] = half * (g[:-1] + ep * g[1:])
    j2 = lfilter([1.0], [1.0, -ep], x[::-1])[::-1]
    yp = -(j1 + j2) / (2.0 * q)
    coef = y_s - yp[0]
    y = yp + coef * np.exp(m_minus * (grid.r - grid.s))
    return (y, complex(coef)) if return_coefficient else y


def _inner_frame(inner, grid: RadialGrid) -> np.ndarray:
    if isinstance(inner, SymTensorField):
        return inner.frame()[0]
    inner = np.asarray(inner)
    if inner.shape != (6,):
        raise ValueError("inner_value must be a field or six coordinate components at r = s")
    return inner * grid.frame_scale[0]


def solve_averaged(
    fhat: AveragedField,
    omega: complex,
    inner_value: Union[SymTensorField, np.ndarray],
    weight: WeightSpec = WeightSpec(),
    return_modes: bool = False,
):
    """Decaying-branch solution of the averaged system.

    Parameters
    ----------
    fhat : AveragedField
        Right side f.
    omega : complex
        Spectral parameter, Re(omega) must exceed ``weight.omega0``.
    inner_value : field or array of 6
        Coordinate components at r = s (a field contributes its first node).

    Returns
    -------
    AveragedField, optionally with the OdeModeCoefficients of the solve.
    """
    omega = complex(omega)
    if not omega.real > weight.omega0:
        raise IllPosedThresholdError(
            f"Re(omega) = {omega.real:g} must exceed -lambda(2-lambda) = {weight.omega0:g}"
        )
    grid = fhat.grid
    F = fhat.frame().astype(complex)
    y0 = _inner_frame(inner_value, grid).astype(complex)
    L = np.zeros((grid.n, 6), dtype=complex)
    modes = {}

    def run(name, g, c, ys):
        y, coef = solve_scalar(g, c, ys, grid, return_coefficient=True)
        modes[name] = (0.0, coef)
        return y

    L[:, I33] = run("33", -F[:, I33], 4 + omega, y0[I33])
    L[:, I13] = run("13", -F[:, I13], 3 + omega, y0[I13])
    L[:, I23] = run("23", -F[:, I23], 3 + omega, y0[I23])
    T = run("trace", -(F[:, I11] + F[:, I22] + F[:, I33]), 4 + omega, y0[I11] + y0[I22] + y0[I33])
    src = 2.0 * (T - L[:, I33])
    L[:, I11] = solve_scalar(-F[:, I11] + src, omega, y0[I11], grid)
    L[:, I22] = solve_scalar(-F[:, I22] + src, omega, y0[I22], grid)
    modes["11-22"] = (0.0, complex(L[0, I11] - L[0, I22]))
    L[:, I12] = run("12", -F[:, I12], omega, y0[I12])
    if omega.imag == 0.0 and not np.any(F.imag) and not np.any(y0.imag):
        L = L.real
    out = AveragedField.from_frame(grid, L)
    return (out, OdeModeCoefficients(modes)) if return_modes else out


def ode_left_sides(L: np.ndarray, L1: np.ndarray, L2: np.ndarray, omega: complex) -> np.ndarray:
    """Frame forcing F with (omega - A) l = f, written in ODE form.

    ``F = -L'' + 2L' + c L`` per component, plus ``2(T - L33)`` on 11 and 22.
    """
    c = np.array([omega, omega, omega, 3 + omega, 3 + omega, 4 + omega])
    F = -L2 + 2.0 * L1 + c[None, :] * L
    T = L[:, I11] + L[:, I22] + L[:, I33]
    F[:, I11] = F[:, I11] + 2.0 * (T - L[:, I33])
    F[:, I22] = F[:, I22] + 2.0 * (T - L[:, I33])
    return F


def averaged_residual(lhat: AveragedField, fhat: AveragedField, omega: complex) -> Dict[str, float]:
    """Max interior residual of each scalar ODE and the PDE/ODE discrepancy.

    Keys ``"11" .. "33"`` and ``"trace"`` hold ODE residuals; ``"pde_ode"``
    compares the ODE left sides with ``omega l - linearized_apply(l)``.
    """
    from .operators import linearized_apply

    grid = lhat.grid
    L = lhat.frame()
    F = fhat.frame()
    L1, L2 = d1(L, grid.dr), d2(L, grid.dr)
    lhs = ode_left_sides(L, L1, L2, omega)
    inner = slice(1, -1)
    out = {}
    for j, name in enumerate(("11", "12", "22", "13", "23", "33")):
        out[name] = float(np.abs(lhs[inner, j] - F[inner, j]).max())
    T = L[:, I11] + L[:, I22] + L[:, I33]
    trF = F[:, I11] + F[:, I22] + F[:, I33]
    tr_lhs = -d2(T, grid.dr) + 2.0 * d1(T, grid.dr) + (4 + omega) * T
    out["trace"] = float(np.abs(tr_lhs[inner] - trF[inner]).max())
    pde = omega * L - linearized_apply(lhat).frame()
    out["pde_ode"] = float(np.abs(pde[inner] - lhs[inner]).max())
    return out


def fit_mode_coefficients(lhat: AveragedField, omega: complex, tail: float = 0.5) -> OdeModeCoefficients:
    """Least-squares (growing, decaying) coefficients on the outer ``tail`` fraction.

    Only the homogeneous combinations are fitted: 12, 11-22, 13, 23, 33 and
    the trace. Basis columns are normalized on the window before solving.
    """
    grid = lhat.grid
    L = lhat.frame()
    rr = grid.r - grid.s
    sel = slice(int(grid.n * (1 - tail)), grid.n)
    series = {
        "12": (L[:, I12], omega),
        "11-22": (L[:, I11] - L[:, I22], omega),
        "13": (L[:, I13], 3 + omega),
        "23": (L[:, I23], 3 + omega),
        "33": (L[:, I33], 4 + omega),
        "trace": (L[:, I11] + L[:, I22] + L[:, I33], 4 + omega),
    }
    pairs = {}
    for name, (y, c) in series.items():
        grow, decay = homogeneous_modes(c, rr)
        B = np.stack([grow[sel], decay[sel]], axis=1).astype(complex)
        norms = np.abs(B).max(axis=0)
        coef, *_ = np.linalg.lstsq(B / norms, y[sel].astype(complex), rcond=None)
        coef = coef / norms
        # report the growing coefficient relative to its size at r = s
        pairs[name] = (complex(coef[0]), complex(coef[1]))
    return OdeModeCoefficients(pairs)


def weighted_sup_constant(
    lhat: AveragedField, fhat: AveragedField, weight: WeightSpec, holder: HolderOrders
) -> float:
    """sup_r w(r)|l|(r) divided by the E0 norm of f."""
    from .norms import holder_norm, weighted_ck_norm

    den = holder_norm(fhat, 0, holder.sigma, weight)
    if den == 0.0:
        return 0.0
    return weighted_ck_norm(lhat, 0, weight) / den
