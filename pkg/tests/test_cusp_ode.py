import cmath

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from cuspflow.cusp_model import RadialGrid, SymTensorField, WeightSpec, trivial_einstein
from cuspflow.cusp_ode import (
    AveragedField,
    average,
    averaged_residual,
    characteristic_roots,
    fit_mode_coefficients,
    ode_left_sides,
    principal_sqrt,
    solve_averaged,
    solve_scalar,
)
from cuspflow.errors import DegenerateRootError, IllPosedThresholdError

from conftest import frame_field


def test_roots_at_zero():
    (a, b), (c, d), (e, f) = characteristic_roots(0.0)
    assert (a, b) == (0, 2) and (c, d) == (-1, 3)
    assert e == pytest.approx(1 - 5**0.5, abs=1e-15) and f == pytest.approx(1 + 5**0.5, abs=1e-15)


def test_roots_special_values():
    assert characteristic_roots(-1.0)[0] == (1, 1)
    assert characteristic_roots(3.0)[0] == (-1, 3)


@settings(max_examples=200, deadline=None)
@given(st.floats(-6, 6), st.floats(-3, 3))
def test_root_identities(re, im):
    w = complex(re, im)
    for (m_minus, m_plus), k in zip(characteristic_roots(w), (1, 4, 5)):
        assert abs(m_minus + m_plus - 2) < 1e-12
        assert abs(m_minus * m_plus + (k - 1 + w)) < 1e-12 * (1 + abs(w))
        q = principal_sqrt(k + w)
        assert abs((1 + q) - m_plus) < 1e-12
        assert q.real >= 0
        if q.real == 0:
            assert q.imag >= 0


def test_branch_cut_positive_imaginary():
    (m_minus, m_plus), _, _ = characteristic_roots(complex(-5.0, -0.0))
    assert (m_plus - 1) == pytest.approx(2j)


def test_average_is_copy(small_grid):
    l = frame_field(small_grid, [1, 2, 3, 4, 5, 6], center=4, width=2)
    assert np.array_equal(average(l).comps, l.comps)
    z = SymTensorField.zeros(small_grid)
    assert np.all(average(z).comps == 0)
    m = frame_field(small_grid, [0, 1, 0, 1, 0, 1], center=4, width=2)
    assert np.allclose(average(l * 2 + m).comps, (average(l) * 2 + average(m)).comps)


def test_trivial_einstein_reproduced(grid):
    u = trivial_einstein(grid)
    sol = solve_averaged(AveragedField.zeros(grid), 0.0, average(u))
    assert np.abs(sol.frame() - u.frame()).max() < 1e-12


@pytest.mark.parametrize("omega", [0.0, 0.7, -0.5 + 0.8j])
def test_homogeneous_pure_modes(grid, omega):
    inner = np.array([0.3, -0.2, 0.5, 0.4, -0.1, 0.8])
    sol = solve_averaged(AveragedField.zeros(grid), omega, inner)
    L = sol.frame()
    rr = grid.r - grid.s
    roots = characteristic_roots(omega)
    assert np.allclose(L[:, 1], inner[1] * np.exp(roots[0][0] * rr))
    assert np.allclose(L[:, 3], inner[3] * np.exp(roots[1][0] * rr))
    assert np.allclose(L[:, 5], inner[5] * np.exp(roots[2][0] * rr))
    T = inner[0] + inner[2] + inner[5]
    assert np.allclose(L[:, 0] + L[:, 2] + L[:, 5], T * np.exp(roots[2][0] * rr), atol=2e-2)


def test_threshold_enforced(grid):
    with pytest.raises(IllPosedThresholdError):
        solve_averaged(AveragedField.zeros(grid), -0.8, np.zeros(6), weight=WeightSpec(lam=0.5))
    solve_averaged(AveragedField.zeros(grid), -0.7, np.zeros(6), weight=WeightSpec(lam=0.5))


def test_degenerate_root_signalled(grid):
    with pytest.raises(DegenerateRootError):
        solve_scalar(np.zeros(grid.n, complex), -1.0, 0.0, grid)


# --- manufactured solutions ---------------------------------------------------
_r = sp.symbols("r", real=True)
_AMP = [0.7, -0.4, 0.3, 0.5, -0.6, 0.9]
_Y = [a * sp.exp(-_r * k) * (1 + sp.sin(2 * _r) / 3) for a, k in zip(_AMP, (0.8, 1.1, 0.9, 1.3, 1.2, 1.5))]


def _manufactured(grid, omega):
    ys = [sp.lambdify(_r, y) for y in _Y]
    y1 = [sp.lambdify(_r, sp.diff(y, _r)) for y in _Y]
    y2 = [sp.lambdify(_r, sp.diff(y, _r, 2)) for y in _Y]
    r = grid.r
    L = np.stack([f(r) for f in ys], axis=1)
    L1 = np.stack([f(r) for f in y1], axis=1)
    L2 = np.stack([f(r) for f in y2], axis=1)
    F = ode_left_sides(L, L1, L2, omega)
    return L, F


@pytest.mark.parametrize("omega", [0.0, 1.5, 0.3 + 1.0j])
def test_manufactured_recovery_second_order(omega):
    errs = []
    for g in (RadialGrid(n=400), RadialGrid(n=799)):
        L, F = _manufactured(g, omega)
        sol = solve_averaged(AveragedField.from_frame(g, F), omega, AveragedField.from_frame(g, L))
        errs.append(np.abs(sol.frame() - L).max())
    assert errs[0] < 1e-2
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_residuals_small(grid):
    L, F = _manufactured(grid, 0.4)
    fhat = AveragedField.from_frame(grid, F)
    sol = solve_averaged(fhat, 0.4, AveragedField.from_frame(grid, L))
    res = averaged_residual(sol, fhat, 0.4)
    for key in ("11", "12", "22", "13", "23", "33", "trace"):
        assert res[key] < 5e-3, key
    assert res["pde_ode"] < 5e-2


def test_pde_ode_discrepancy_second_order():
    vals = []
    for g in (RadialGrid(n=400), RadialGrid(n=799)):
        l = frame_field(g, [0.3, -0.7, 0.2, 0.9, -0.1, 0.5])
        vals.append(averaged_residual(average(l), AveragedField.zeros(g), 0.5)["pde_ode"])
    assert 3.0 < vals[0] / vals[1] < 5.0


def test_exact_mode_residual(grid):
    w = 0.6
    (m1, _), (m4, _), (m5, _) = characteristic_roots(w)
    rr = grid.r - grid.s
    L = np.zeros((grid.n, 6), complex)
    L[:, 1] = np.exp(m1 * rr)
    L[:, 3] = np.exp(m4 * rr)
    L[:, 5] = np.exp(m5 * rr)
    res = averaged_residual(AveragedField.from_frame(grid, L), AveragedField.zeros(grid), w)
    assert max(res["12"], res["13"], res["33"]) < 5e-3


@pytest.mark.parametrize("omega", [0.0, 2.0, -0.5])
def test_decay_branch_exactness(grid, omega):
    inner = np.array([0.3, -0.2, 0.5, 0.4, -0.1, 0.8])
    sol = solve_averaged(AveragedField.zeros(grid), omega, inner)
    coeffs = fit_mode_coefficients(sol, omega)
    for name, (grow, decay) in coeffs.pairs.items():
        assert abs(grow) <= 1e-8 * max(abs(decay), 1e-300) or abs(decay) == 0, name
