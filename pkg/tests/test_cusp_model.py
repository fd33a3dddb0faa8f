import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from cuspflow.cusp_model import (
    HolderOrders,
    MetricState,
    RadialGrid,
    SymTensorField,
    WeightSpec,
    background_metric,
    christoffel,
    pointwise_norm,
    ricci,
    trace,
)
from cuspflow.errors import DegenerateMetricError

from conftest import frame_field


def _sympy_christoffel():
    r = sp.symbols("r", real=True)
    h = sp.diag(sp.exp(-2 * r), sp.exp(-2 * r), 1)
    hi = h.inv()
    d = lambda f, k: sp.diff(f, r) if k == 2 else 0
    G = {}
    for a in range(3):
        for b in range(3):
            for c in range(3):
                G[a, b, c] = sp.lambdify(
                    r,
                    sp.simplify(sum(hi[a, k] * (d(h[k, c], b) + d(h[k, b], c) - d(h[b, c], k)) for k in range(3)) / 2),
                )
    return G


def test_background_values(grid):
    h0 = background_metric(grid)
    assert h0.field.c11[0] == 1.0 and h0.field.c33[0] == 1.0 and h0.field.c12[0] == 0.0
    g = RadialGrid(s=0.0, R=20 * np.log(2), n=21)
    assert np.isclose(background_metric(g).field.c11[1], 0.25)


def test_christoffel_matches_symbolic(grid):
    G = _sympy_christoffel()
    num = christoffel(background_metric(grid))
    r = grid.r[1:-1]
    for key, f in G.items():
        exact = np.broadcast_to(f(r), r.shape)
        assert np.max(np.abs(num[1:-1][:, key[0], key[1], key[2]] - exact)) < 5e-3
    assert np.allclose(num[1:-1, 0, 0, 2], -1.0, atol=2e-3)
    assert np.allclose(num, num.transpose(0, 1, 3, 2))


def test_constant_metric_has_no_christoffels(small_grid):
    comps = np.tile([2.0, 0.3, 1.5, 0.1, -0.2, 1.0], (small_grid.n, 1))
    h = MetricState(SymTensorField(small_grid, comps))
    assert np.abs(christoffel(h)).max() < 1e-12
    assert np.abs(ricci(h).comps).max() < 1e-12


def _ricci_residual(grid):
    h0 = background_metric(grid)
    return np.abs(ricci(h0).comps[1:-1] + 2 * h0.comps[1:-1]).max()


def test_ricci_background_second_order():
    g = RadialGrid(n=400)
    e1, e2 = _ricci_residual(g), _ricci_residual(g.refined())
    assert e1 < 5e-3
    assert 3.5 <= e1 / e2 <= 4.5


@pytest.mark.parametrize("c", [0.5, 2.0, 7.0])
def test_ricci_scale_invariant(c, small_grid):
    h0 = background_metric(small_grid)
    hc = MetricState(h0.field * c)
    assert np.allclose(ricci(hc).comps, ricci(h0).comps, atol=1e-12)


def test_degenerate_metric_rejected(small_grid):
    comps = np.tile([1.0, 0.0, -1.0, 0.0, 0.0, 1.0], (small_grid.n, 1))
    with pytest.raises(DegenerateMetricError):
        MetricState(SymTensorField(small_grid, comps))


def test_pointwise_norm_and_trace(grid):
    h0 = background_metric(grid).field
    assert np.allclose(pointwise_norm(h0) ** 2, 3.0)
    assert np.allclose(trace(h0), 3.0)
    z = SymTensorField.zeros(grid)
    assert pointwise_norm(z, 5) == 0.0 and trace(z, 5) == 0.0
    e33 = SymTensorField.from_components(grid, c33=np.ones(grid.n))
    assert pointwise_norm(e33, 7) == 1.0 and trace(e33, 7) == 1.0


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=6, max_size=6))
def test_coordinate_norm_formula(coef):
    grid = RadialGrid(R=6.0, n=61)
    l = frame_field(grid, coef, center=3.0, width=2.0)
    r = grid.r
    c = l.comps
    closed = (
        np.exp(4 * r) * (c[:, 0] ** 2 + 2 * c[:, 1] ** 2 + c[:, 2] ** 2)
        + 2 * np.exp(2 * r) * (c[:, 3] ** 2 + c[:, 4] ** 2)
        + c[:, 5] ** 2
    )
    assert np.allclose(pointwise_norm(l) ** 2, closed)
    assert np.allclose(trace(l), np.exp(2 * r) * (c[:, 0] + c[:, 2]) + c[:, 5])


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-0.3, 0.3), min_size=6, max_size=6))
def test_swap_symmetry_of_ricci(coef):
    grid = RadialGrid(R=6.0, n=61)
    h0 = background_metric(grid)
    h = MetricState(h0.field + frame_field(grid, coef, center=3.0, width=2.0))
    lhs = ricci(MetricState(h.field.swap12())).comps
    rhs = ricci(h).swap12().comps
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_weight_and_holder_validation():
    with pytest.raises(ValueError):
        WeightSpec(lam=1.5)
    with pytest.raises(ValueError):
        WeightSpec(lam=0.5, s=-1)
    with pytest.raises(ValueError, match="sigma < rho"):
        HolderOrders(sigma=0.6, rho=0.4)
    with pytest.raises(ValueError, match="avoid"):
        HolderOrders(sigma=0.2, rho=0.6, alpha=0.2)
    assert HolderOrders(0.2, 0.6).theta == pytest.approx(0.2)
    with pytest.raises(ValueError):
        RadialGrid(s=0, R=1.5, n=10)
