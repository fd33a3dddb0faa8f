import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cuspflow.cusp_model import RadialGrid, SymTensorField, WeightSpec, background_metric
from cuspflow.errors import UnderResolvedError
from cuspflow.norms import (
    NormReport,
    frame_jets,
    holder_norm,
    j_functional,
    k_functional_upper,
    k_profile,
    l2_norm,
    mollifier_decompose,
    weight_value,
    weighted_ck_norm,
    weighted_holder_seminorm,
    weighted_l2,
)

from conftest import frame_field, smooth_bump

W1 = WeightSpec(lam=1.0)
GRID401 = RadialGrid(R=20.0, n=401)


def test_weight_examples():
    for lam in (0.3, 0.5, 1.0):
        assert weight_value(0.0, WeightSpec(lam=lam)) == 1.0
    assert weight_value(1.0, W1) == pytest.approx(2 * np.exp(-1), abs=1e-12)
    r = np.linspace(0, 30, 301)
    assert np.all(np.diff(weight_value(r, W1)) <= 0)


def test_weight_product_rule():
    r = np.linspace(0, 10, 41)
    a, b = np.meshgrid(r, r)
    for lam in (0.25, 0.5, 0.75):
        spec = WeightSpec(lam=lam)
        assert np.all(spec.value(a) * spec.value(b) <= spec.value(a + b) * (1 + 1e-12))
    # for lambda = 1 the product inequality runs the other way off the axes
    lhs, rhs = W1.value(a) * W1.value(b), W1.value(a + b)
    assert np.all(lhs >= rhs * (1 - 1e-12))
    assert lhs[4, 4] > rhs[4, 4]


def _brute_seminorm(T, grid, exponent, spec):
    flat = T.reshape(T.shape[0], -1)
    r = grid.r
    w = spec.on_grid(grid)
    best = 0.0
    for i in range(grid.n):
        for j in range(i + 1, grid.n):
            if r[j] - r[i] > 1 + 1e-12:
                break
            q = w[i] * np.linalg.norm(flat[j] - flat[i]) / (r[j] - r[i]) ** exponent
            best = max(best, q)
    return best


def test_ck_examples(grid):
    h0 = background_metric(grid).field
    assert weighted_ck_norm(h0, 0, W1) == pytest.approx(np.sqrt(3))
    spec = WeightSpec(lam=0.5)
    l = SymTensorField.from_components(grid, c33=np.exp(0.5 * grid.r))
    assert weighted_ck_norm(l, 0, spec) == pytest.approx(1.0)
    assert weighted_ck_norm(SymTensorField.zeros(grid), 2, W1) == 0.0


def test_seminorm_linear_slope():
    m = 0.7
    l = SymTensorField.from_components(GRID401, c33=m * GRID401.r)
    assert weighted_holder_seminorm(l, 0, 0.6, W1) == pytest.approx(m, rel=1e-10)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_seminorm_frame_constant(grid, k):
    l = SymTensorField.from_frame(grid, np.tile([1.0, 0.3, -2.0, 0.5, 0.1, 4.0], (grid.n, 1)))
    assert weighted_holder_seminorm(l, k, 0.4, W1) < 1e-9


@pytest.mark.parametrize("k,exponent,lam", [(0, 0.6, 1.0), (1, 0.3, 0.5), (2, 0.6, 0.75)])
def test_seminorm_matches_bruteforce(k, exponent, lam):
    g = RadialGrid(R=6.0, n=121)
    spec = WeightSpec(lam=lam)
    l = frame_field(g, [0.3, -0.2, 0.5, 0.4, -0.1, 0.8], center=3.0, width=2.0)
    fast = weighted_holder_seminorm(l, k, exponent, spec)
    brute = _brute_seminorm(frame_jets(l, k)[k], g, exponent, spec)
    assert fast == pytest.approx(brute, rel=1e-12)


def test_seminorm_cusp_singularity():
    g = RadialGrid(R=6.0, n=601)
    r0, theta = 3.0, 0.6
    prof = smooth_bump(g.r, r0, 2.5) * np.abs(g.r - r0) ** theta
    l = SymTensorField.from_components(g, c33=prof)
    spec = WeightSpec(lam=0.5)
    val = weighted_holder_seminorm(l, 0, theta, spec)
    brute = _brute_seminorm(frame_jets(l, 0)[0], g, theta, spec)
    assert val == pytest.approx(brute, rel=1e-12)
    assert val > 0.5 * weight_value(r0, spec)


def test_weighted_l2_closed_form():
    xi = 0.4
    errs = []
    for g in (RadialGrid(R=20, n=400), RadialGrid(R=20, n=799)):
        h0 = background_metric(g).field
        exact = 3 * (np.exp(-(2 + 2 * xi) * g.s) - np.exp(-(2 + 2 * xi) * g.R)) / (2 + 2 * xi)
        errs.append(abs(weighted_l2(h0, xi) - exact))
    assert errs[0] < 5e-3 and 3.5 < errs[0] / errs[1] < 4.5
    assert weighted_l2(SymTensorField.zeros(GRID401), 0.3) == 0.0


def test_l2_embedding_lambda_one(grid):
    # |l| <= ||l||_C0 / w gives ||l||_L2^2 <= ||l||^2 int (r+1)^-2 dr
    cap = np.sqrt(1 - 1 / (grid.R + 1))
    rng = np.random.default_rng(3)
    for _ in range(10):
        l = frame_field(grid, rng.uniform(-1, 1, 6), center=rng.uniform(3, 17), width=rng.uniform(1, 3))
        assert l2_norm(l) <= cap * weighted_ck_norm(l, 0, W1) * (1 + 1e-3)


def test_mollifier_basics(grid):
    const = SymTensorField.from_frame(grid, np.tile([1.0, 0.0, 2.0, 0.5, 0.0, -1.0], (grid.n, 1)))
    a, b = mollifier_decompose(const, 0.5)
    assert np.abs(a.frame()).max() < 1e-12
    l = frame_field(grid, [0.3, -0.2, 0.5, 0.4, -0.1, 0.8])
    a, b = mollifier_decompose(l, 0.3)
    assert np.allclose((a + b).comps, l.comps, rtol=0, atol=1e-15)
    with pytest.raises(UnderResolvedError):
        mollifier_decompose(l, 1.5 * grid.dr)


def test_mollifier_holder_bounds():
    g = RadialGrid(R=6.0, n=1201)
    theta = 0.4
    prof = smooth_bump(g.r, 3.0, 2.5) * np.abs(g.r - 3.0) ** theta
    l = SymTensorField.from_components(g, c33=prof)
    hn = holder_norm(l, 0, theta, W1)
    ca, cb = [], []
    for t in np.geomspace(10 * g.dr, 0.9, 8):
        a, b = mollifier_decompose(l, t)
        ca.append(weighted_ck_norm(a, 0, W1) / (t**theta * hn))
        db = frame_jets(b, 1)[1]
        cb.append(np.max(W1.on_grid(g) * np.abs(db[:, 2, 2, 2])) / (t ** (theta - 1) * hn))
    assert max(ca) < 5 and max(cb) < 5


def test_k_functional_examples(grid):
    l = frame_field(grid, [0.3, -0.2, 0.5, 0.4, -0.1, 0.8])
    assert k_functional_upper(l, 1.0) == weighted_ck_norm(l, 0, W1)
    assert k_functional_upper(l, 3.0) == weighted_ck_norm(l, 0, W1)
    z = SymTensorField.zeros(grid)
    for t in (0.2, 0.5, 2.0):
        assert k_functional_upper(z, t) == 0.0
        assert j_functional(z, t) == 0.0
    assert j_functional(l, 1e-9) == pytest.approx(weighted_ck_norm(l, 0, W1))


def test_k_profile_decreases_for_smooth_field():
    g = RadialGrid(R=6.0, n=3001)
    l = frame_field(g, [0.3, -0.2, 0.5, 0.4, -0.1, 0.8], center=3.0, width=2.5, wiggle=0.0)
    ts = np.geomspace(10 * g.dr, 0.95, 10)
    prof = k_profile(l, ts, 0.2)
    # below t = 1 the mollifier bound shrinks steadily with the scale
    assert np.all(np.diff(prof) > 0)


def _kinds(l):
    return [
        weighted_ck_norm(l, 0, W1),
        weighted_ck_norm(l, 2, W1),
        holder_norm(l, 1, 0.4, W1),
        np.sqrt(weighted_l2(l, 0.3, order=1)),
        k_functional_upper(l, 0.5),
        j_functional(l, 0.5),
    ]


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=12, max_size=12), st.floats(-5, 5))
def test_norm_axioms(coef, c):
    g = RadialGrid(R=6.0, n=121)
    l1 = frame_field(g, coef[:6], center=2.5, width=1.5)
    l2 = frame_field(g, coef[6:], center=3.5, width=1.5)
    n1, n2, nsum, nscaled = _kinds(l1), _kinds(l2), _kinds(l1 + l2), _kinds(l1 * c)
    for a, b, s, sc in zip(n1, n2, nsum, nscaled):
        assert sc == pytest.approx(abs(c) * a, rel=1e-9, abs=1e-12)
    # the mollifier bound is not a norm; check subadditivity on the true norms only
    for a, b, s in list(zip(n1, n2, nsum))[:4] + [(n1[5], n2[5], nsum[5])]:
        assert s <= a + b + 1e-12


def test_norm_report_validation():
    NormReport(1.0, "weighted-ck", {"k": 0})
    with pytest.raises(ValueError):
        NormReport(-1.0, "weighted-ck")
    with pytest.raises(ValueError):
        NormReport(1.0, "sobolev")
