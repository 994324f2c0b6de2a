import numpy as np
import pytest

from conebesov import geometry as g
from conebesov import models as M
from conebesov import weighted as W
from conebesov.pencil import BCAssignment

Q = W.GradedQuadrature(depth=10)


@pytest.fixture(scope="module")
def wedge_fn():
    return M.cone_edge_singularity(g.l_shape(), 0, BCAssignment.uniform("D", 3))


def _edge_params(d0, l=2):
    return W.WeightParams(l, 2, 1.0, (d0, 2.0, 2.0))


def test_params_validation():
    assert W.WeightParams(1, 2, 0, (0, 0, 0), "V").jtilde == {0, 1, 2}
    assert W.WeightParams(1, 2, 0, (0, 0, 0), "W").jtilde == frozenset()
    assert W.WeightParams(1, 2, 0, (0, 0, 0), {"Wcal": [1]}).jtilde == {1}
    # V carries no lower bound on delta; W and Wcal need delta_j > -2/p off J~
    W.WeightParams(1, 2, 0, (-3, 0, 0), "V")
    W.WeightParams(1, 2, 0, (-3, 0, 0), ("Wcal", [0]))
    with pytest.raises(ValueError, match="-2/p"):
        W.WeightParams(1, 2, 0, (-1.0, 0, 0), "W")
    with pytest.raises(ValueError, match="-2/p"):
        W.WeightParams(1, 4, 0, (0, -0.5, 0), ("Wcal", [0]))
    with pytest.raises(ValueError):
        W.WeightParams(1, 2, 0, (0, 0, 0), ("Wcal", [3]))
    with pytest.raises(ValueError):
        W.WeightParams(1, 2, 0, (0, 0, 0), "X")
    with pytest.raises(ValueError):
        W.WeightParams(1, 0.5, 0, (0, 0, 0))
    with pytest.raises(ValueError):
        W.WeightParams(-1, 2, 0, (0, 0, 0))
    with pytest.raises(ValueError, match="edges"):
        W.weighted_norm(1.0, W.WeightParams(0, 2, 0, (0, 0)), g.octant().truncate(1.0), Q)
    with pytest.raises(ValueError):
        W.GradedQuadrature(depth=2)


def test_from_config():
    p = W.WeightParams.from_config({"l": 2, "p": 2, "beta": 0.0, "delta": [1, 1, 1], "variant": {"Wcal": [0, 2]}})
    assert p.jtilde == {0, 2} and p.delta == (1.0, 1.0, 1.0)


@pytest.mark.parametrize("maker, fraction", [(g.octant, 1 / 8), (g.l_shape, 3 / 8), (g.fichera_complement, 7 / 8)])
def test_constant_gives_volume(maker, fraction):
    K = maker().truncate(1.0)
    vol = fraction * 4 * np.pi / 3
    r = W.weighted_norm(1.0, W.WeightParams(0, 2, 0, (0, 0, 0)), K, Q)
    assert not r.diverged
    assert r.value == pytest.approx(np.sqrt(vol), rel=1e-5)
    k = W.kondratiev_norm(1.0, 0, 0, 2, K, Q)
    assert k.value == pytest.approx(np.sqrt(vol), rel=1e-5)


def test_octant_example_value():
    r = W.weighted_norm(1.0, W.WeightParams(0, 2, 0, (0, 0, 0)), g.octant().truncate(1.0), Q)
    assert r.value == pytest.approx(0.7236, abs=5e-5)


def test_polynomial_oracle_derivatives(rng):
    u = W.PolynomialOracle({(2, 1, 0): 3.0, (0, 0, 1): -1.0})
    x = rng.normal(size=(5, 3))
    d = u.derivatives(x, 2)
    np.testing.assert_allclose(d[(0, 0, 0)], 3 * x[:, 0] ** 2 * x[:, 1] - x[:, 2])
    np.testing.assert_allclose(d[(1, 1, 0)], 6 * x[:, 0])
    np.testing.assert_allclose(d[(0, 0, 1)], -1.0)
    np.testing.assert_allclose(d[(0, 0, 2)], 0.0)


def test_oracle_order_checked(wedge_fn):
    with pytest.raises(ValueError, match="order"):
        W.weighted_norm(M.radial_power(1.0, max_order=1), W.WeightParams(2, 2, 0, (0, 0, 0)),
                        g.octant().truncate(1.0), Q)
    with pytest.raises(TypeError):
        W.as_oracle("u")


@pytest.mark.parametrize("d0, diverges", [(0.5, False), (0.2, True)])
def test_reentrant_edge_membership(wedge_fn, d0, diverges):
    r = W.weighted_norm(wedge_fn, _edge_params(d0), g.l_shape().truncate(1.0), Q)
    assert r.diverged == diverges
    if not diverges:
        # refinement increments shrink steadily
        assert np.all(np.diff(r.increments[-4:]) < 0)


def test_membership_threshold_consistency():
    """Converges at delta_min + 0.1 and diverges at delta_min - 0.1 for generated edge functions."""
    cone = g.wedge_cone(5.0)
    for j in range(cone.n):
        fn = M.cone_edge_singularity(cone, j, BCAssignment.uniform("D", 3))
        dmin = M.membership_threshold(fn, 2).value
        for shift, div in [(0.1, False), (-0.1, True)]:
            d = [3.0] * 3
            d[j] = dmin + shift
            r = W.weighted_norm(fn, W.WeightParams(2, 2, 1.0, d), cone.truncate(1.0), Q)
            assert r.diverged == div, (j, shift, r.ratios)


def test_kondratiev_radial_divergence():
    u = M.radial_power(1.0)
    r = W.kondratiev_norm(u, 1, 2.0, 2, g.octant().truncate(1.0), Q)
    assert r.diverged
    assert not W.kondratiev_norm(u, 1, 0.5, 2, g.octant().truncate(1.0), Q).diverged


def test_homogeneity_exact(wedge_fn):
    K = g.l_shape().truncate(1.0)
    p = _edge_params(0.5)
    a = W.weighted_norm(wedge_fn, p, K, Q)
    b = W.weighted_norm(-3.5 * W.as_oracle(wedge_fn), p, K, Q)
    np.testing.assert_allclose(b.values, 3.5 * a.values, rtol=1e-12)
    assert b.value == pytest.approx(3.5 * a.value, rel=1e-12)


def test_triangle_inequality(wedge_fn):
    K = g.l_shape().truncate(1.0)
    p = _edge_params(0.6)
    u = W.as_oracle(wedge_fn)
    v = W.PolynomialOracle({(1, 1, 0): 2.0, (0, 0, 2): -1.0})
    nu, nv, nw = (W.weighted_norm(f, p, K, Q).values[-1] for f in (u, v, u + v))
    assert nw <= (nu + nv) * (1 + 1e-9)
    nd = W.weighted_norm(u + (-1.0) * u, p, K, Q).values[-1]
    assert nd == 0.0


def test_refinement_rows():
    r = W.weighted_norm(1.0, W.WeightParams(0, 2, 0, (0, 0, 0)), g.octant().truncate(1.0), Q)
    rows = r.as_rows()
    assert [row["level"] for row in rows] == list(range(1, 11))
    assert np.isnan(rows[0]["ratio"]) and rows[-1]["ratio"] == pytest.approx(0.25, abs=0.01)
    assert float(r) == r.value


def _second_smallest_sine(cone, n=200000, seed=0):
    x = np.random.default_rng(seed).normal(size=(n, 3))
    x = x[cone.contains(x)]
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    s = np.sort(W._edge_distances(x, cone.edges), axis=1)
    return s[:, 1].min()


def test_kondratiev_coincidence_bracket():
    """With m = l, beta = l - a and delta_k = l - a the two norms are equivalent;
    the weight ratio is a product of (r_k/rho)^(-gamma) over the edges that are not nearest."""
    cone = g.octant()
    K = cone.truncate(1.0)
    l, a = 1, 0.5
    # a direction is near at most one edge; the second-nearest sine is smallest midway between two
    c = 1 / np.sqrt(2)
    assert c <= _second_smallest_sine(cone) <= c + 2e-2
    gam = [2 * (k - a) for k in range(l + 1)]
    lo = min(min(1.0, c ** (-2 * gm)) for gm in gam)
    hi = max(max(1.0, c ** (-2 * gm)) for gm in gam)
    params = W.WeightParams(l, 2, l - a, (l - a,) * 3)
    funcs = [1.0,
             W.PolynomialOracle({(1, 0, 0): 1.0}),
             W.PolynomialOracle({(0, 1, 0): 1.0, (0, 0, 1): 1.0}),
             W.PolynomialOracle({(1, 1, 0): 1.0}),
             W.PolynomialOracle({(2, 0, 0): 1.0, (0, 2, 0): -1.0}),
             W.PolynomialOracle({(1, 1, 1): 4.0, (0, 0, 0): 0.5}),
             M.radial_power(1.0),
             M.vertex_singularity_analytic("octant_analytic"),
             M.cone_edge_singularity(cone, 0, BCAssignment.uniform("D", 3)),
             M.cone_edge_singularity(cone, 2, BCAssignment.uniform("N", 3), m=2)]
    ratios = []
    for u in funcs:
        kv = W.kondratiev_norm(u, l, a, 2, K, Q)
        vv = W.weighted_norm(u, params, K, Q)
        assert not kv.diverged and not vv.diverged
        # the bracket holds at every refinement level
        ratios.append((kv.values[1:] / vv.values[1:]) ** 2)  # level 1 holds no octant cells
    ratios = np.array(ratios)
    assert np.all(ratios >= lo * (1 - 1e-9)) and np.all(ratios <= hi * (1 + 1e-9))


def test_chain_constant_domination():
    K = g.octant().truncate(1.0)
    res = W.norm_chain_check(1.0, W.WeightParams(1, 2, 0.0, (0.5, 0.5, 0.5), ("Wcal", [0])), K, Q)
    assert res.dominated and res.trail["nodes"] > 0
    v, wc, w = res.values
    assert v >= wc >= w


def test_chain_equal_when_unweighted(rng):
    K = g.l_shape().truncate(1.0)
    u = W.PolynomialOracle({(1, 0, 1): 1.0, (0, 2, 0): 0.3})
    res = W.norm_chain_check(u, W.WeightParams(0, 2, 0.0, (0, 0, 0), ("Wcal", [1])), K, Q)
    v, wc, w = res.values
    assert v == pytest.approx(wc, rel=1e-14) and wc == pytest.approx(w, rel=1e-14)


def test_chain_edge_function_flags(wedge_fn):
    """V can diverge while W stays finite; both flags are recorded."""
    K = g.l_shape().truncate(1.0)
    res = W.norm_chain_check(wedge_fn, W.WeightParams(2, 2, 1.0, (0.5, 0.5, 0.5), ("Wcal", [0, 1, 2])), K, Q)
    assert res.dominated
    flags = (res.v.diverged, res.wcal.diverged, res.w.diverged)
    # W only requires delta > -1 at every order; V with delta = 0.5 off the singular edge
    # weights |u|^2 by (r/rho)^-3 near edges where u does not vanish
    assert flags[2] is False
    assert flags[0] == flags[1]
    assert res.values[0] >= res.values[2]
