import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conebesov import bins as b
from conebesov import geometry as g
from conebesov import wavelets as w

coord = st.floats(-2, 2, allow_nan=False)
width = st.floats(0.01, 1.0, allow_nan=False)


def _dense_points(lo, hi, n=9):
    u = np.linspace(0, 1, n)
    grid = np.stack(np.meshgrid(u, u, u, indexing="ij"), -1).reshape(-1, 3)
    return lo + (hi - lo) * grid


def test_box_vertex_distance():
    lo = np.array([[1.0, -1, -1], [-1, -1, -1], [1, 2, 2]])
    hi = np.array([[2.0, 1, 1], [1, 1, 1], [3, 3, 3]])
    np.testing.assert_allclose(b.box_vertex_distance(lo, hi), [1.0, 0.0, 3.0])


@settings(max_examples=80, deadline=None)
@given(st.tuples(coord, coord, coord), st.tuples(width, width, width),
       st.tuples(coord, coord, coord).filter(lambda v: np.linalg.norm(v) > 0.1))
def test_box_ray_distance_vs_sampling(lo, wd, e):
    lo = np.array(lo)
    hi = lo + np.array(wd)
    e = np.array(e) / np.linalg.norm(e)
    pts = _dense_points(lo, hi, 13)
    t = np.maximum(pts @ e, 0.0)
    d = np.linalg.norm(pts - t[:, None] * e, axis=1)
    got = b.box_ray_distance(lo[None], hi[None], e)[0]
    assert got <= d.min() + 1e-12
    # sampling spacing bounds how far the true minimum can lie below the samples
    assert got >= d.min() - np.linalg.norm(hi - lo) / 12 - 1e-12
    assert b.box_ray_max_distance(lo[None], hi[None], e)[0] == pytest.approx(d.max(), abs=1e-12)


def test_box_ray_distance_known():
    e = np.array([0.0, 0.0, 1.0])
    lo = np.array([[1.0, 0, 2], [1, 1, -3], [-0.5, -0.5, 1]])
    hi = np.array([[2.0, 1, 3], [2, 2, -2], [0.5, 0.5, 2]])
    np.testing.assert_allclose(b.box_ray_distance(lo, hi, e), [1.0, np.sqrt(2 + 4), 0.0])


def test_octant_boxes(octant):
    tk = octant.truncate(10.0)
    lo = np.array([[0.0, 0, 0], [-1, 0, 0], [-0.5, -0.5, -0.5], [-2, -2, -2]])
    hi = np.array([[1.0, 1, 1], [0, 1, 1], [0.5, 0.5, 0.5], [-1, -1, -1]])
    np.testing.assert_array_equal(b.boxes_meet_truncated(lo, hi, tk), [True, False, True, False])


@pytest.mark.parametrize("maker", [g.octant, g.l_shape, g.fichera_complement])
def test_meet_matches_point_sampling(maker, rng):
    cone = maker()
    tk = cone.truncate(100.0)
    lo = rng.uniform(-1, 1, size=(300, 3))
    hi = lo + rng.uniform(0.05, 0.6, size=(300, 3))
    got = b.boxes_meet_truncated(lo, hi, tk)
    for i in range(len(lo)):
        pts = _dense_points(lo[i], hi[i], 7)
        inside = np.any(cone.contains(pts))
        if inside:
            assert got[i]
    # a box flagged as meeting must contain interior points of the cone
    for i in np.flatnonzero(got):
        pts = _dense_points(lo[i], hi[i], 25)
        assert np.any(cone.contains(pts))


def test_split_edge_distances(octant):
    lo = np.array([[1.0, 1.0, 0.0]])
    hi = np.array([[2.0, 2.0, 1.0]])
    rp, rm = b.split_edge_distances(lo, hi, octant.edges, [0.5, 0.5, -0.2])
    assert rp[0] == pytest.approx(1.0)  # nearest of ex, ey
    assert rm[0] == pytest.approx(np.sqrt(8))  # farthest corner from ez
    rp, rm = b.split_edge_distances(lo, hi, octant.edges, [1, 1, 1])
    assert rp[0] == pytest.approx(1.0) and rm[0] == 0


@pytest.mark.parametrize("x, j, expected", [(5.3 * 2**-4, 4, 5), (2.1 * 2**-4, 4, 2), (0.0, 3, 0), (np.inf, 2, -1)])
def test_bin_floor(x, j, expected):
    assert b._bin(np.array([x]), j, 1.0)[0] == expected


@pytest.fixture(scope="module")
def small_field():
    x = np.random.default_rng(3).normal(size=(32, 32, 32))
    return w.analyze(x, w.WaveletSystem(2), 3, origin=(-0.5, -0.5, -0.5), side=1.0)


def test_classify_partition_and_families(small_field, octant):
    tk = octant.truncate(0.5)
    bins = b.classify(small_field, tk)
    counts = bins.counts()
    fam = bins.family_counts()
    assert sum(counts.values()) == bins.total() == sum(fam.values())
    for j, lb in bins.levels.items():
        assert np.all(lb.k >= 0) and np.all(lb.m >= 0)
        assert np.all(lb.m <= lb.k + 1)  # r_I <= rho_I up to box effects
    # supports containing the vertex land in the vertex family
    for j in small_field.levels:
        lo, hi = small_field.support_boxes(j)
        has0 = np.all((lo <= 0) & (hi >= 0), axis=-1).ravel()
        lb = bins.levels[j]
        assert np.all(lb.family[has0[lb.flat_index]] == b.VERTEX)


def test_classify_split_keys(small_field, octant):
    bins = b.classify(small_field, octant.truncate(0.5), delta_signs=[0.5, 0.5, -0.2])
    assert bins.split
    key = next(iter(bins.counts()))
    assert isinstance(key[2], tuple) and len(key[2]) == 2
    j, k, m = key
    assert len(bins.members(j, k, m)) * 7 == bins.counts()[key]


def test_cardinality_hand_counts(octant):
    tk = octant.truncate(0.5)
    t1 = b.bin_cardinalities(tk, 1)
    assert t1.by_k == {0: 1} and t1.by_km == {(0, 0): 1}
    t2 = b.bin_cardinalities(tk, 2)
    # 8 cubes of side 1/4 in [0, 1/2]^3; only the corner cube has rho = 0
    assert t2.by_k == {0: 1, 1: 7}
    with pytest.raises(ValueError):
        b.bin_cardinalities(tk, 0)


def test_cardinality_self_similar(octant):
    tk = octant.truncate(0.5)
    t5, t6 = b.bin_cardinalities(tk, 5), b.bin_cardinalities(tk, 6)
    for k in range(0, 15):
        assert t5.by_k[k] == t6.by_k[k]
    ratios = [b.bin_cardinalities(tk, j).sup_k_ratio() for j in (4, 5, 6)]
    assert max(ratios) / min(ratios) < 2
