import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conebesov import wavelets as w


@pytest.fixture(scope="module")
def db4():
    return w.WaveletSystem(4)


def _field_from_values(vals, n=16):
    """A coefficient field whose detail coefficients are the given values."""
    cf = w.analyze(np.zeros((n, n, n)), levels=1)
    flat = cf.details[cf.levels[0]].ravel()
    flat[: len(vals)] = vals
    return cf


def test_db2_closed_form():
    s3 = np.sqrt(3.0)
    ref = np.array([1 + s3, 3 + s3, 3 - s3, 1 - s3]) / (4 * np.sqrt(2.0))
    np.testing.assert_allclose(w.daubechies_filter(2), ref, atol=1e-14)


@pytest.mark.parametrize("order", [1, 2, 3, 4, 5, 6])
def test_filters_orthonormal_with_moments(order):
    s = w.WaveletSystem(order)
    s.check()
    assert s.length == 2 * order
    assert np.sum(s.h) == pytest.approx(np.sqrt(2.0))


def test_scaling_function_normalized(db4):
    x, phi = w.scaling_function(db4.h, 7)
    dx = x[1] - x[0]
    assert np.sum(phi) * dx == pytest.approx(1.0, abs=1e-10)
    assert np.sum(phi**2) * dx == pytest.approx(1.0, abs=1e-5)
    assert np.sum(x * phi) * dx == pytest.approx(db4.first_moment, abs=1e-8)


@pytest.mark.parametrize("levels", [1, 3, 5])
def test_parseval_and_reconstruction(db4, rng, levels):
    x = rng.normal(size=(32, 32, 32))
    cf = w.analyze(x, db4, levels)
    assert cf.energy() == pytest.approx(np.sum(x**2), rel=1e-10)
    np.testing.assert_allclose(w.synthesize(cf), x, atol=1e-10)
    assert cf.j0 == 5 - levels and cf.levels == list(range(5 - levels, 5))


def test_levels_validation(db4):
    with pytest.raises(ValueError, match="levels"):
        w.analyze(np.zeros((8, 8, 8)), db4, 4)
    with pytest.raises(ValueError, match="power of two"):
        w.analyze(np.zeros((12, 12, 12)), db4)
    with pytest.raises(ValueError, match="cubic"):
        w.analyze(np.zeros((8, 8, 4)), db4)


def test_single_wavelet_roundtrip(db4):
    cf = w.analyze(np.zeros((64, 64, 64)), db4, 3)
    j, e, k = 4, (1, 0, 1), (6, 5, 7)
    cf.set_single(j, e, k)
    x = w.synthesize(cf)
    assert np.sum(x**2) == pytest.approx(1.0, abs=1e-10)  # fully inside the grid
    back = w.analyze(x, db4, 3)
    t = w.DETAIL_TYPES.index(e)
    idx = (t,) + tuple(np.array(k) - back.offsets[j])
    assert back.details[j][idx] == pytest.approx(1.0, abs=1e-10)
    back.details[j][idx] = 0.0
    others = max(np.abs(d).max() for d in back.details.values())
    assert max(others, np.abs(back.approx).max()) <= 1e-8


def _interior(cf, j, margin=0.0):
    (lx, hx), (ly, hy), (lz, hz) = cf.support_intervals(j)
    ok = [(lo >= cf.origin[a] + margin) & (hi <= cf.origin[a] + cf.side - margin)
          for a, (lo, hi) in enumerate(((lx, hx), (ly, hy), (lz, hz)))]
    return np.ix_(*[np.flatnonzero(o) for o in ok])


@pytest.mark.parametrize(
    "poly",
    [lambda x, y, z: np.ones_like(x), lambda x, y, z: x - 2 * y * z + z**3, lambda x, y, z: (x * y * z) + x**2],
)
def test_polynomial_annihilation(db4, poly):
    n = 64
    c = (np.arange(n) + 0.5) / n
    X, Y, Z = np.meshgrid(c, c, c, indexing="ij")
    cf = w.analyze(poly(X, Y, Z) * n**-1.5, db4, 3)
    scale = np.sqrt(cf.energy())
    for j in cf.levels:
        sel = _interior(cf, j)
        inner = cf.details[j][(slice(None),) + sel]
        assert inner.size > 0
        assert np.abs(inner).max() <= 1e-7 * scale


def test_support_boxes_track_samples(db4):
    # the first moment shift puts the finest scaling box centre-of-mass on x_n
    cf = w.analyze(np.zeros((16, 16, 16)), db4, 1, origin=(-1, 0, 0), side=2.0)
    lo, hi = cf.support_intervals(3)[0]
    assert hi[0] - lo[0] == pytest.approx(2.0 * 7 / 8)
    centre = lo + 2.0 * db4.first_moment / 8
    assert np.all(np.diff(centre) == pytest.approx(0.25))


def test_besov_single_wavelet(db4):
    cf = w.analyze(np.zeros((32, 32, 32)), db4, 4)
    cf.set_single(3, (0, 1, 0), (2, 2, 2))
    for s, p, q in [(1.0, 2.0, 2.0), (0.7, 1.0, 1.0), (2.5, 0.8, 0.8), (1.2, 3.0, 2.0)]:
        assert w.besov_norm(cf, s, p, q) == pytest.approx(2 ** (3 * (s + 3 * (0.5 - 1 / p))), rel=1e-12)


def test_besov_zero_and_validation(db4):
    cf = w.analyze(np.zeros((16, 16, 16)), db4, 2)
    assert w.besov_norm(cf, 1.0, 2, 2) == 0.0
    with pytest.raises(ValueError):
        w.besov_norm(cf, 0.5, 0.5, 0.5)  # needs s > 3


def test_besov_p2_double_sum_oracle(db4, rng):
    cf = w.analyze(rng.normal(size=(16, 16, 16)), db4, 3)
    s = 0.8
    oracle = np.sum(cf.approx**2)
    for j in cf.levels:
        for c in cf.details[j].ravel():
            oracle += 2 ** (2 * j * s) * c * c
    assert w.besov_norm(cf, s, 2, 2) ** 2 == pytest.approx(oracle, rel=1e-12)


def test_p0_lp_norm_is_tensor_of_1d(db4):
    cf = w.analyze(np.zeros((8, 8, 8)), db4, 3)
    cf.approx[...] = 0
    cf.approx[3, 3, 3] = 1.0
    x, phi = w.scaling_function(db4.h, 3)
    one_d = np.sum(np.abs(phi) ** 3) / 8
    got = w.besov_norm(cf, 0.5, 3.0, 3.0)
    assert got == pytest.approx(one_d, rel=1e-12)


def test_nterm_small_example():
    cf = _field_from_values([3.0, -2.0, 1.0])
    curve = w.nterm_curve(cf, [0, 1, 2, 3])
    np.testing.assert_allclose(curve.sigma, [np.sqrt(14), np.sqrt(5), 1.0, 0.0], atol=1e-14)
    assert w.nterm_curve(cf, [curve.total]).sigma[0] == 0.0
    with pytest.raises(ValueError, match="exceeds"):
        w.nterm_curve(cf, [curve.total + 1])
    with pytest.raises(ValueError, match="sorted"):
        w.nterm_curve(cf, [2, 1])


def test_nterm_geometric_tail():
    vals = 2.0 ** -np.arange(21)
    cf = _field_from_values(vals)
    Ns = np.arange(21)
    curve = w.nterm_curve(cf, Ns)
    ref = [np.sqrt(np.sum(4.0 ** -np.arange(n, 21))) for n in Ns]
    np.testing.assert_allclose(curve.sigma, ref, rtol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-100, 100, allow_nan=False), min_size=1, max_size=40), st.randoms())
def test_nterm_monotone_energy_and_permutation(vals, r):
    cf = _field_from_values(vals)
    Ns = np.arange(len(vals) + 1)
    curve = w.nterm_curve(cf, Ns)
    assert np.all(np.diff(curve.sigma) <= 1e-12 * (1 + curve.sigma[0]))
    kept = np.cumsum(np.concatenate([[0.0], np.sort(np.square(vals))[::-1]]))
    np.testing.assert_allclose(curve.sigma**2 + kept, np.sum(np.square(vals)), atol=1e-10 * (1 + kept[-1]))
    shuffled = list(vals)
    r.shuffle(shuffled)
    signs = [(-1) ** i for i in range(len(vals))]
    perm = w.nterm_curve(_field_from_values(np.multiply(shuffled, signs)), Ns)
    np.testing.assert_allclose(perm.sigma, curve.sigma, atol=1e-12 * (1 + curve.sigma[0]))


def test_nterm_proxy_tag(db4, rng):
    cf = w.analyze(rng.normal(size=(16, 16, 16)), db4, 2)
    assert w.nterm_curve(cf, [1, 10], p=1.5).tag == "coefficient-proxy"
    assert w.nterm_curve(cf, [1, 10]).tag == "l2-parseval"


def test_level_truncation_curve(db4, rng):
    cf = w.analyze(rng.normal(size=(16, 16, 16)), db4, 3)
    lt = w.level_truncation_curve(cf)
    assert lt.sigma[-1] == 0.0
    assert lt.N[-1] == cf.count()
    assert np.all(np.diff(lt.sigma) <= 0)
    e2 = np.sum(cf.details[cf.levels[-1]] ** 2)
    assert lt.sigma[-2] == pytest.approx(np.sqrt(e2))


def test_fit_rate_exact_and_scale_free():
    N = np.arange(1, 200)
    assert w.fit_rate((N, N**-0.5)) == pytest.approx(-0.5, abs=1e-12)
    assert w.fit_rate((N, 7.0 / N)) == pytest.approx(-1.0, abs=1e-12)
    assert w.fit_rate(w.NTermCurve(N, N**-1.5), slice(10, 50)) == pytest.approx(-1.5, abs=1e-12)


def test_fit_rate_noise_monte_carlo(rng):
    N = np.unique(np.logspace(1, 5, 40).astype(int))
    slopes = [w.fit_rate((N, N**-0.5 * (1 + 0.01 * rng.standard_normal(len(N))))) for _ in range(100)]
    assert np.max(np.abs(np.array(slopes) + 0.5)) < 0.02


def test_fit_rate_errors():
    with pytest.raises(ValueError, match="zero"):
        w.fit_rate((np.array([1, 2, 3]), np.array([1.0, 0.0, 0.5])))
    with pytest.raises(ValueError, match="3 points"):
        w.fit_rate((np.array([1, 2]), np.array([1.0, 0.5])))
