import numpy as np
import pytest

from conebesov import geometry as g
from conebesov.pencil import (
    BCAssignment,
    SpectrumRangeError,
    cap_eigenpairs,
    edge_eigenvalues,
    edge_strip,
    pencil_from_lb,
    pencil_spectrum,
    strip_free_check,
    vertex_eigenvalues,
)

PI = np.pi


@pytest.mark.parametrize(
    "theta, pair, m, expected",
    [
        (PI / 2, ("D", "D"), 1, 2.0),
        (2 * PI, ("N", "N"), 2, 0.5),
        (2 * PI, ("D", "N"), 1, 0.25),
        (2 * PI, ("D", "D"), 1, 0.5),
        (1.5 * PI, ("D", "D"), 1, 2 / 3),
        (1.5 * PI, ("N", "D"), 1, 1 / 3),
        (PI / 2, ("N", "N"), 1, 0.0),
    ],
)
def test_edge_eigenvalues(theta, pair, m, expected):
    assert edge_eigenvalues(theta, pair, [m])[0] == pytest.approx(expected, abs=1e-15)


def test_edge_eigenvalue_errors():
    with pytest.raises(ValueError):
        edge_eigenvalues(0.0, ("D", "D"), [1])
    with pytest.raises(ValueError):
        edge_eigenvalues(7.0, ("D", "D"), [1])
    with pytest.raises(ValueError):
        edge_eigenvalues(1.0, ("D", "X"), [1])
    with pytest.raises(ValueError):
        edge_eigenvalues(1.0, ("D", "D"), [0])


@pytest.mark.parametrize(
    "theta, pair, expected",
    [(PI / 2, "DD", 2.0), (1.5 * PI, "DD", 2 / 3), (PI / 2, "DN", 1.0), (PI / 2, "NN", 2.0)],
)
def test_edge_strip(theta, pair, expected):
    assert edge_strip(theta, tuple(pair)) == pytest.approx((expected, expected))


def test_bc_assignment_sets(lshape):
    bc = BCAssignment(["D", "N", "N"])
    assert bc.J0 == {0} and bc.J1 == {1, 2}
    assert bc.variant == "mixed"
    # face 0 (z = 0) touches edges 1 and 2
    assert bc.jtilde(lshape) == {1, 2}
    assert bc.interface_edges(lshape) == {1, 2}
    with pytest.raises(ValueError):
        BCAssignment(["D", "N"]).jtilde(lshape)


@pytest.fixture(scope="module")
def octant_dirichlet():
    return vertex_eigenvalues(g.octant().cap_mesh(1), BCAssignment.uniform("D", 3), 4, 5)


def test_octant_dirichlet_first_eigenvalue(octant_dirichlet):
    assert octant_dirichlet.lam[0] == pytest.approx(12.0, rel=0.01)
    assert octant_dirichlet.lam_plus[0] == pytest.approx(3.0, rel=0.005)
    assert octant_dirichlet.index_base == 1


def test_hemisphere_dirichlet():
    vs = vertex_eigenvalues(g.hemisphere_cap(1), BCAssignment(["N", "N", "D"]), 3, 5)
    assert vs.lam[0] == pytest.approx(2.0, rel=0.01)
    assert vs.lam_plus[0] == pytest.approx(1.0, rel=0.005)


def test_sphere_spectrum():
    vs = vertex_eigenvalues(g.sphere_cap(1), BCAssignment([]), 5, 5)
    assert vs.lam[0] == pytest.approx(0.0, abs=1e-8)
    np.testing.assert_allclose(vs.lam[1:4], 2.0, rtol=0.01)
    assert vs.index_base == 0


def test_domain_monotonicity(octant_dirichlet):
    hemi = vertex_eigenvalues(g.hemisphere_cap(1), BCAssignment(["N", "N", "D"]), 1, 4)
    assert octant_dirichlet.lam[0] > hemi.lam[0]


def test_pencil_pair_relations(octant_dirichlet):
    lp, lm = pencil_from_lb(octant_dirichlet.lam)
    np.testing.assert_allclose(lp + lm, -1.0, atol=1e-10)
    np.testing.assert_allclose(lp * lm, -octant_dirichlet.lam, rtol=1e-10)
    assert np.all(lp >= -0.5)


def test_mesh_convergence_second_order():
    cap = g.octant().cap_mesh(1)
    bc = BCAssignment.uniform("D", 3)
    vals = [cap_eigenpairs(cap.refined(2**r), bc, 1).values[0] for r in (3, 4, 5, 6)]
    assert np.all(np.diff(vals) < 0)
    d = -np.diff(vals)
    ratios = d[:-1] / d[1:]
    assert np.all((ratios > 2.5) & (ratios < 6))


def test_neumann_constant_mode():
    cap = g.octant().cap_mesh(8)
    eig = cap_eigenpairs(cap, BCAssignment.uniform("N", 3), 3)
    assert eig.values[0] == pytest.approx(0.0, abs=1e-9)
    v0 = eig.vectors[:, 0]
    assert np.ptp(v0 / v0[0]) < 1e-8
    from conebesov.pencil import assemble_lb

    _, M = assemble_lb(cap)
    for k in (1, 2):
        assert abs(v0 @ (M @ eig.vectors[:, k])) < 1e-8


def test_strip_free_check(octant_dirichlet):
    ok = strip_free_check(2, 0.0, octant_dirichlet)
    assert ok.ok and ok.nearest == pytest.approx(3.0, rel=1e-3)
    bad = strip_free_check(2, -2.5, octant_dirichlet)
    assert not bad.ok and bad.line == 3.0
    with pytest.raises(SpectrumRangeError):
        strip_free_check(2, -40.0, octant_dirichlet)


def test_strip_hemisphere_hits_eigenvalue():
    vs = vertex_eigenvalues(g.hemisphere_cap(1), BCAssignment(["N", "N", "D"]), 3, 4)
    # beta = -0.5 puts the line at 2 - (-0.5) - 3/2 = 1 = Lambda_+
    assert not strip_free_check(2, -0.5, vs).ok
    assert strip_free_check(2, 0.5, vs).ok


def test_pencil_spectrum_tables(lshape):
    spec = pencil_spectrum(lshape, BCAssignment.uniform("D", 3), count=3, refinements=3)
    rows = spec.table_edges()
    assert rows[0]["theta"] == pytest.approx(1.5 * PI)
    assert rows[0]["delta_plus"] == pytest.approx(2 / 3)
    assert len(spec.table_vertex()) == 3
