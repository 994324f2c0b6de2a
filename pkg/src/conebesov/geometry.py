"""Polyhedral cones in R^3, their truncations and spherical caps.

A cone is given by unit edge directions and a cyclic list of faces.  Each
face stores an ordered edge pair ``(a, b)`` and its outward unit normal; the
boundary arc of the cap runs from ``e_a`` to ``e_b`` with the cap on the left
when seen from outside the sphere.  Edge indices are 0-based throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

TWO_PI = 2.0 * np.pi


class GeometryError(ValueError):
    """Raised when cone data violate a structural invariant."""


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise GeometryError("zero vector where a direction was expected")
    return v / nrm


@dataclass(frozen=True, eq=False)
class Face:
    edges: tuple[int, int]
    normal: np.ndarray


@dataclass(frozen=True, eq=False)
class Arc:
    """Great-circle arc p -> p cos t + (axis x p) sin t, t in [0, angle]."""

    start: np.ndarray
    axis: np.ndarray
    angle: float

    def point(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        return self.start * np.cos(t) + np.cross(self.axis, self.start) * np.sin(t)

    def param(self, x: np.ndarray) -> np.ndarray:
        """Angle parameter of points x on the arc's circle, in [0, 2pi)."""
        u = np.cross(self.axis, self.start)
        return np.mod(np.arctan2(x @ u, x @ self.start), TWO_PI)


def _rotation_angle(a: np.ndarray, b: np.ndarray, axis: np.ndarray) -> float:
    ang = np.arctan2(axis @ np.cross(a, b), a @ b)
    return float(np.mod(ang, TWO_PI))


def _arcs_intersect(a1: Arc, a2: Arc, tol: float = 1e-9) -> bool:
    c = np.cross(a1.axis, a2.axis)
    if np.linalg.norm(c) < 1e-12:
        return False
    c = c / np.linalg.norm(c)
    for cand in (c, -c):
        t1 = a1.param(cand)
        t2 = a2.param(cand)
        if tol < t1 < a1.angle - tol and tol < t2 < a2.angle - tol:
            return True
    return False


@dataclass(frozen=True, eq=False)
class PolyhedralCone:
    edges: np.ndarray
    faces: tuple[Face, ...]
    name: str = "cone"

    def __init__(self, edges, faces, name: str = "cone"):
        e = np.array([_unit(v) for v in edges], dtype=float)
        fs = []
        for f in faces:
            if isinstance(f, Face):
                pair, nrm = f.edges, f.normal
            elif isinstance(f, dict):
                pair, nrm = f["edges"], f["normal"]
            else:
                pair, nrm = f
            fs.append(Face((int(pair[0]), int(pair[1])), _unit(nrm)))
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "faces", tuple(fs))
        object.__setattr__(self, "name", name)
        self._validate()

    # --- structure -------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.edges)

    def _validate(self) -> None:
        n = self.n
        if n < 3:
            raise GeometryError("a polyhedral cone needs at least 3 edges")
        if len(self.faces) != n:
            raise GeometryError("face count must equal edge count (single adjacency cycle)")
        for f in self.faces:
            a, b = f.edges
            if not (0 <= a < n and 0 <= b < n) or a == b:
                raise GeometryError(f"face edge pair {f.edges} is invalid")
            for k in (a, b):
                if abs(self.edges[k] @ f.normal) > 1e-10:
                    raise GeometryError(
                        f"edge {k} is not orthogonal to the normal of face {f.edges}"
                    )
        starts = [f.edges[0] for f in self.faces]
        ends = [f.edges[1] for f in self.faces]
        if sorted(starts) != list(range(n)) or sorted(ends) != list(range(n)):
            raise GeometryError(
                "each edge must start exactly one face and end exactly one face"
            )
        # the adjacency graph must be one cycle of length n
        nxt = {f.edges[0]: f.edges[1] for f in self.faces}
        seen, k = set(), 0
        while k not in seen:
            seen.add(k)
            k = nxt[k]
        if len(seen) != n:
            raise GeometryError("face/edge adjacency graph is not a single cycle")
        for j in range(n):
            th = self.edge_angle(j)
            if abs(th - np.pi) < 1e-9:
                raise GeometryError(f"edge {j} is flat (dihedral angle pi)")
            if th <= 1e-12 or th >= TWO_PI - 1e-12:
                raise GeometryError(f"edge {j} has a degenerate dihedral angle")
        arcs = self.arcs
        for i in range(n):
            for k in range(i + 1, n):
                if _arcs_intersect(arcs[i], arcs[k]):
                    raise GeometryError(
                        "boundary arcs cross; faces must be oriented counter-clockwise "
                        "seen from outside with outward normals"
                    )
        area = self.cap_area
        if not 0.0 < area < 4.0 * np.pi:
            raise GeometryError("spherical cap has non-physical area")

    @cached_property
    def arcs(self) -> tuple[Arc, ...]:
        out = []
        for f in self.faces:
            a, b = f.edges
            axis = -f.normal
            ang = _rotation_angle(self.edges[a], self.edges[b], axis)
            if ang <= 1e-12:
                raise GeometryError(f"face {f.edges} has a zero-length arc")
            out.append(Arc(self.edges[a], axis, ang))
        return tuple(out)

    def _faces_at(self, j: int) -> tuple[int, int]:
        """(incoming face index, outgoing face index) at edge j."""
        inc = next(i for i, f in enumerate(self.faces) if f.edges[1] == j)
        out = next(i for i, f in enumerate(self.faces) if f.edges[0] == j)
        return inc, out

    def adjacent_faces(self, j: int) -> tuple[int, int]:
        self._check_index(j)
        return self._faces_at(j)

    def _check_index(self, j: int) -> None:
        if not (isinstance(j, (int, np.integer)) and 0 <= j < self.n):
            raise IndexError(f"edge index {j} out of range 0..{self.n - 1}")

    # --- angles ----------------------------------------------------------

    def edge_angle(self, j: int) -> float:
        """Interior dihedral angle at edge j, in (0, 2pi)."""
        self._check_index(j)
        v = self.edges[j]
        i_in, i_out = self._faces_at(j)
        t_in = np.cross(v, self.faces[i_in].normal)
        t_out = np.cross(v, self.faces[i_out].normal)
        turn = np.arctan2(v @ np.cross(t_in, t_out), t_in @ t_out)
        return float(np.pi - turn)

    @cached_property
    def angles(self) -> np.ndarray:
        return np.array([self.edge_angle(j) for j in range(self.n)])

    @cached_property
    def is_convex(self) -> bool:
        return bool(np.all(self.angles < np.pi))

    @property
    def convexity_flag(self) -> bool:
        return self.is_convex

    @cached_property
    def cap_area(self) -> float:
        # Gauss-Bonnet for a geodesic polygon
        return float(np.sum(self.angles) - (self.n - 2) * np.pi)

    # --- distances -------------------------------------------------------

    @staticmethod
    def distance_to_vertex(x) -> np.ndarray | float:
        x = np.asarray(x, dtype=float)
        d = np.linalg.norm(x, axis=-1)
        return float(d) if d.ndim == 0 else d

    def distance_to_edge(self, x, j: int):
        self._check_index(j)
        x = np.asarray(x, dtype=float)
        e = self.edges[j]
        t = np.maximum(x @ e, 0.0)
        d = np.linalg.norm(x - t[..., None] * e, axis=-1)
        return float(d) if d.ndim == 0 else d

    def edge_distances(self, x) -> np.ndarray:
        """Array (..., n) of distances to all edge rays."""
        x = np.asarray(x, dtype=float)
        t = np.maximum(x @ self.edges.T, 0.0)
        sq = np.sum(x * x, axis=-1)[..., None] - 2 * t * (x @ self.edges.T) + t * t
        return np.sqrt(np.maximum(sq, 0.0))

    def min_singular_distance(self, x):
        d = np.minimum(1.0, np.min(self.edge_distances(x), axis=-1))
        return float(d) if np.ndim(d) == 0 else d

    # --- membership ------------------------------------------------------

    @cached_property
    def _normals(self) -> np.ndarray:
        return np.array([f.normal for f in self.faces])

    @cached_property
    def interior_point(self) -> np.ndarray:
        """A unit direction just inside the cap, next to face 0, placed off symmetry planes."""
        arc = self.arcs[0]
        return _unit(arc.point(0.3819660113 * arc.angle) - 1.3e-5 * self.faces[0].normal)

    def _crossings(self, c: np.ndarray, w: np.ndarray) -> np.ndarray:
        c = np.broadcast_to(c, w.shape)
        ax = np.cross(c, w)
        nax = np.linalg.norm(ax, axis=-1)
        good = nax > 1e-14
        ax = np.where(good[:, None], ax / np.where(good, nax, 1.0)[:, None], 0.0)
        len_cw = np.arctan2(nax, np.sum(c * w, axis=-1))
        count = np.zeros(len(w), dtype=int)
        for arc in self.arcs:
            cr = np.cross(ax, arc.axis)
            ncr = np.linalg.norm(cr, axis=-1)
            ok = good & (ncr > 1e-14)
            cr = cr / np.where(ok, ncr, 1.0)[:, None]
            for sgn in (1.0, -1.0):
                p = sgn * cr
                t_arc = arc.param(p)
                u = np.cross(ax, c)
                t_cw = np.mod(np.arctan2(np.sum(p * u, axis=-1), np.sum(p * c, axis=-1)), TWO_PI)
                hit = ok & (t_arc > 0) & (t_arc < arc.angle) & (t_cw > 0) & (t_cw < len_cw)
                count += hit
        return count

    def contains(self, x):
        """Membership of x in the open cone (apex excluded)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        xs = np.atleast_2d(x)
        r = np.linalg.norm(xs, axis=-1)
        nz = r > 0
        out = np.zeros(len(xs), dtype=bool)
        if self.is_convex:
            out = nz & np.all(xs @ self._normals.T < 0.0, axis=-1)
        elif np.any(nz):
            w = xs[nz] / r[nz, None]
            inside = self._crossings(self.interior_point[None, :], w) % 2 == 0
            on_face = np.zeros(len(w), dtype=bool)
            for f, arc in zip(self.faces, self.arcs):
                on_face |= (np.abs(w @ f.normal) < 1e-12) & (arc.param(w) <= arc.angle + 1e-12)
            out[nz] = inside & ~on_face
        return bool(out[0]) if single else out

    # --- spherical cap ---------------------------------------------------

    def boundary_polygon(self, max_arc: float = np.pi / 2) -> tuple[np.ndarray, np.ndarray]:
        """Cap boundary vertices in order, arcs split to length <= max_arc.

        Returns (points, face label of the arc leaving each point).
        """
        order = []
        k = self.faces[0].edges[0]
        for _ in range(self.n):
            i = next(i for i, f in enumerate(self.faces) if f.edges[0] == k)
            order.append(i)
            k = self.faces[i].edges[1]
        pts, labels = [], []
        for i in order:
            arc = self.arcs[i]
            pieces = max(1, int(np.ceil(arc.angle / max_arc - 1e-12)))
            for s in range(pieces):
                pts.append(arc.point(arc.angle * s / pieces))
                labels.append(i)
        return np.array(pts), np.array(labels)

    def cap_mesh(self, resolution: int) -> "SphericalCap":
        return cap_mesh(self, resolution)

    def truncate(self, radius: float) -> "TruncatedCone":
        return TruncatedCone(self, radius)

    @cached_property
    def convex_pieces(self) -> tuple[np.ndarray, ...]:
        """Convex sub-cones covering the cone, as arrays of generator rays."""
        if self.is_convex:
            return (self.edges.copy(),)
        pts, tris = _base_triangulation(self)
        return tuple(pts[t] for t in _orient(pts, tris))


@dataclass(frozen=True)
class TruncatedCone:
    cone: PolyhedralCone
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise GeometryError("truncation radius must be positive")

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        inside = self.cone.contains(x)
        return inside & (np.linalg.norm(x, axis=-1) < self.radius)


# ---------------------------------------------------------------------------
# spherical cap meshes


@dataclass
class SphericalCap:
    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray  # (m, 2) vertex pairs
    boundary_labels: np.ndarray  # face index per boundary edge
    resolution: int = 1
    source: object = field(default=None, repr=False)

    def refined(self, resolution: int) -> "SphericalCap":
        if self.source is None:
            raise GeometryError("cap has no source geometry to remesh")
        return _mesh_source(self.source, resolution)

    def triangle_areas(self, spherical: bool = True) -> np.ndarray:
        a, b, c = (self.vertices[self.triangles[:, i]] for i in range(3))
        if not spherical:
            return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
        # Van Oosterom-Strackee solid angle
        num = np.abs(np.einsum("ij,ij->i", a, np.cross(b, c)))
        den = 1 + np.einsum("ij,ij->i", a, b) + np.einsum("ij,ij->i", b, c) + np.einsum(
            "ij,ij->i", c, a
        )
        return 2 * np.arctan2(num, den)

    @property
    def area(self) -> float:
        """Summed flat-triangle area of the mesh."""
        return float(np.sum(self.triangle_areas(spherical=False)))

    @property
    def spherical_area(self) -> float:
        return float(np.sum(self.triangle_areas(spherical=True)))

    def max_edge_length(self) -> float:
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        d = self.vertices[e[:, 0]] - self.vertices[e[:, 1]]
        return float(np.max(np.linalg.norm(d, axis=1)))

    def boundary_vertices(self, labels=None) -> np.ndarray:
        mask = np.ones(len(self.boundary_labels), dtype=bool)
        if labels is not None:
            mask = np.isin(self.boundary_labels, list(labels))
        return np.unique(self.boundary_edges[mask].ravel())


def _merge_vertices(points: np.ndarray, tris: np.ndarray, tol: float = 1e-9):
    tree = cKDTree(points)
    pairs = tree.query_pairs(tol, output_type="ndarray")
    parent = np.arange(len(points))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(len(points))])
    uniq, inv = np.unique(roots, return_inverse=True)
    return points[uniq], inv[tris]


def _subdivide(base: np.ndarray, base_tris: np.ndarray, k: int):
    """Split each flat triangle k x k on its barycentric lattice and project."""
    pts, tris = [], []
    offset = 0
    idx = {}
    for i in range(k + 1):
        for j in range(k + 1 - i):
            idx[(i, j)] = len(idx)
    local = []
    for i in range(k):
        for j in range(k - i):
            local.append((idx[(i, j)], idx[(i + 1, j)], idx[(i, j + 1)]))
            if j < k - i - 1:
                local.append((idx[(i + 1, j)], idx[(i + 1, j + 1)], idx[(i, j + 1)]))
    local = np.array(local)
    bary = np.array([[k - i - j, i, j] for (i, j) in idx]) / k
    for t in base_tris:
        p = bary @ base[t]
        p /= np.linalg.norm(p, axis=1, keepdims=True)
        pts.append(p)
        tris.append(local + offset)
        offset += len(p)
    return _merge_vertices(np.concatenate(pts), np.concatenate(tris))


def _boundary_of(tris: np.ndarray) -> np.ndarray:
    e = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    key = np.sort(e, axis=1)
    _, inv, cnt = np.unique(key, axis=0, return_inverse=True, return_counts=True)
    return e[cnt[inv.ravel()] == 1]


def _orient(vertices: np.ndarray, tris: np.ndarray) -> np.ndarray:
    a, b, c = (vertices[tris[:, i]] for i in range(3))
    s = np.einsum("ij,ij->i", a, np.cross(b, c))
    if np.any(np.abs(s) < 1e-14):
        raise GeometryError("degenerate triangle in cap mesh")
    tris = tris.copy()
    flip = s < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    return tris


def _base_triangulation(cone: PolyhedralCone):
    poly, _ = cone.boundary_polygon()
    m = len(poly)
    if cone.is_convex and all(a.angle < np.pi for a in cone.arcs):
        corners, _ = cone.boundary_polygon(max_arc=np.inf)
        tris = np.array([[0, i, i + 1] for i in range(1, len(corners) - 1)])
        return corners, tris
    # fan from a centroid direction (vector-area formula); fall back to
    # other interior directions when the cap is not star-shaped about it
    acc = np.zeros(3)
    for arc in cone.arcs:
        acc += arc.axis * arc.angle
    for c in _fan_centres(cone, _unit(0.5 * acc)):
        if _fan_closes(c, poly):
            pts = np.vstack([c[None, :], poly])
            tris = np.array([[0, 1 + i, 1 + (i + 1) % m] for i in range(m)])
            return pts, tris
    raise GeometryError("cap is not star-shaped about any sampled interior direction")


def _fan_centres(cone: PolyhedralCone, centroid: np.ndarray):
    if cone.contains(centroid):
        yield centroid
    k = np.arange(4000) + 0.5
    z = 1 - 2 * k / len(k)
    phi = np.pi * (1 + 5**0.5) * k
    rr = np.sqrt(1 - z * z)
    cand = np.stack([rr * np.cos(phi), rr * np.sin(phi), z], axis=1)
    cand = cand[cone.contains(cand)]
    # prefer directions far from the boundary
    if len(cand):
        yield from cand[np.argsort(-(cand @ centroid))]


def _fan_closes(c: np.ndarray, poly: np.ndarray) -> bool:
    m = len(poly)
    total = 0.0
    for i in range(m):
        a, b = poly[i], poly[(i + 1) % m]
        if a @ c < -0.999 or b @ c < -0.999:
            return False
        ta, tb = np.cross(c, a), np.cross(c, b)
        ang = np.arctan2(c @ np.cross(ta, tb), ta @ tb)
        if ang <= 1e-9 or np.linalg.det(np.array([c, a, b])) <= 1e-12:
            return False
        total += ang
    return abs(total - TWO_PI) < 1e-8


def _label_boundary(cone: PolyhedralCone | None, vertices, bedges, face_planes=None):
    if cone is None and face_planes is None:
        return np.zeros(0, dtype=int)
    mids = vertices[bedges[0:, 0]] + vertices[bedges[:, 1]]
    mids /= np.linalg.norm(mids, axis=1, keepdims=True)
    labels = np.full(len(bedges), -1, dtype=int)
    if cone is not None:
        for i, (f, arc) in enumerate(zip(cone.faces, cone.arcs)):
            on = np.abs(mids @ f.normal) < 1e-8
            t = arc.param(mids)
            on &= t < arc.angle + 1e-9
            labels[on & (labels < 0)] = i
    else:
        for i, nrm in enumerate(face_planes):
            on = np.abs(mids @ nrm) < 1e-8
            labels[on & (labels < 0)] = i
    if np.any(labels < 0):
        raise GeometryError("a boundary edge of the cap mesh lies on no face")
    return labels


def _presplit(points: np.ndarray, tris: np.ndarray, max_angle: float = np.pi / 2 + 1e-9):
    """Uniformly midpoint-split base triangles until every edge spans at most
    max_angle (whole rounds keep the mesh conforming)."""
    while True:
        e = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
        cosang = np.einsum("ij,ij->i", points[e[:, 0]], points[e[:, 1]])
        if np.all(np.arccos(np.clip(cosang, -1, 1)) <= max_angle):
            return points, tris
        pts = list(points)
        mid = {}

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in mid:
                pts.append(_unit(points[a] + points[b]))
                mid[key] = len(pts) - 1
            return mid[key]

        new = []
        for a, b, c in tris:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
        points, tris = np.array(pts), np.array(new)


def cap_mesh(cone: PolyhedralCone, resolution: int) -> SphericalCap:
    if int(resolution) < 1:
        raise ValueError("resolution must be >= 1")
    base, btris = _presplit(*_base_triangulation(cone))
    v, t = _subdivide(base, btris, int(resolution))
    t = _orient(v, t)
    be = _boundary_of(t)
    labels = _label_boundary(cone, v, be)
    return SphericalCap(v, t, be, labels, int(resolution), cone)


_OCTANT_SIGNS = [
    (sx, sy, sz) for sx in (1, -1) for sy in (1, -1) for sz in (1, -1)
]


@dataclass(frozen=True)
class OctantUnion:
    """Region of the sphere made of whole coordinate octants."""

    signs: tuple[tuple[int, int, int], ...]
    name: str = "octants"


def _mesh_octants(src: OctantUnion, resolution: int) -> SphericalCap:
    base, tris = [], []
    for s in src.signs:
        i0 = len(base)
        base += [np.array([s[0], 0, 0.0]), np.array([0, s[1], 0.0]), np.array([0, 0, s[2] * 1.0])]
        tris.append([i0, i0 + 1, i0 + 2])
    base = np.array(base)
    v, t = _subdivide(base, np.array(tris), int(resolution))
    t = _orient(v, t)
    be = _boundary_of(t)
    if len(be):
        planes = np.eye(3)
        labels = _label_boundary(None, v, be, face_planes=planes)
    else:
        labels = np.zeros(0, dtype=int)
    return SphericalCap(v, t, be, labels, int(resolution), src)


def _mesh_source(src, resolution: int) -> SphericalCap:
    if isinstance(src, PolyhedralCone):
        return cap_mesh(src, resolution)
    if isinstance(src, OctantUnion):
        return _mesh_octants(src, resolution)
    raise GeometryError(f"unknown cap source {src!r}")


def hemisphere_cap(resolution: int) -> SphericalCap:
    """Upper hemisphere; its boundary (the equator) carries label 2 (plane z=0)."""
    src = OctantUnion(tuple(s for s in _OCTANT_SIGNS if s[2] > 0), "hemisphere")
    return _mesh_octants(src, resolution)


def sphere_cap(resolution: int) -> SphericalCap:
    """The whole unit sphere (no boundary)."""
    return _mesh_octants(OctantUnion(tuple(_OCTANT_SIGNS), "sphere"), resolution)


# ---------------------------------------------------------------------------
# preset cones


def octant() -> PolyhedralCone:
    ex, ey, ez = np.eye(3)
    return PolyhedralCone(
        [ex, ey, ez],
        [((0, 1), -ez), ((1, 2), -ex), ((2, 0), -ey)],
        name="octant",
    )


def l_shape() -> PolyhedralCone:
    """Upper half-space minus the quadrant x > 0, y < 0: reentrant edge along +z."""
    ex, ey, ez = np.eye(3)
    return PolyhedralCone(
        [ez, ex, -ey],
        [((1, 2), -ez), ((2, 0), ex), ((0, 1), -ey)],
        name="l_shape",
    )


def fichera_complement() -> PolyhedralCone:
    """Complement of the closed negative octant: three reentrant edges."""
    ex, ey, ez = np.eye(3)
    return PolyhedralCone(
        [-ex, -ey, -ez],
        [((0, 1), -ez), ((1, 2), -ex), ((2, 0), -ey)],
        name="fichera_complement",
    )


def wedge_cone(theta: float, tilt: float = 1.0) -> PolyhedralCone:
    """Cone with edge +z of dihedral angle theta between the half-planes
    phi = 0 and phi = theta, closed by a plane through the origin below."""
    ez = np.array([0.0, 0.0, 1.0])
    e1 = _unit([1.0, 0.0, -tilt])
    e2 = _unit([np.cos(theta), np.sin(theta), -tilt])
    n_cut = _unit(np.cross(e1, e2))
    if n_cut @ ez > 0:
        n_cut = -n_cut
    return PolyhedralCone(
        [ez, e1, e2],
        [((0, 1), [0.0, -1.0, 0.0]), ((1, 2), n_cut), ((2, 0), [-np.sin(theta), np.cos(theta), 0.0])],
        name=f"wedge({theta:.6g})",
    )


PRESETS = {
    "octant": octant,
    "l_shape": l_shape,
    "fichera_complement": fichera_complement,
}


def cone_from_config(block: dict) -> TruncatedCone:
    """Build a truncated cone from a geometry config block."""
    radius = float(block.get("truncation_radius", 1.0))
    if "preset" in block:
        name = block["preset"]
        if name not in PRESETS:
            raise GeometryError(f"unknown geometry preset {name!r}")
        return TruncatedCone(PRESETS[name](), radius)
    cone = PolyhedralCone(block["edges"], block["faces"], name=block.get("name", "cone"))
    return TruncatedCone(cone, radius)
