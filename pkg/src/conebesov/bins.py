"""Axis-aligned boxes against truncated cones: intersection tests, distances
to the vertex and edges, and dyadic distance bins."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .geometry import TruncatedCone
from .wavelets import DETAIL_TYPES, CoeffField

_EPS = 1e-12


# ---------------------------------------------------------------------------
# distances


def box_vertex_distance(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Distance from the origin to boxes [lo, hi] (arrays of shape (..., 3))."""
    d = np.maximum(np.maximum(lo, -hi), 0.0)
    return np.sqrt(np.sum(d * d, axis=-1))


def _excess_sq(t, lo, hi, e):
    x = t[..., None] * e
    d = np.maximum(np.maximum(lo - x, x - hi), 0.0)
    return np.sum(d * d, axis=-1)


def box_ray_distance(lo: np.ndarray, hi: np.ndarray, e: np.ndarray) -> np.ndarray:
    """min over x in the box of the distance from x to the ray {t e, t >= 0}.

    The squared distance along the ray is a convex piecewise quadratic in t;
    it is minimized exactly on each piece between consecutive breakpoints.
    """
    e = np.asarray(e, float)
    e = e / np.linalg.norm(e)
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    shape = lo.shape[:-1]
    lo2, hi2 = lo.reshape(-1, 3), hi.reshape(-1, 3)
    bps = [np.zeros(len(lo2))]
    for i in range(3):
        if abs(e[i]) > _EPS:
            bps += [lo2[:, i] / e[i], hi2[:, i] / e[i]]
    B = np.sort(np.maximum(np.stack(bps, axis=1), 0.0), axis=1)
    right = np.concatenate([B[:, 1:], B[:, -1:] + 1.0], axis=1)
    best = np.min(
        np.stack([_excess_sq(B[:, c], lo2, hi2, e) for c in range(B.shape[1])], axis=1), axis=1
    )
    for c in range(B.shape[1]):
        a, b = B[:, c], right[:, c]
        last = c == B.shape[1] - 1
        tm = 0.5 * (a + b)
        x = tm[:, None] * e
        below, above = x < lo2, x > hi2
        tgt = np.where(below, lo2, np.where(above, hi2, 0.0))
        act = below | above
        num = np.sum(np.where(act, e * tgt, 0.0), axis=1)
        den = np.sum(np.where(act, e * e, 0.0), axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            ts = np.where(den > 0, num / np.where(den > 0, den, 1.0), a)
        ts = np.maximum(ts, a) if last else np.clip(ts, a, b)
        best = np.minimum(best, _excess_sq(ts, lo2, hi2, e))
    return np.sqrt(best).reshape(shape)


def box_ray_max_distance(lo: np.ndarray, hi: np.ndarray, e: np.ndarray) -> np.ndarray:
    """max over x in the box of the distance to the ray (attained at a corner)."""
    e = np.asarray(e, float)
    e = e / np.linalg.norm(e)
    out = None
    for cx in (0, 1):
        for cy in (0, 1):
            for cz in (0, 1):
                sel = np.array([cx, cy, cz], bool)
                x = np.where(sel, hi, lo)
                t = np.maximum(x @ e, 0.0)
                d = np.linalg.norm(x - t[..., None] * e, axis=-1)
                out = d if out is None else np.maximum(out, d)
    return out


# ---------------------------------------------------------------------------
# box / cone intersection (positive-volume overlap)


@dataclass(frozen=True, eq=False)
class ConvexPiece:
    generators: np.ndarray  # (m, 3) rays in cyclic order
    normals: np.ndarray  # (m, 3) outward face normals

    @classmethod
    def from_generators(cls, gens: np.ndarray) -> "ConvexPiece":
        gens = np.asarray(gens, float)
        c = gens.sum(axis=0)
        nrm = []
        for i in range(len(gens)):
            n = np.cross(gens[(i + 1) % len(gens)], gens[i])
            n /= np.linalg.norm(n)
            nrm.append(n if n @ c < 0 else -n)
        return cls(gens, np.array(nrm))

    @property
    def axes(self) -> np.ndarray:
        ex = np.eye(3)
        cr = [np.cross(a, g) for a in ex for g in self.generators]
        cr = [v / np.linalg.norm(v) for v in cr if np.linalg.norm(v) > 1e-12]
        return np.vstack([ex, self.normals] + ([np.array(cr)] if cr else []))


def cone_pieces(tk: TruncatedCone) -> list[ConvexPiece]:
    return [ConvexPiece.from_generators(g) for g in tk.cone.convex_pieces]


def _separated(c, h, axes, gens):
    """Boolean (M,) : some axis separates the boxes from the piece."""
    sep = np.zeros(len(c), bool)
    for a in axes:
        s = gens @ a
        s = np.where(np.abs(s) < 1e-12, 0.0, s)
        mid = c @ a
        rad = h @ np.abs(a)
        if np.all(s >= 0):
            sep |= mid + rad <= _EPS
        elif np.all(s <= 0):
            sep |= mid - rad >= -_EPS
    return sep


def boxes_meet_cone(lo: np.ndarray, hi: np.ndarray, pieces: list[ConvexPiece]) -> np.ndarray:
    """True where the open cone meets the box interior."""
    shape = lo.shape[:-1]
    c = (0.5 * (lo + hi)).reshape(-1, 3)
    h = (0.5 * (hi - lo)).reshape(-1, 3)
    out = np.zeros(len(c), bool)
    for pc in pieces:
        todo = ~out
        cc, hh = c[todo], h[todo]
        inside = np.all(cc @ pc.normals.T < -_EPS, axis=1)
        # cheap rejection by face planes, then the full separating-axis test
        far = _separated(cc, hh, pc.normals, pc.generators)
        amb = ~inside & ~far
        hit = inside.copy()
        if np.any(amb):
            hit[amb] = ~_separated(cc[amb], hh[amb], pc.axes, pc.generators)
        out[np.flatnonzero(todo)[hit]] = True
    return out.reshape(shape)


def boxes_meet_truncated(lo: np.ndarray, hi: np.ndarray, tk: TruncatedCone,
                         pieces: list[ConvexPiece] | None = None) -> np.ndarray:
    """Box meets the truncated cone; the ball condition uses dist(box, 0) < R."""
    near = box_vertex_distance(lo, hi) < tk.radius
    out = np.zeros(near.shape, bool)
    if np.any(near):
        out[near] = boxes_meet_cone(lo[near], hi[near], pieces or cone_pieces(tk))
    return out


# ---------------------------------------------------------------------------
# classification


VERTEX, INTERIOR, EDGE = "vertex", "interior", "edge"


@dataclass
class LevelBins:
    j: int
    flat_index: np.ndarray  # positions (into the level's spatial grid) meeting K~
    k: np.ndarray
    m: np.ndarray  # shape (n,) or (n, 2) for split sign patterns
    r_bin: np.ndarray  # bin of the plain edge distance r_I
    multiplicity: int = len(DETAIL_TYPES)

    @property
    def family(self) -> np.ndarray:
        return np.where(self.k == 0, VERTEX, np.where(self.r_bin >= 1, INTERIOR, EDGE))


@dataclass
class IndexBins:
    levels: dict[int, LevelBins] = field(default_factory=dict)
    split: bool = False

    def counts(self) -> dict[tuple, int]:
        out: Counter = Counter()
        for j, lb in self.levels.items():
            keys = np.column_stack([lb.k, lb.m if lb.m.ndim == 2 else lb.m[:, None]])
            u, n = np.unique(keys, axis=0, return_counts=True)
            for row, c in zip(u, n):
                key = (j, int(row[0])) + (
                    (tuple(int(v) for v in row[1:]),) if self.split else (int(row[1]),)
                )
                out[key] += int(c) * lb.multiplicity
        return dict(out)

    def family_counts(self) -> dict[tuple[int, str], int]:
        out: Counter = Counter()
        for j, lb in self.levels.items():
            f, n = np.unique(lb.family, return_counts=True)
            for a, b in zip(f, n):
                out[(j, str(a))] += int(b) * lb.multiplicity
        return dict(out)

    def total(self) -> int:
        return sum(len(lb.k) * lb.multiplicity for lb in self.levels.values())

    def members(self, j: int, k: int, m) -> np.ndarray:
        lb = self.levels[j]
        sel = lb.k == k
        if self.split:
            sel &= np.all(lb.m == np.asarray(m), axis=1)
        else:
            sel &= lb.m == m
        return lb.flat_index[sel]


def _bin(x: np.ndarray, j: int, side: float) -> np.ndarray:
    v = np.floor(x * 2.0**j / side + 1e-12)
    return np.where(np.isfinite(v), v, -1).astype(np.int64)


def split_edge_distances(lo, hi, edges: np.ndarray, delta) -> tuple[np.ndarray, np.ndarray]:
    """(r_I^+, r_I^-): nearest edge with delta >= 0, farthest point relative to
    the edges with delta < 0 (inf / 0 when the respective set is empty)."""
    delta = np.asarray(delta, float)
    rp = np.full(lo.shape[:-1], np.inf)
    rm = np.zeros(lo.shape[:-1])
    for e, d in zip(edges, delta):
        if d >= 0:
            rp = np.minimum(rp, box_ray_distance(lo, hi, e))
        else:
            rm = np.maximum(rm, box_ray_max_distance(lo, hi, e))
    return rp, rm


def kmask(cf: CoeffField, tk: TruncatedCone) -> dict:
    """Boolean spatial masks (per level and for P0) of supports meeting K~."""
    pieces = cone_pieces(tk)
    out = {"approx": boxes_meet_truncated(*cf.support_boxes(cf.j0, approx=True), tk, pieces)}
    for j in cf.levels:
        out[j] = boxes_meet_truncated(*cf.support_boxes(j), tk, pieces)
    return out


def classify(cf: CoeffField, tk: TruncatedCone, delta_signs=None,
             masks: dict | None = None) -> IndexBins:
    """Bin wavelet coefficients whose support meets K~ by (j, k, m)."""
    edges = tk.cone.edges
    split = delta_signs is not None and len({np.sign(d) >= 0 for d in delta_signs}) > 1
    masks = masks or kmask(cf, tk)
    bins = IndexBins(split=split)
    for j in cf.levels:
        lo, hi = cf.support_boxes(j)
        idx = np.flatnonzero(masks[j])
        lo, hi = lo.reshape(-1, 3)[idx], hi.reshape(-1, 3)[idx]
        rho = box_vertex_distance(lo, hi)
        r = _bin(np.min([box_ray_distance(lo, hi, e) for e in edges], axis=0), j, cf.side)
        m = r
        if split:
            rp, rm = split_edge_distances(lo, hi, edges, delta_signs)
            m = np.column_stack([_bin(rp, j, cf.side), _bin(rm, j, cf.side)])
        bins.levels[j] = LevelBins(j, idx, _bin(rho, j, cf.side), m, r)
    return bins


# ---------------------------------------------------------------------------
# lattice-cube cardinalities


@dataclass
class CardinalityTable:
    j: int
    by_k: dict[int, int]
    by_km: dict[tuple[int, int], int]

    def sup_k_ratio(self, kmin: int = 2, kmax: int | None = None) -> float:
        kmax = kmax if kmax is not None else 2 ** (self.j - 1)
        vals = [c / k**2 for k, c in self.by_k.items() if kmin <= k <= kmax]
        return max(vals) if vals else 0.0

    def sup_m_ratio(self, kmin: int = 4, kmax: int | None = None) -> float:
        kmax = kmax if kmax is not None else 2 ** (self.j - 1)
        vals = [c / m for (k, m), c in self.by_km.items() if kmin <= k <= kmax and m >= 1]
        return max(vals) if vals else 0.0


def bin_cardinalities(tk: TruncatedCone, j: int) -> CardinalityTable:
    """Count lattice cubes of side 2^-j meeting K~ in each (k, m) distance bin."""
    if j < 1:
        raise ValueError("j must be >= 1")
    h = 2.0**-j
    R = tk.radius
    i0, i1 = int(np.floor(-R / h)), int(np.ceil(R / h))
    ticks = np.arange(i0, i1) * h
    pieces = cone_pieces(tk)
    by_k: Counter = Counter()
    by_km: Counter = Counter()
    Y, Z = np.meshgrid(ticks, ticks, indexing="ij")
    for x in ticks:
        lo = np.stack([np.full_like(Y, x), Y, Z], axis=-1).reshape(-1, 3)
        hi = lo + h
        meet = boxes_meet_truncated(lo, hi, tk, pieces)
        if not np.any(meet):
            continue
        lo, hi = lo[meet], hi[meet]
        k = _bin(box_vertex_distance(lo, hi), j, 1.0)
        r = np.min([box_ray_distance(lo, hi, e) for e in tk.cone.edges], axis=0)
        m = _bin(r, j, 1.0)
        by_k.update(k.tolist())
        by_km.update(zip(k.tolist(), m.tolist()))
    return CardinalityTable(j, dict(by_k), dict(by_km))
