"""Mixed-weight Sobolev norms on truncated cones by graded quadrature.

The truncated cone is split into dyadic radial shells times angular cells on
the cap.  Angular cells touching an edge direction are split recursively
toward that direction, so refinement depth D covers shells down to radius
R 2^-D and angular cells down to size 2^-D around every edge.  The norm
integral is tracked as a function of D; non-membership shows up as
increments that stop decaying.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import PolyhedralCone, TruncatedCone
from .models import multi_indices

# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class WeightParams:
    """Exponents of a weighted norm.

    ``variant`` is "V", "W" or ("Wcal", edges); V and W are the cases where
    every edge, respectively no edge, carries the order-dependent exponent.
    """

    l: int
    p: float
    beta: float
    delta: tuple
    variant: object = "V"

    def __post_init__(self):
        object.__setattr__(self, "delta", tuple(float(d) for d in self.delta))
        if int(self.l) != self.l or self.l < 0:
            raise ValueError("l must be a nonnegative integer")
        if not self.p >= 1:
            raise ValueError("p must lie in [1, inf)")
        self.jtilde  # validates the variant
        for j, d in enumerate(self.delta):
            if self.variant != "V" and j not in self.jtilde and not d > -2.0 / self.p:
                raise ValueError(f"delta_{j} = {d} violates delta > -2/p for an edge outside J~")

    @property
    def n(self) -> int:
        return len(self.delta)

    @property
    def jtilde(self) -> frozenset:
        v = self.variant
        if v == "V":
            return frozenset(range(self.n))
        if v == "W":
            return frozenset()
        if isinstance(v, dict) and set(v) == {"Wcal"}:
            v = ("Wcal", v["Wcal"])
        if isinstance(v, (tuple, list)) and len(v) == 2 and v[0] == "Wcal":
            js = frozenset(int(j) for j in v[1])
            if any(not 0 <= j < self.n for j in js):
                raise ValueError("J~ contains an unknown edge index")
            return js
        raise ValueError(f"unknown variant {v!r}")

    def with_variant(self, variant) -> "WeightParams":
        return WeightParams(self.l, self.p, self.beta, self.delta, variant)

    @classmethod
    def from_config(cls, block: dict) -> "WeightParams":
        return cls(int(block["l"]), float(block.get("p", 2.0)), float(block.get("beta", 0.0)),
                   tuple(block["delta"]), block.get("variant", "V"))


@dataclass(frozen=True)
class GradedQuadrature:
    """depth: number of dyadic refinements toward the vertex and the edges;
    grading: size ratio between consecutive levels (0.5 = dyadic)."""

    depth: int = 10
    radial_points: int = 6
    angular_order: int = 5
    grading: float = 0.5
    exclusion: float = 1e-8
    chunk: int = 40000

    def __post_init__(self):
        if self.depth < 4:
            raise ValueError("depth must be at least 4 for divergence detection")
        if not 0 < self.grading < 1:
            raise ValueError("grading must lie in (0, 1)")


# ---------------------------------------------------------------------------
# derivative oracles


class Oracle:
    """Maps points (..., 3) to {alpha: d^alpha u} for all |alpha| <= order."""

    max_order: int = 0

    def derivatives(self, x: np.ndarray, order: int) -> dict:
        raise NotImplementedError

    def __mul__(self, c: float) -> "Oracle":
        return Combination(((float(c), self),))

    __rmul__ = __mul__

    def __add__(self, other: "Oracle") -> "Oracle":
        return Combination(((1.0, self), (1.0, other)))


class JetOracle(Oracle):
    def __init__(self, fn):
        self.fn = fn
        self.max_order = fn.max_order

    def derivatives(self, x, order):
        jet = self.fn.jet(x, order)
        return {a: jet.derivative(a) for a in multi_indices(order)}


class PolynomialOracle(Oracle):
    """u(x) = sum c * x^a with exact derivatives of all orders."""

    max_order = 99

    def __init__(self, terms: dict):
        self.terms = {tuple(a): float(c) for a, c in terms.items()}

    def derivatives(self, x, order):
        out = {}
        for al in multi_indices(order):
            v = np.zeros(x.shape[:-1])
            for a, c in self.terms.items():
                if any(ai < bi for ai, bi in zip(a, al)):
                    continue
                coef = c
                mono = np.ones(x.shape[:-1])
                for i in range(3):
                    for t in range(al[i]):
                        coef *= a[i] - t
                    mono = mono * x[..., i] ** (a[i] - al[i])
                v = v + coef * mono
            out[al] = v
        return out


@dataclass(frozen=True)
class Combination(Oracle):
    terms: tuple

    @property
    def max_order(self):
        return min(o.max_order for _, o in self.terms)

    def derivatives(self, x, order):
        out = None
        for c, o in self.terms:
            d = o.derivatives(x, order)
            out = {a: c * v for a, v in d.items()} if out is None else {a: out[a] + c * d[a] for a in out}
        return out


def as_oracle(u) -> Oracle:
    if isinstance(u, Oracle):
        return u
    if hasattr(u, "jet"):
        return JetOracle(u)
    if isinstance(u, (int, float)):
        return PolynomialOracle({(0, 0, 0): float(u)})
    raise TypeError("expected an Oracle, a SingularFunction or a constant")


# ---------------------------------------------------------------------------
# angular cells


def _triangle_rule(n: int):
    """Collapsed Gauss rule on the reference triangle {b, c >= 0, b + c <= 1}."""
    t, w = np.polynomial.legendre.leggauss(n)
    t, w = 0.5 * (t + 1), 0.5 * w
    U, V = np.meshgrid(t, t, indexing="ij")
    W = np.outer(w, w) * (1 - U)
    return U.ravel(), (V * (1 - U)).ravel(), W.ravel()


def _cell_nodes(tris: np.ndarray, n: int):
    """Directions and solid-angle weights for flat triangles (m, 3, 3)
    projected centrally onto the unit sphere."""
    b, c, w = _triangle_rule(n)
    A, B, C = tris[:, 0], tris[:, 1], tris[:, 2]
    pts = A[:, None] + b[None, :, None] * (B - A)[:, None] + c[None, :, None] * (C - A)[:, None]
    norm = np.linalg.norm(pts, axis=-1)
    det = np.einsum("ij,ij->i", A, np.cross(B, C))
    wts = w[None, :] * det[:, None] / norm**3
    return (pts / norm[..., None]).reshape(-1, 3), wts.ravel()


def _angular_levels(cone: PolyhedralCone, depth: int, order: int, grading: float):
    """Per level d < depth: (directions, weights) of the regular cells created
    at that level.  Cells at a singular corner keep splitting."""
    cap = cone.cap_mesh(1)
    V = cap.vertices
    sing = np.zeros(len(V), dtype=bool)
    for e in cone.edges:
        sing |= np.linalg.norm(V - e, axis=1) < 1e-9
    tris = V[cap.triangles]
    flags = sing[cap.triangles]
    levels = []
    for _ in range(depth):
        regular = ~flags.any(axis=1)
        levels.append(_cell_nodes(tris[regular], order) if regular.any() else
                      (np.zeros((0, 3)), np.zeros(0)))
        tris, flags = tris[~regular], flags[~regular]
        new_t, new_f = [], []
        for corner in range(3):
            # only the singular corners keep refining; every other child becomes regular
            a, b, c = tris[:, corner], tris[:, (corner + 1) % 3], tris[:, (corner + 2) % 3]
            ab = a + grading * (b - a)
            ac = a + grading * (c - a)
            child = np.stack([a, ab, ac], axis=1)
            cf = np.zeros_like(flags)
            cf[:, 0] = flags[:, corner]
            # keep orientation: rotate the corner back into its slot
            child = np.roll(child, corner, axis=1)
            cf = np.roll(cf, corner, axis=1)
            new_t.append(child)
            new_f.append(cf)
        rest = _complement_cells(tris, grading)
        new_t.extend(rest)
        new_f.extend([np.zeros_like(flags)] * len(rest))
        tris = np.concatenate(new_t)
        flags = np.concatenate(new_f)
    return levels


def _complement_cells(tris: np.ndarray, g: float) -> list:
    """Triangulate a triangle minus its three corner triangles of ratio g."""
    A, B, C = tris[:, 0], tris[:, 1], tris[:, 2]
    ab, ba = A + g * (B - A), B + g * (A - B)
    bc, cb = B + g * (C - B), C + g * (B - C)
    ca, ac = C + g * (A - C), A + g * (C - A)
    if abs(g - 0.5) < 1e-15:
        return [np.stack([ab, bc, ca], axis=1)]
    # hexagon ab, ba, bc, cb, ca, ac fanned from ab
    return [np.stack([ab, ba, bc], 1), np.stack([ab, bc, cb], 1),
            np.stack([ab, cb, ca], 1), np.stack([ab, ca, ac], 1)]


# ---------------------------------------------------------------------------
# integration


@dataclass
class NormResult:
    value: float
    values: np.ndarray  # partial norms per depth
    increments: np.ndarray
    ratios: np.ndarray
    diverged: bool
    depth: int

    def __float__(self):
        return float("inf") if self.diverged else float(self.value)

    def as_rows(self) -> list[dict]:
        rows = []
        for d, v in enumerate(self.values, start=1):
            r = self.ratios[d - 3] if d >= 3 else float("nan")
            rows.append({"level": d, "norm_value": float(v), "ratio": float(r)})
        return rows


def _radial_nodes(R: float, depth: int, n: int, g: float):
    t, w = np.polynomial.legendre.leggauss(n)
    out = []
    for i in range(depth):
        hi, lo = R * g**i, R * g ** (i + 1)
        rho = lo + (hi - lo) * 0.5 * (t + 1)
        out.append((rho, 0.5 * (hi - lo) * w * rho**2))
    return out


def _edge_distances(x: np.ndarray, edges: np.ndarray) -> np.ndarray:
    t = np.maximum(x @ edges.T, 0.0)
    diff = x[:, None, :] - t[..., None] * edges[None]
    return np.linalg.norm(diff, axis=-1)


def _order_sums(oracle: Oracle, x: np.ndarray, order: int, p: float) -> np.ndarray:
    """D_k = sum over |alpha| = k of |d^alpha u|^p, shape (order + 1, n)."""
    d = oracle.derivatives(x, order)
    out = np.zeros((order + 1, len(x)))
    for a, v in d.items():
        out[sum(a)] += np.abs(v) ** p
    return out


class _Integrator:
    """Evaluates several weight patterns on the same graded node set."""

    def __init__(self, u, K: TruncatedCone, q: GradedQuadrature, order: int, p: float):
        self.oracle = as_oracle(u)
        if self.oracle.max_order < order:
            raise ValueError(f"oracle supports order {self.oracle.max_order} < {order}")
        self.K, self.q, self.order, self.p = K, q, order, p
        self.ang = _angular_levels(K.cone, q.depth, q.angular_order, q.grading)
        self.rad = _radial_nodes(K.radius, q.depth, q.radial_points, q.grading)

    def run(self, weights: list) -> tuple[np.ndarray, bool]:
        """Block sums B[w, i, d] for each weight callable w(k, rho, r, dist) and
        a flag telling whether any node was dropped near S."""
        nw, D = len(weights), self.q.depth
        B = np.zeros((nw, D, D))
        dropped = False
        edges = self.K.cone.edges
        for d, (dirs, aw) in enumerate(self.ang):
            if len(dirs) == 0:
                continue
            for i, (rho, rw) in enumerate(self.rad):
                x = (rho[:, None, None] * dirs[None]).reshape(-1, 3)
                wt = (rw[:, None] * aw[None]).ravel()
                rr = np.repeat(rho, len(dirs))
                for s in range(0, len(x), self.q.chunk):
                    xs, ws, rs = x[s:s + self.q.chunk], wt[s:s + self.q.chunk], rr[s:s + self.q.chunk]
                    r = _edge_distances(xs, edges)
                    dist = r.min(axis=1)
                    keep = dist > self.q.exclusion * self.K.radius
                    if not keep.all():
                        dropped = True
                        xs, ws, rs, r, dist = xs[keep], ws[keep], rs[keep], r[keep], dist[keep]
                    Dk = _order_sums(self.oracle, xs, self.order, self.p)
                    for t, wfun in enumerate(weights):
                        W = wfun(rs, r, dist)  # (order + 1, n)
                        B[t, i, d] += np.sum(ws * np.sum(W * Dk, axis=0))
        return B, dropped


def _sequence(B: np.ndarray, p: float) -> NormResult:
    D = B.shape[0]
    S = np.array([B[:k, :k].sum() for k in range(1, D + 1)])
    inc = np.diff(S)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(inc[:-1] > 0, inc[1:] / inc[:-1], 0.0)
    finite = np.all(np.isfinite(S))
    diverged = (not finite) or bool(np.all(ratios[-3:] >= 1.0) and inc[-1] > 0)
    total = S[-1]
    if finite and not diverged and inc[-1] > 0:
        qr = min(ratios[-1], 0.99)
        total = S[-1] + inc[-1] * qr / (1 - qr)
    vals = np.abs(S) ** (1 / p)
    return NormResult(float(total ** (1 / p)), vals, inc, ratios, diverged, D)


def _weight_fn(params: WeightParams):
    l, p, beta = params.l, params.p, params.beta
    delta = np.array(params.delta)
    jt = np.array([j in params.jtilde for j in range(params.n)])

    def w(rho, r, dist):
        rel = r / rho[:, None]
        logrel = np.log(rel)
        out = []
        for k in range(l + 1):
            ex = np.where(jt, delta - l + k, delta)
            out.append(rho ** (p * (beta - l + k)) * np.exp(p * logrel @ ex))
        return np.array(out)

    return w


def _check_edges(params: WeightParams, K: TruncatedCone):
    if params.n != K.cone.n:
        raise ValueError(f"delta has {params.n} entries but the cone has {K.cone.n} edges")


def weighted_norm(u, params: WeightParams, K: TruncatedCone, q: GradedQuadrature | None = None) -> NormResult:
    """Graded-quadrature value of the weighted norm with a divergence flag."""
    q = q or GradedQuadrature()
    _check_edges(params, K)
    B, _ = _Integrator(u, K, q, params.l, params.p).run([_weight_fn(params)])
    return _sequence(B[0], params.p)


def kondratiev_norm(u, m: int, a: float, p: float, K: TruncatedCone,
                    q: GradedQuadrature | None = None) -> NormResult:
    """Single-weight norm with weight min(1, dist(x, S))^(|alpha| - a)."""
    q = q or GradedQuadrature()
    if int(m) != m or m < 0:
        raise ValueError("m must be a nonnegative integer")

    def w(rho, r, dist):
        d = np.minimum(1.0, dist)
        return np.array([d ** (p * (k - a)) for k in range(m + 1)])

    B, _ = _Integrator(u, K, q, int(m), p).run([w])
    return _sequence(B[0], p)


@dataclass
class ChainResult:
    v: NormResult
    wcal: NormResult
    w: NormResult
    dominated: bool  # V >= Wcal >= W integrands at every node
    trail: dict = field(default_factory=dict)

    @property
    def values(self) -> tuple[float, float, float]:
        return float(self.v), float(self.wcal), float(self.w)


def norm_chain_check(u, params: WeightParams, K: TruncatedCone, q: GradedQuadrature | None = None) -> ChainResult:
    """(V, Wcal(J~), W) norms with shared nodes plus the pointwise domination trail."""
    q = q or GradedQuadrature()
    _check_edges(params, K)
    jt = params.jtilde if params.variant not in ("V", "W") else frozenset()
    pv, pc, pw = (params.with_variant(v) for v in ("V", ("Wcal", sorted(jt)), "W"))
    fv, fc, fw = _weight_fn(pv), _weight_fn(pc), _weight_fn(pw)
    trail = {"nodes": 0, "violations": 0}

    def tracker(rho, r, dist):
        a, b, c = fv(rho, r, dist), fc(rho, r, dist), fw(rho, r, dist)
        tol = 1e-12 * (1 + np.abs(a))
        ok = np.all((a >= b - tol) & (b >= c - tol), axis=0)
        trail["nodes"] += ok.size
        trail["violations"] += int(np.sum(~ok))
        return np.zeros_like(a)

    B, _ = _Integrator(u, K, q, params.l, params.p).run([fv, fc, fw, tracker])
    res = [_sequence(B[t], params.p) for t in range(3)]
    return ChainResult(*res, dominated=trail["violations"] == 0, trail=trail)
