"""Closed-form model singular functions with exact derivative oracles.

Derivatives come from truncated multivariate Taylor arithmetic (``Jet``):
every model is built from coordinates by sums, products and compositions with
univariate functions, so all partial derivatives up to the jet order are exact
to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from math import factorial

import numpy as np
from scipy.spatial import cKDTree

from .geometry import PolyhedralCone, SphericalCap
from .pencil import DIRICHLET, NEUMANN, BCAssignment, edge_eigenvalues, vertex_eigenvalues


# ---------------------------------------------------------------------------
# jets


def multi_indices(order: int, dim: int = 3) -> list[tuple[int, ...]]:
    out = [a for a in product(range(order + 1), repeat=dim) if sum(a) <= order]
    return sorted(out, key=lambda a: (sum(a), [-v for v in a]))


class Jet:
    """Taylor coefficients up to total degree ``order`` at a batch of points."""

    __slots__ = ("c", "order")

    def __init__(self, coeffs: dict, order: int):
        self.c = coeffs
        self.order = order

    @classmethod
    def variables(cls, x: np.ndarray, order: int) -> tuple["Jet", ...]:
        x = np.asarray(x, float)
        out = []
        for i in range(x.shape[-1]):
            c = {(0,) * x.shape[-1]: x[..., i].copy()}
            if order >= 1:
                e = [0] * x.shape[-1]
                e[i] = 1
                c[tuple(e)] = np.ones(x.shape[:-1])
            out.append(cls(c, order))
        return tuple(out)

    @property
    def value(self) -> np.ndarray:
        return self.c[next(iter(self.c))] if len(self.c) == 1 else self.c[self._zero]

    @property
    def _zero(self):
        return (0,) * len(next(iter(self.c)))

    def _const(self, v) -> "Jet":
        return Jet({self._zero: v * np.ones_like(self.value)}, self.order)

    def __add__(self, o):
        if not isinstance(o, Jet):
            o = self._const(o)
        c = dict(self.c)
        for k, v in o.c.items():
            c[k] = c[k] + v if k in c else v
        return Jet(c, self.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet({k: -v for k, v in self.c.items()}, self.order)

    def __sub__(self, o):
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if not isinstance(o, Jet):
            return Jet({k: v * o for k, v in self.c.items()}, self.order)
        c: dict = {}
        for a, va in self.c.items():
            sa = sum(a)
            for b, vb in o.c.items():
                if sa + sum(b) > self.order:
                    continue
                k = tuple(i + j for i, j in zip(a, b))
                c[k] = c[k] + va * vb if k in c else va * vb
        return Jet(c, self.order)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, Jet):
            return self * o.power(-1.0)
        return self * (1.0 / o)

    def compose(self, derivs: list) -> "Jet":
        """f(self) given [f(v), f'(v), ..., f^(order)(v)] at v = self.value."""
        z = self._zero
        h = Jet({k: v for k, v in self.c.items() if k != z}, self.order)
        out = Jet({z: derivs[0] * np.ones_like(self.value)}, self.order)
        hp = None
        for k in range(1, self.order + 1):
            hp = h if hp is None else hp * h
            out = out + hp * (derivs[k] / factorial(k))
        return out

    def power(self, s: float) -> "Jet":
        v = self.value
        d, coef = [], 1.0
        for k in range(self.order + 1):
            d.append(coef * v ** (s - k))
            coef *= s - k
        return self.compose(d)

    def sqrt(self) -> "Jet":
        return self.power(0.5)

    def real(self) -> "Jet":
        return Jet({k: np.real(v) for k, v in self.c.items()}, self.order)

    def imag(self) -> "Jet":
        return Jet({k: np.imag(v) for k, v in self.c.items()}, self.order)

    def derivative(self, alpha) -> np.ndarray:
        alpha = tuple(alpha)
        if sum(alpha) > self.order:
            raise ValueError("derivative order exceeds jet order")
        f = np.prod([factorial(a) for a in alpha])
        return f * self.c.get(alpha, np.zeros_like(self.value))


# ---------------------------------------------------------------------------
# cutoff


def _smoothstep_poly() -> np.poly1d:
    return np.poly1d([6.0, -15.0, 10.0, 0.0, 0.0, 0.0])


@dataclass(frozen=True)
class Cutoff:
    """Radial cutoff: 1 on [0, rho1], 0 beyond rho2, quintic blend between."""

    rho1: float
    rho2: float

    def __post_init__(self):
        if not 0 <= self.rho1 < self.rho2:
            raise ValueError("cutoff needs 0 <= rho1 < rho2")

    def derivs(self, rho: np.ndarray, order: int) -> list:
        w = self.rho2 - self.rho1
        t = (rho - self.rho1) / w
        inside = (t > 0) & (t < 1)
        p = _smoothstep_poly()
        out = [np.where(t <= 0, 1.0, np.where(t >= 1, 0.0, 1.0 - p(np.clip(t, 0, 1))))]
        for k in range(1, order + 1):
            p = p.deriv()
            out.append(np.where(inside, -p(np.clip(t, 0, 1)) / w**k, 0.0))
        return out

    def __call__(self, rho):
        return self.derivs(np.asarray(rho, float), 0)[0]


# ---------------------------------------------------------------------------
# singular functions


@dataclass(frozen=True, eq=False)
class SingularFunction:
    kind: str  # "edge" or "vertex"
    exponent: float
    profile: str
    cutoff: Cutoff
    max_order: int
    frame: np.ndarray = field(default_factory=lambda: np.eye(3))  # rows x', y', e
    theta: float | None = None
    bc_pair: tuple[str, str] | None = None
    analytic: bool = True
    _vertex_eval: object = None

    def jet(self, x, order: int | None = None) -> Jet:
        order = self.max_order if order is None else int(order)
        if order > self.max_order:
            raise ValueError(f"oracle supports derivatives up to order {self.max_order}")
        x = np.asarray(x, float)
        X = Jet.variables(x, order)
        rho = (X[0] * X[0] + X[1] * X[1] + X[2] * X[2]).sqrt()
        chi = rho.compose(self.cutoff.derivs(rho.value, order))
        if self.kind == "edge":
            u = self._edge_jet(X, order)
        else:
            u = self._vertex_eval(X, rho, order)
        return chi * u

    def _edge_jet(self, X, order):
        F = self.frame
        xl = X[0] * F[0, 0] + X[1] * F[0, 1] + X[2] * F[0, 2]
        yl = X[0] * F[1, 0] + X[1] * F[1, 1] + X[2] * F[1, 2]
        w = xl * (1.0 + 0j) + yl * 1j
        lam = self.exponent
        # branch cut on the exterior bisector: phi in [theta/2 - pi, theta/2 + pi)
        x0, y0 = xl.value, yl.value
        phi = np.arctan2(y0, x0)
        lo = 0.5 * self.theta - np.pi
        phi = np.where(phi < lo, phi + 2 * np.pi, phi)
        phi = np.where(phi >= lo + 2 * np.pi, phi - 2 * np.pi, phi)
        r = np.hypot(x0, y0)
        d, coef = [], 1.0
        for k in range(order + 1):
            with np.errstate(divide="ignore", invalid="ignore"):
                d.append(coef * r ** (lam - k) * np.exp(1j * (lam - k) * phi))
            coef *= lam - k
        z = w.compose(d)
        return z.real() if self.profile == "cos" else z.imag()

    def __call__(self, x) -> np.ndarray:
        return self.jet(x, 0).value

    def derivative(self, alpha, x) -> np.ndarray:
        return self.jet(x, sum(alpha)).derivative(alpha)


def edge_frame(cone: PolyhedralCone, j: int, flip: bool = False) -> tuple[np.ndarray, float]:
    """Rows (x', y', e): e along edge j, phi = 0 on the incoming face (or the
    outgoing one when flipped) and phi increasing into the cone."""
    e = cone.edges[j]
    i_in, i_out = cone.adjacent_faces(j)
    arcs = cone.arcs
    t_in = -np.cross(arcs[i_in].axis, e)
    t_out = np.cross(arcs[i_out].axis, e)
    x, other = (t_out, t_in) if flip else (t_in, t_out)
    x = x / np.linalg.norm(x)
    other = other / np.linalg.norm(other)
    theta = cone.edge_angle(j)
    cands = [np.cross(e, x), -np.cross(e, x)]
    if abs(np.sin(theta)) > 1e-9:
        miss = [np.linalg.norm(np.cos(theta) * x + np.sin(theta) * y - other) for y in cands]
        return np.array([x, cands[int(np.argmin(miss))], e]), theta
    for y in cands:
        if cone.contains(e + 1e-4 * y):
            return np.array([x, y, e]), theta
    raise RuntimeError("could not orient the edge frame")


def edge_singularity(theta: float, bc_pair=(DIRICHLET, DIRICHLET), m: int = 1,
                     cutoff=(0.5, 0.9), frame=None, max_order: int = 3) -> SingularFunction:
    """chi(rho) r^lam T(lam phi) with lam the m-th edge eigenvalue."""
    if not 0 < theta <= 2 * np.pi:
        raise ValueError("theta must lie in (0, 2 pi]")
    if int(m) < 1:
        raise ValueError("m must be >= 1")
    bc_pair = tuple(bc_pair)
    lam = float(edge_eigenvalues(theta, bc_pair, [int(m)])[0])
    profile = "cos" if bc_pair == (NEUMANN, NEUMANN) else "sin"
    if bc_pair == (NEUMANN, DIRICHLET):
        raise ValueError("mixed edges need the Dirichlet face at phi = 0; flip the frame")
    cut = cutoff if isinstance(cutoff, Cutoff) else Cutoff(*cutoff)
    F = np.eye(3) if frame is None else np.asarray(frame, float)
    return SingularFunction("edge", lam, profile, cut, max_order, F, float(theta), bc_pair)


def cone_edge_singularity(cone: PolyhedralCone, j: int, bc: BCAssignment, m: int = 1,
                          cutoff=(0.5, 0.9), max_order: int = 3) -> SingularFunction:
    pair = bc.edge_pair(cone, j)
    flip = pair == (NEUMANN, DIRICHLET)
    frame, theta = edge_frame(cone, j, flip)
    if flip:
        pair = pair[::-1]
    return edge_singularity(theta, pair, m, cutoff, frame, max_order)


# ---------------------------------------------------------------------------
# vertex functions


def _analytic_vertex(name: str):
    if name == "octant_analytic":
        return 3.0, lambda X, rho, o: X[0] * X[1] * X[2] / (rho.power(3.0))
    if name == "hemisphere_analytic":
        return 1.0, lambda X, rho, o: X[2] / rho
    if name == "constant":
        return 0.0, lambda X, rho, o: rho * 0.0 + 1.0
    raise ValueError(f"unknown analytic vertex profile {name!r}")


def vertex_singularity_analytic(profile: str, cutoff=(0.5, 0.9), max_order: int = 3) -> SingularFunction:
    """Closed-form vertex profiles: octant Dirichlet (lidx 1), hemisphere
    Dirichlet (lidx 1) and the constant Neumann mode."""
    lam, ang = _analytic_vertex(profile)
    cut = cutoff if isinstance(cutoff, Cutoff) else Cutoff(*cutoff)

    def ev(X, rho, order):
        return rho.power(lam) * ang(X, rho, order) if lam else ang(X, rho, order)

    return SingularFunction("vertex", lam, profile, cut, max_order, _vertex_eval=ev)


def radial_power(s: float, cutoff=(0.5, 0.9), max_order: int = 3) -> SingularFunction:
    """chi(rho) rho^s, the model vertex function with a constant profile."""
    cut = cutoff if isinstance(cutoff, Cutoff) else Cutoff(*cutoff)
    return SingularFunction("vertex", float(s), "radial", cut, max_order,
                            _vertex_eval=lambda X, rho, o: rho.power(float(s)))


class _MeshProfile:
    """0-homogeneous extension of a P1 function on a cap mesh (central
    projection onto each flat triangle)."""

    def __init__(self, cap: SphericalCap, values: np.ndarray):
        self.v = cap.vertices
        self.t = cap.triangles
        self.vals = values
        self.inv = np.linalg.inv(np.transpose(self.v[self.t], (0, 2, 1)))  # columns A,B,C
        cen = self.v[self.t].mean(axis=1)
        self.tree = cKDTree(cen / np.linalg.norm(cen, axis=1, keepdims=True))

    def locate(self, x: np.ndarray) -> np.ndarray:
        w = x / np.linalg.norm(x, axis=-1, keepdims=True)
        _, cand = self.tree.query(w, k=min(12, len(self.t)))
        cand = np.atleast_2d(cand)
        tri = np.full(len(w), -1)
        best = np.full(len(w), -np.inf)
        for c in cand.T:
            bary = np.einsum("nij,nj->ni", self.inv[c], w)
            score = bary.min(axis=1)
            upd = score > best
            tri[upd], best[upd] = c[upd], score[upd]
        return tri

    def __call__(self, X, rho, order):
        pts = np.stack([X[0].value, X[1].value, X[2].value], axis=-1)
        tri = self.locate(pts)
        M = self.inv[tri]  # (n, 3, 3)
        vals = self.vals[self.t[tri]]  # (n, 3)
        c = [X[0] * M[:, i, 0] + X[1] * M[:, i, 1] + X[2] * M[:, i, 2] for i in range(3)]
        num = c[0] * vals[:, 0] + c[1] * vals[:, 1] + c[2] * vals[:, 2]
        den = c[0] + c[1] + c[2]
        return num / den


def vertex_singularity(cap: SphericalCap, bc: BCAssignment, lidx: int, cutoff=(0.5, 0.9),
                       refinements: int = 4) -> SingularFunction:
    """chi(rho) rho^Lambda+ psi(omega) with psi interpolated from the mesh
    eigenvector; derivatives are limited to first order."""
    base = 1 if bc.has_dirichlet else 0
    if lidx < base:
        raise IndexError(f"eigen index {lidx} out of range (first index is {base})")
    spec = vertex_eigenvalues(cap, bc, count=max(lidx + 2, 4), refinements=refinements)
    k = lidx - base
    if not 0 <= k < len(spec.lam):
        raise IndexError(f"eigen index {lidx} out of range")
    lam = float(spec.lam_plus[k])
    eig = spec.eigen
    vec = eig.vectors[:, k]
    vec = vec / np.max(np.abs(vec))
    prof = _MeshProfile(eig.mesh, vec)
    cut = cutoff if isinstance(cutoff, Cutoff) else Cutoff(*cutoff)

    def ev(X, rho, order):
        return rho.power(lam) * prof(X, rho, order) if lam else prof(X, rho, order)

    return SingularFunction("vertex", lam, "mesh", cut, 1, analytic=False, _vertex_eval=ev)


# ---------------------------------------------------------------------------
# thresholds


@dataclass(frozen=True)
class Threshold:
    kind: str
    value: float | None
    supported: bool = True


def membership_threshold(fn: SingularFunction, l: int) -> Threshold:
    """Edge: minimal delta on the singular edge; vertex: minimal beta."""
    if fn.kind == "edge":
        return Threshold("delta", l - fn.exponent - 1.0)
    if not fn.analytic:
        return Threshold("beta", None, supported=False)
    return Threshold("beta", l - fn.exponent - 1.5)


def function_from_config(block: dict, cone: PolyhedralCone | None = None,
                         bc: BCAssignment | None = None, radius: float = 1.0) -> SingularFunction:
    cut = tuple(block.get("cutoff", (0.5, 0.9)))
    cut = (cut[0] * radius, cut[1] * radius)
    kind = block.get("kind")
    if kind == "edge":
        if "edge" in block and cone is not None:
            bcs = bc or BCAssignment.uniform(DIRICHLET, cone.n)
            if "bc" in block:
                bcs = BCAssignment(tuple(block["bc"])) if len(block["bc"]) == cone.n else bcs
            return cone_edge_singularity(cone, int(block["edge"]), bcs, int(block.get("m", 1)), cut)
        return edge_singularity(float(block["theta"]), tuple(block.get("bc", ("D", "D"))),
                                int(block.get("m", 1)), cut)
    if kind == "vertex":
        prof = block.get("profile", "octant_analytic")
        if prof == "mesh":
            if cone is None or bc is None:
                raise ValueError("mesh vertex profiles need a cone and boundary conditions")
            return vertex_singularity(cone.cap_mesh(int(block.get("resolution", 8))), bc,
                                      int(block.get("lidx", 1)), cut)
        return vertex_singularity_analytic(prof, cut)
    raise ValueError(f"unknown function kind {kind!r}")
