"""Operator-pencil data: edge eigenvalues and strips in closed form, vertex
eigenvalues from a Laplace-Beltrami eigenproblem on the spherical cap."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh
from scipy.sparse.linalg import norm as spnorm

from .geometry import PolyhedralCone, SphericalCap

DIRICHLET, NEUMANN = "D", "N"


class SpectrumRangeError(ValueError):
    """The requested line lies outside the computed part of the spectrum."""


def _check_bc(kind: str) -> str:
    k = str(kind).upper()[:1]
    if k not in (DIRICHLET, NEUMANN):
        raise ValueError(f"boundary condition must be 'D' or 'N', got {kind!r}")
    return k


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not 0.0 < theta <= 2.0 * np.pi:
        raise ValueError(f"edge angle must lie in (0, 2pi], got {theta}")
    return theta


@dataclass(frozen=True)
class BCAssignment:
    """Boundary condition per face label ('D' or 'N')."""

    faces: tuple[str, ...]

    def __init__(self, faces):
        object.__setattr__(self, "faces", tuple(_check_bc(k) for k in faces))

    @classmethod
    def uniform(cls, kind: str, n: int) -> "BCAssignment":
        return cls([kind] * n)

    @property
    def J0(self) -> frozenset[int]:
        return frozenset(i for i, k in enumerate(self.faces) if k == DIRICHLET)

    @property
    def J1(self) -> frozenset[int]:
        return frozenset(i for i, k in enumerate(self.faces) if k == NEUMANN)

    @property
    def has_dirichlet(self) -> bool:
        return bool(self.J0)

    @property
    def variant(self) -> str:
        if not self.J1:
            return "dirichlet"
        if not self.J0:
            return "neumann"
        return "mixed"

    def edge_pair(self, cone: PolyhedralCone, j: int) -> tuple[str, str]:
        """(bc on incoming face, bc on outgoing face) at edge j."""
        i_in, i_out = cone.adjacent_faces(j)
        return self.faces[i_in], self.faces[i_out]

    def jtilde(self, cone: PolyhedralCone) -> frozenset[int]:
        """Edges with a Dirichlet condition on at least one adjacent face."""
        self._check_cone(cone)
        return frozenset(j for j in range(cone.n) if DIRICHLET in self.edge_pair(cone, j))

    def interface_edges(self, cone: PolyhedralCone) -> frozenset[int]:
        """Edges where a Dirichlet face meets a Neumann face."""
        self._check_cone(cone)
        return frozenset(j for j in range(cone.n) if len(set(self.edge_pair(cone, j))) == 2)

    def _check_cone(self, cone: PolyhedralCone) -> None:
        if len(self.faces) != cone.n:
            raise ValueError("boundary assignment length differs from the face count")


def _pair_kind(bc_pair) -> str:
    a, b = (_check_bc(k) for k in bc_pair)
    if a == b:
        return "DD" if a == DIRICHLET else "NN"
    return "mixed"


def edge_eigenvalues(theta: float, bc_pair, m_range) -> np.ndarray:
    """Edge pencil eigenvalues for the given values of m (m >= 1).

    D/D: m pi/theta, N/N: (m - 1) pi/theta (m = 1 gives the eigenvalue 0),
    mixed: (m - 1/2) pi/theta.
    """
    theta = _check_theta(theta)
    m = np.atleast_1d(np.asarray(m_range))
    if m.dtype.kind not in "iu" or np.any(m < 1):
        raise ValueError("m must be positive integers")
    kind = _pair_kind(bc_pair)
    shift = {"DD": 0.0, "NN": 1.0, "mixed": 0.5}[kind]
    return (m - shift) * np.pi / theta


def edge_strip(theta: float, bc_pair) -> tuple[float, float]:
    """Half-widths (delta_+, delta_-) of the eigenvalue-free strip at an edge."""
    theta = _check_theta(theta)
    w = np.pi / theta if _pair_kind(bc_pair) != "mixed" else np.pi / (2 * theta)
    return w, w


# ---------------------------------------------------------------------------
# Laplace-Beltrami P1 surface finite elements


def assemble_lb(cap: SphericalCap) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Cotangent stiffness and consistent mass matrices on flat triangles."""
    v, t = cap.vertices, cap.triangles
    p0, p1, p2 = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    e0, e1, e2 = p2 - p1, p0 - p2, p1 - p0  # edge opposite each vertex
    cr = np.cross(e0, e1)
    area2 = np.linalg.norm(cr, axis=1)
    if np.any(area2 <= 1e-15):
        raise ValueError("degenerate triangle in the cap mesh")
    area = 0.5 * area2
    edges = (e0, e1, e2)
    rows, cols, kv, mv = [], [], [], []
    for a in range(3):
        for b in range(3):
            kab = np.einsum("ij,ij->i", edges[a], edges[b]) / (4 * area)
            mab = area / 12.0 * (2.0 if a == b else 1.0)
            rows.append(t[:, a])
            cols.append(t[:, b])
            kv.append(kab)
            mv.append(mab)
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    n = len(v)
    K = sp.coo_matrix((np.concatenate(kv), (rows, cols)), shape=(n, n)).tocsr()
    M = sp.coo_matrix((np.concatenate(mv), (rows, cols)), shape=(n, n)).tocsr()
    return K, M


def dirichlet_nodes(cap: SphericalCap, bc: BCAssignment) -> np.ndarray:
    labels = [i for i, k in enumerate(bc.faces) if k == DIRICHLET]
    if not len(cap.boundary_labels) or not labels:
        return np.zeros(0, dtype=int)
    return cap.boundary_vertices(labels)


@dataclass
class CapEigen:
    values: np.ndarray
    vectors: np.ndarray  # full-length nodal vectors, zero on Dirichlet nodes
    mesh: SphericalCap
    residual: float


def cap_eigenpairs(cap: SphericalCap, bc: BCAssignment, count: int) -> CapEigen:
    """Lowest ``count`` eigenpairs of -Delta_omega on the cap mesh."""
    if count < 1:
        raise ValueError("count must be >= 1")
    K, M = assemble_lb(cap)
    n = K.shape[0]
    fixed = dirichlet_nodes(cap, bc)
    free = np.setdiff1d(np.arange(n), fixed)
    Kf = K[free][:, free].tocsc()
    Mf = M[free][:, free].tocsc()
    k = min(count, len(free) - 1)
    if k < count:
        raise ValueError("mesh too coarse for the requested number of eigenvalues")
    # fixed start vector: ARPACK otherwise draws one at random and reruns differ in the last bits
    v0 = np.random.default_rng(len(free)).standard_normal(len(free))
    try:
        vals, vecs = eigsh(Kf, k=k, M=Mf, sigma=-1.0, which="LM", tol=1e-12, v0=v0)
    except Exception as exc:  # ARPACK failures
        raise RuntimeError(f"eigensolver did not converge: {exc}") from exc
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    res = np.linalg.norm(Kf @ vecs - (Mf @ vecs) * vals, axis=0)
    scale = spnorm(Kf, 1) * np.linalg.norm(vecs, axis=0)
    rel = float(np.max(res / scale))
    if rel > 1e-8:
        raise RuntimeError(f"eigensolver residual {rel:.2e} exceeds 1e-8")
    full = np.zeros((n, k))
    full[free] = vecs
    return CapEigen(np.maximum(vals, 0.0), full, cap, rel)


def pencil_from_lb(lam: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    root = np.sqrt(np.asarray(lam) + 0.25)
    return -0.5 + root, -0.5 - root


@dataclass
class EdgeSpectrum:
    j: int
    theta: float
    bc_pair: tuple[str, str]
    eigenvalues: np.ndarray
    strip: tuple[float, float]
    has_zero: bool


@dataclass
class VertexSpectrum:
    lam: np.ndarray  # extrapolated Laplace-Beltrami eigenvalues, ascending
    lam_raw: np.ndarray  # finest-mesh values
    err: np.ndarray
    index_base: int  # label of lam[0]: 1 with Dirichlet faces, else 0
    resolution: int
    eigen: CapEigen | None = field(default=None, repr=False)
    lam_coarse: np.ndarray | None = field(default=None, repr=False)

    @property
    def lam_plus(self) -> np.ndarray:
        return pencil_from_lb(self.lam)[0]

    @property
    def lam_minus(self) -> np.ndarray:
        return pencil_from_lb(self.lam)[1]

    @property
    def pencil_err(self) -> np.ndarray:
        return self.err / (2.0 * np.sqrt(self.lam + 0.25))

    def index(self, lidx: int) -> int:
        i = lidx - self.index_base
        if not 0 <= i < len(self.lam):
            raise IndexError(f"eigen index {lidx} outside the computed range")
        return i


def vertex_eigenvalues(
    cap: SphericalCap, bc: BCAssignment, count: int, refinements: int
) -> VertexSpectrum:
    """Eigenvalues on meshes of resolution 2**(refinements-1) and 2**refinements,
    Richardson-extrapolated assuming second-order convergence."""
    if refinements < 1:
        raise ValueError("refinements must be >= 1")
    coarse = cap.refined(2 ** (refinements - 1))
    fine = cap.refined(2**refinements)
    ec = cap_eigenpairs(coarse, bc, count)
    ef = cap_eigenpairs(fine, bc, count)
    ext = ef.values + (ef.values - ec.values) / 3.0
    ext = np.maximum(ext, 0.0)
    err = np.abs(ef.values - ext)
    order = np.argsort(ext, kind="stable")
    ext, err = ext[order], err[order]
    ef = CapEigen(ef.values[order], ef.vectors[:, order], ef.mesh, ef.residual)
    base = 1 if bc.has_dirichlet else 0
    return VertexSpectrum(ext, ef.values, err, base, 2**refinements, ef, ec.values[order])


@dataclass
class PencilSpectrum:
    edges: list[EdgeSpectrum]
    vertex: VertexSpectrum

    def table_edges(self) -> list[dict]:
        rows = []
        for e in self.edges:
            row = {"j": e.j, "theta": e.theta, "bc": "/".join(e.bc_pair),
                   "delta_plus": e.strip[0], "delta_minus": e.strip[1]}
            for m, lam in enumerate(e.eigenvalues, start=1):
                row[f"lambda_{m}"] = lam
            rows.append(row)
        return rows

    def table_vertex(self) -> list[dict]:
        v = self.vertex
        return [
            {"l": i + v.index_base, "lambda_tilde": lt, "Lambda_plus": lp,
             "Lambda_minus": lm, "err": er}
            for i, (lt, lp, lm, er) in enumerate(zip(v.lam, v.lam_plus, v.lam_minus, v.err))
        ]


def pencil_spectrum(
    cone: PolyhedralCone,
    bc: BCAssignment,
    count: int = 6,
    refinements: int = 5,
    m_max: int = 4,
    cap: SphericalCap | None = None,
) -> PencilSpectrum:
    edges = []
    for j in range(cone.n):
        th = cone.edge_angle(j)
        pair = bc.edge_pair(cone, j)
        lams = edge_eigenvalues(th, pair, np.arange(1, m_max + 1))
        edges.append(EdgeSpectrum(j, th, pair, lams, edge_strip(th, pair), _pair_kind(pair) == "NN"))
    cap = cap if cap is not None else cone.cap_mesh(1)
    return PencilSpectrum(edges, vertex_eigenvalues(cap, bc, count, refinements))


@dataclass(frozen=True)
class StripCheck:
    ok: bool
    line: float
    distance: float
    nearest: float
    tol: float


def strip_free_check(l: int, beta: float, spectrum, tol: float | None = None) -> StripCheck:
    """Whether the line Re(lambda) = l - beta - 3/2 avoids all Lambda_{+-}."""
    v = spectrum.vertex if isinstance(spectrum, PencilSpectrum) else spectrum
    line = l - beta - 1.5
    lp, lm = v.lam_plus, v.lam_minus
    if not (lm[-1] < line < lp[-1]):
        raise SpectrumRangeError(
            f"line {line:g} lies beyond the computed eigenvalues "
            f"({lm[-1]:g}, {lp[-1]:g}); request more eigenvalues"
        )
    cand = np.concatenate([lp, lm])
    errs = np.concatenate([v.pencil_err, v.pencil_err])
    dist = np.abs(cand - line)
    i = int(np.argmin(dist))
    total = (1e-3 if tol is None else tol) + errs[i]
    return StripCheck(bool(np.all(dist > (1e-3 if tol is None else tol) + errs)), line,
                      float(dist[i]), float(cand[i]), float(total))
