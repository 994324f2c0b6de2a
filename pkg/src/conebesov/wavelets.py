"""Orthonormal Daubechies wavelets in 3D: transform, Besov norms and
best N-term / level-truncation error curves.

The transform acts on l2(Z^3) with zero extension outside the sample grid, so
it is exactly orthonormal on the finitely supported input (Parseval holds to
rounding).  Coefficient levels are counted relative to the bounding cube: a
grid of 2**J samples per axis has detail levels 0..J-1 and the P0 part at
level 0 (when fully decomposed).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import product

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import comb

DETAIL_TYPES = tuple(e for e in product((0, 1), repeat=3) if any(e))


@lru_cache(maxsize=None)
def daubechies_filter(order: int) -> np.ndarray:
    """Minimum-phase Daubechies low-pass filter with ``order`` vanishing moments.

    Obtained by spectral factorization of the half-band polynomial; the taps
    sum to sqrt(2).
    """
    N = int(order)
    if N < 1:
        raise ValueError("order must be >= 1")
    if N == 1:
        return np.array([1.0, 1.0]) / np.sqrt(2.0)
    # P(y) = sum_k C(N-1+k, k) y^k with y = (2 - z - 1/z)/4
    py = np.array([comb(N - 1 + k, k, exact=True) for k in range(N)], dtype=float)
    y_of_z = np.array([-0.25, 0.5, -0.25])  # coefficients of z^0..z^2 of z*y
    q = np.zeros(1)
    for k, c in enumerate(py):
        term = np.array([1.0])
        for _ in range(k):
            term = P.polymul(term, y_of_z)
        # z^(N-1) * y^k = z^(N-1-k) * (z y)^k
        term = np.concatenate([np.zeros(N - 1 - k), term])
        q = P.polyadd(q, c * term)
    roots = P.polyroots(q)
    inside = roots[np.abs(roots) < 1.0]
    if len(inside) != N - 1:
        raise RuntimeError("spectral factorization failed")
    h = np.array([1.0])
    for _ in range(N):
        h = P.polymul(h, [1.0, 1.0])
    for r in inside:
        h = P.polymul(h, [-r, 1.0])
    h = np.real(h)
    h = h / np.sum(h) * np.sqrt(2.0)
    return h[::-1].copy() if abs(h[0]) < abs(h[-1]) else h


def scaling_function(h: np.ndarray, resolution: int = 6) -> tuple[np.ndarray, np.ndarray]:
    """phi on the dyadic grid k / 2**resolution over its support [0, L-1]
    (cascade algorithm started from the exact integer values)."""
    L = len(h)
    # phi(n) = sqrt2 sum_m h_m phi(2n - m) on integers 1..L-2
    n = np.arange(L)
    T = np.zeros((L, L))
    for i in n:
        for j in n:
            m = 2 * i - j
            if 0 <= m < L:
                T[i, j] = np.sqrt(2.0) * h[m]
    w, V = np.linalg.eig(T)
    k = np.argmin(np.abs(w - 1.0))
    vals = np.real(V[:, k])
    vals = vals / vals.sum()
    for r in range(1, resolution + 1):
        step = 2**r
        x_new = np.zeros((L - 1) * step + 1)
        old = vals
        for idx in range(len(x_new)):
            acc = 0.0
            for m in range(L):
                # phi(idx/step) = sqrt2 sum_m h_m phi(2 idx/step - m)
                pos = 2 * idx - m * step  # in units of 1/step
                if pos % 2:
                    continue
                p = pos // 2
                if 0 <= p < len(old):
                    acc += h[m] * old[p]
            x_new[idx] = np.sqrt(2.0) * acc
        vals = x_new
    x = np.arange(len(vals)) / 2**resolution
    return x, vals


@dataclass(frozen=True, eq=False)
class WaveletSystem:
    order: int = 4

    @cached_property
    def h(self) -> np.ndarray:
        return daubechies_filter(self.order)

    @cached_property
    def g(self) -> np.ndarray:
        L = len(self.h)
        return np.array([(-1) ** m * self.h[L - 1 - m] for m in range(L)])

    @property
    def length(self) -> int:
        return len(self.h)

    @property
    def vanishing_moments(self) -> int:
        return self.order

    @property
    def support_radius(self) -> int:
        """N with supp phi, psi contained in a cube of side 2N - 1."""
        return self.order

    @cached_property
    def first_moment(self) -> float:
        """Centre of mass of phi, whose support is [0, L-1]."""
        return float(np.sum(np.arange(self.length) * self.h) / np.sqrt(2.0))

    def check(self, tol: float = 1e-10) -> None:
        h, g, L = self.h, self.g, self.length
        if abs(np.sum(h * h) - 1.0) > tol:
            raise ValueError("low-pass filter is not normalized")
        for k in range(1, L // 2):
            if abs(np.dot(h[2 * k:], h[: L - 2 * k])) > tol:
                raise ValueError("low-pass filter is not shift-orthogonal")
        m = np.arange(L)
        for q in range(self.order):
            if abs(np.sum(g * m**q)) > 1e-8 * max(1.0, np.sum(np.abs(g * m**q))):
                raise ValueError(f"moment {q} of the high-pass filter does not vanish")


# ---------------------------------------------------------------------------
# 1D building blocks along one axis


def _analysis_range(off: int, n: int, L: int) -> tuple[int, int]:
    kmin = -((L - 1 - off) // 2)  # ceil((off - L + 1) / 2)
    kmax = (off + n - 1) // 2
    return kmin, kmax - kmin + 1


def _analyze_axis(x: np.ndarray, off: int, h: np.ndarray, g: np.ndarray, axis: int):
    L = len(h)
    n = x.shape[axis]
    kmin, K = _analysis_range(off, n, L)
    left = off - 2 * kmin
    total = 2 * (K - 1) + L
    right = total - left - n
    xm = np.moveaxis(x, axis, 0)
    xp = np.zeros((total,) + xm.shape[1:], dtype=xm.dtype)
    xp[left:left + n] = xm
    a = np.zeros((K,) + xm.shape[1:], dtype=xm.dtype)
    d = np.zeros_like(a)
    for m in range(L):
        sl = xp[m:m + 2 * K - 1:2]
        a += h[m] * sl
        d += g[m] * sl
    assert right >= 0
    return np.moveaxis(a, 0, axis), np.moveaxis(d, 0, axis), kmin


def _synthesize_axis(a, d, kmin: int, off: int, n: int, h, g, axis: int):
    L = len(h)
    am = np.moveaxis(a, axis, 0)
    dm = np.moveaxis(d, axis, 0)
    K = am.shape[0]
    y = np.zeros((2 * (K - 1) + L,) + am.shape[1:], dtype=am.dtype)
    for m in range(L):
        y[m:m + 2 * K - 1:2] += h[m] * am + g[m] * dm
    left = off - 2 * kmin
    return np.moveaxis(y[left:left + n], 0, axis)


# ---------------------------------------------------------------------------
# coefficient field


@dataclass
class CoeffField:
    """Wavelet coefficients of a sampled field on an axis-aligned cube."""

    system: WaveletSystem
    approx: np.ndarray  # P0 scaling coefficients at level j0
    approx_offset: tuple[int, int, int]
    details: dict[int, np.ndarray]  # level -> (7, n0, n1, n2)
    offsets: dict[int, tuple[int, int, int]]
    j0: int
    jfine: int  # log2 of the sample grid size
    origin: np.ndarray = field(default_factory=lambda: np.zeros(3))
    side: float = 1.0
    _layout: list = field(default_factory=list, repr=False)

    @property
    def levels(self) -> list[int]:
        return sorted(self.details)

    def energy(self) -> float:
        e = float(np.sum(self.approx**2))
        for d in self.details.values():
            e += float(np.sum(d**2))
        return e

    def count(self) -> int:
        return int(self.approx.size + sum(d.size for d in self.details.values()))

    @property
    def shift(self) -> float:
        """Offset aligning the scaling-function centre with sample centres."""
        return (0.5 - self.system.first_moment) / 2**self.jfine

    def support_intervals(self, j: int, approx: bool = False):
        """Per-axis lower/upper support bounds of the level-j functions."""
        L = self.system.length
        arr = self.approx if approx else self.details[j]
        off = self.approx_offset if approx else self.offsets[j]
        shape = arr.shape if approx else arr.shape[1:]
        out = []
        for ax in range(3):
            k = off[ax] + np.arange(shape[ax])
            lo = self.origin[ax] + self.side * (k / 2.0**j + self.shift)
            hi = lo + self.side * (L - 1) / 2.0**j
            out.append((lo, hi))
        return out

    def support_boxes(self, j: int, approx: bool = False) -> tuple[np.ndarray, np.ndarray]:
        """Arrays lo, hi of shape (n0, n1, n2, 3)."""
        iv = self.support_intervals(j, approx)
        lo = np.stack(np.meshgrid(*[i[0] for i in iv], indexing="ij"), axis=-1)
        hi = np.stack(np.meshgrid(*[i[1] for i in iv], indexing="ij"), axis=-1)
        return lo, hi

    def set_single(self, j: int, e: tuple[int, int, int], k: tuple[int, int, int]) -> None:
        """Zero all coefficients and put a one at (j, e, k) (absolute k)."""
        self.approx[...] = 0
        for d in self.details.values():
            d[...] = 0
        t = DETAIL_TYPES.index(tuple(e))
        idx = tuple(np.asarray(k) - np.asarray(self.offsets[j]))
        self.details[j][(t,) + idx] = 1.0

    def zeros_like(self) -> "CoeffField":
        return CoeffField(
            self.system, np.zeros_like(self.approx), self.approx_offset,
            {j: np.zeros_like(d) for j, d in self.details.items()}, dict(self.offsets),
            self.j0, self.jfine, self.origin.copy(), self.side, list(self._layout),
        )


def analyze(samples: np.ndarray, system: WaveletSystem | None = None, levels: int | None = None,
            origin=(0.0, 0.0, 0.0), side: float = 1.0) -> CoeffField:
    """Multilevel 3D DWT of a cubic sample array (values already scaled as
    coefficients at the finest level)."""
    system = system or WaveletSystem()
    x = np.asarray(samples, dtype=float)
    if x.ndim != 3 or len(set(x.shape)) != 1:
        raise ValueError("samples must be a cubic 3D array")
    n = x.shape[0]
    jfine = int(round(np.log2(n)))
    if 2**jfine != n:
        raise ValueError("grid size must be a power of two")
    levels = jfine if levels is None else int(levels)
    if levels < 1 or levels > jfine:
        raise ValueError(f"grid of {n} samples supports 1..{jfine} levels, got {levels}")
    h, g = system.h, system.g
    details, offsets, layout = {}, {}, []
    a, off = x, (0, 0, 0)
    for step in range(levels):
        j = jfine - 1 - step
        shape_in = a.shape
        bands = {(): a}
        new_off = list(off)
        for ax in range(3):
            nxt = {}
            for key, arr in bands.items():
                lo, hi, kmin = _analyze_axis(arr, off[ax], h, g, ax)
                nxt[key + (0,)] = lo
                nxt[key + (1,)] = hi
            new_off[ax] = kmin
            bands = nxt
        layout.append((j, off, shape_in))
        details[j] = np.ascontiguousarray(np.stack([bands[e] for e in DETAIL_TYPES]))
        a, off = np.ascontiguousarray(bands[(0, 0, 0)]), tuple(new_off)
        offsets[j] = off
    return CoeffField(system, a, off, details, offsets, jfine - levels, jfine,
                      np.asarray(origin, float), float(side), layout)


def synthesize(cf: CoeffField) -> np.ndarray:
    h, g = cf.system.h, cf.system.g
    a = cf.approx
    for j, off_in, shape_in in reversed(cf._layout):
        bands = {(0, 0, 0): a}
        for t, e in enumerate(DETAIL_TYPES):
            bands[e] = cf.details[j][t]
        kmins = cf.offsets[j]
        for ax in (2, 1, 0):
            bands = {
                key: _synthesize_axis(bands[key + (0,)], bands[key + (1,)], kmins[ax],
                                      off_in[ax], shape_in[ax], h, g, ax)
                for key in {k[:ax] for k in bands}
            }
        a = bands[()]
    return a


def sample_grid(n: int, origin=(0.0, 0.0, 0.0), side: float = 1.0) -> tuple[np.ndarray, ...]:
    """1D cell-centre coordinates per axis for a grid of n cells."""
    c = (np.arange(n) + 0.5) / n
    return tuple(origin[ax] + side * c for ax in range(3))


def sample_function(fn, n: int, origin=(0.0, 0.0, 0.0), side: float = 1.0,
                    chunk: int = 16) -> np.ndarray:
    """Finest-level coefficients (side/n)^(3/2) f(x_n) at cell centres."""
    xs, ys, zs = sample_grid(n, origin, side)
    out = np.empty((n, n, n))
    Y, Z = np.meshgrid(ys, zs, indexing="ij")
    for i0 in range(0, n, chunk):
        xi = xs[i0:i0 + chunk]
        pts = np.empty((len(xi), n, n, 3))
        pts[..., 0] = xi[:, None, None]
        pts[..., 1] = Y[None]
        pts[..., 2] = Z[None]
        out[i0:i0 + chunk] = fn(pts)
    out *= (side / n) ** 1.5
    return out


# ---------------------------------------------------------------------------
# norms and error curves


def _p0_lp_norm(cf: CoeffField, p: float, resolution: int = 3) -> float:
    if not np.any(cf.approx):
        return 0.0
    if p == 2:
        return float(np.sqrt(np.sum(cf.approx**2)))
    x, phi = scaling_function(cf.system.h, resolution)
    L = cf.system.length
    step = 2**resolution
    mats = []
    for ax in range(3):
        K = cf.approx.shape[ax]
        grid = np.zeros(((K + L - 1) * step, K))
        for k in range(K):
            grid[k * step:k * step + len(phi), k] = phi
        mats.append(grid)
    F = np.einsum("abc,ia,jb,kc->ijk", cf.approx, *mats, optimize=True)
    # unit-side scaling functions at level j0 have L2 norm one in cube units
    scale = 2.0 ** (3 * cf.j0 / 2)
    vol = (1.0 / (step * 2.0**cf.j0)) ** 3
    return float((np.sum(np.abs(scale * F) ** p) * vol) ** (1 / p))


def besov_norm(cf: CoeffField, s: float, p: float, q: float) -> float:
    """Wavelet Besov norm of B^s_{p,q} in cube-normalized coordinates."""
    if not s > max(0.0, 3.0 * (1.0 / p - 1.0)):
        raise ValueError("need s > max(0, 3(1/p - 1))")
    total = _p0_lp_norm(cf, p) ** q if q != np.inf else _p0_lp_norm(cf, p)
    acc = []
    for j, d in cf.details.items():
        lev = 2.0 ** (j * (s + 3 * (0.5 - 1.0 / p))) * np.sum(np.abs(d) ** p) ** (1 / p)
        acc.append(lev)
    acc = np.array(acc)
    if q == np.inf:
        return float(max(total, acc.max(initial=0.0)))
    return float((total + np.sum(acc**q)) ** (1 / q))


@dataclass
class NTermCurve:
    N: np.ndarray
    sigma: np.ndarray
    tag: str = "l2-parseval"
    total: int = 0

    def as_rows(self):
        return [{"N": int(n), "sigma_N": float(s)} for n, s in zip(self.N, self.sigma)]


def _selected(cf: CoeffField, masks: dict | None):
    """Yield (level, values array) for retained coefficients."""
    if masks is None:
        yield cf.j0, cf.approx.ravel()
        for j, d in cf.details.items():
            yield j, d.ravel()
        return
    yield cf.j0, cf.approx[masks["approx"]].ravel()
    for j, d in cf.details.items():
        yield j, d[:, masks[j]].ravel()


def nterm_curve(cf: CoeffField, Ns, masks: dict | None = None, p: float = 2.0) -> NTermCurve:
    """Best N-term errors for the given N (sorted ascending)."""
    Ns = np.asarray(Ns, dtype=np.int64)
    if np.any(np.diff(Ns) < 0):
        raise ValueError("Ns must be sorted ascending")
    if p == 2:
        vals = np.concatenate([v for _, v in _selected(cf, masks)])
        w = vals * vals
        tag = "l2-parseval"
    else:
        parts = []
        for j, v in _selected(cf, masks):
            parts.append(np.abs(v) ** p * 2.0 ** (3 * j * (p / 2 - 1)))
        w = np.concatenate(parts)
        tag = "coefficient-proxy"
    total = len(w)
    if len(Ns) and Ns[-1] > total:
        raise ValueError(f"N = {Ns[-1]} exceeds the coefficient count {total}")
    w = np.sort(w)  # ascending: tail of the N largest removed = sum of first total-N
    tail = np.concatenate([[0.0], np.cumsum(w)])
    sig = tail[total - Ns] ** (1 / p)
    return NTermCurve(Ns, sig, tag, total)


def level_truncation_curve(cf: CoeffField, masks: dict | None = None) -> NTermCurve:
    """Errors of keeping everything up to level j, with N_j the kept count."""
    parts = list(_selected(cf, masks))
    count = len(parts[0][1])
    energies = [(j, float(np.sum(v * v)), len(v)) for j, v in parts[1:]]
    energies.sort()
    Ns, sig = [], []
    for i, (j, _, c) in enumerate(energies):
        count += c
        rest = sum(e for _, e, _ in energies[i + 1:])
        Ns.append(count)
        sig.append(np.sqrt(rest))
    return NTermCurve(np.array(Ns), np.array(sig), "level-truncation", count)


def fit_rate(curve: NTermCurve | tuple, window: slice | None = None) -> float:
    """Least-squares slope of log sigma_N against log N."""
    N, sig = (curve.N, curve.sigma) if isinstance(curve, NTermCurve) else curve
    N, sig = np.asarray(N, float), np.asarray(sig, float)
    if window is not None:
        N, sig = N[window], sig[window]
    if len(N) < 3:
        raise ValueError("need at least 3 points to fit a rate")
    if np.any(sig <= 0) or np.any(N <= 0):
        raise ValueError("zero values in the fit window")
    slope, _ = np.polyfit(np.log(N), np.log(sig), 1)
    return float(slope)
