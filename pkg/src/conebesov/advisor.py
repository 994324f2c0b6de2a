"""Parameter conditions of the Besov regularity results and the resulting
admissible smoothness ranges, rates and condition trails.

Condition ids have the form "<theorem>/<condition>", where <theorem> is one
of the keys of THEOREMS.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import PolyhedralCone
from .pencil import BCAssignment, PencilSpectrum, strip_free_check

THEOREMS = {
    "embedding-positive": "Besov embedding of weighted Sobolev spaces, positive edge exponents",
    "embedding-negative": "Besov embedding of weighted Sobolev spaces, some negative edge exponent",
    "embedding-w": "Besov embedding of the partially weighted spaces",
    "weighted-dirichlet": "weighted Sobolev regularity, Dirichlet problem",
    "weighted-neumann": "weighted Sobolev regularity, Neumann problem",
    "weighted-mixed": "weighted Sobolev regularity, mixed problem",
    "fractional-dirichlet": "fractional Sobolev regularity, Dirichlet problem",
    "fractional-neumann": "fractional Sobolev regularity, Neumann problem",
    "fractional-mixed": "fractional Sobolev regularity, mixed problem",
    "besov-dirichlet": "Besov regularity, Dirichlet problem",
    "besov-neumann": "Besov regularity, Neumann problem",
    "besov-mixed": "Besov regularity, mixed problem",
}


# ---------------------------------------------------------------------------
# open interval unions


@dataclass(frozen=True)
class IntervalSet:
    """Finite union of disjoint open intervals, sorted."""

    intervals: tuple = ()

    @classmethod
    def of(cls, pieces) -> "IntervalSet":
        iv = sorted((float(a), float(b)) for a, b in pieces if b > a)
        merged = []
        for a, b in iv:
            if merged and a < merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], b))
            else:
                merged.append((a, b))
        return cls(tuple(merged))

    @property
    def empty(self) -> bool:
        return not self.intervals

    @property
    def sup(self) -> float:
        return self.intervals[-1][1] if self.intervals else 0.0

    def contains(self, r) -> np.ndarray | bool:
        r = np.asarray(r, float)
        out = np.zeros(r.shape, dtype=bool)
        for a, b in self.intervals:
            out |= (r > a) & (r < b)
        return out if out.ndim else bool(out)

    def intersect(self, a: float, b: float) -> "IntervalSet":
        return IntervalSet.of((max(x, a), min(y, b)) for x, y in self.intervals)

    def as_list(self) -> list[list[float]]:
        return [[a, b] for a, b in self.intervals]


def tau_of(r: float, p: float = 2.0) -> float:
    """Integrability of the adaptivity scale: 1/tau = r/3 + 1/p."""
    return 1.0 / (r / 3.0 + 1.0 / p)


# ---------------------------------------------------------------------------
# embedding ranges


def _check_l(l):
    if int(l) != l or l <= 0:
        raise ValueError("l must be a positive integer")


def admissible_r_positive(l: int, delta, s: float) -> IntervalSet:
    """(0, min{l, 3(l - |delta|), 3s}) for edge exponents that are all positive."""
    _check_l(l)
    delta = np.asarray(delta, float)
    if np.any(delta <= 0):
        raise ValueError("all edge exponents must be positive")
    if not s > 0:
        raise ValueError("s must be positive")
    r_max = min(l, 3 * (l - delta.sum()), 3 * s)
    return IntervalSet.of([(0.0, r_max)])


def _terms(l, beta, delta):
    A = float(np.sum(delta))
    P = float(np.sum(delta[delta >= 0]))
    return {
        "|d|": A,
        "3/2(b-|d|+)": 1.5 * (beta - P),
        "3/2(l-|d|+)": 1.5 * (l - P),
        "3/2|d|+": 1.5 * P,
        "3/4b": 0.75 * beta,
        "3/4l": 0.75 * l,
    }


# (name, lower-bound terms, upper-bound terms); r lies strictly between max(lower) and min(upper)
REGIONS = (
    ("A", (), ("|d|", "3/2(b-|d|+)")),
    ("B", ("3/2(b-|d|+)",), ("|d|", "3/2(l-|d|+)")),
    ("i", ("3/2(l-|d|+)", "3/2(b-|d|+)", "|d|", "3/4b"), ("3/2|d|+", "3/4l")),
    ("ii", ("|d|", "3/4b"), ("3/2|d|+", "3/4l", "3/2(b-|d|+)")),
    ("iii", ("|d|", "3/2(b-|d|+)"), ("3/2|d|+", "3/4b", "3/2(l-|d|+)")),
    ("iv", ("|d|",), ("3/2|d|+", "3/4b", "3/2(b-|d|+)")),
    ("C", ("3/2|d|+", "3/4b"), ("3/4l",)),
    ("D", ("3/2|d|+",), ("3/4b",)),
)


def region_intervals(l, beta, delta) -> dict:
    t = _terms(l, beta, np.asarray(delta, float))
    out = {}
    for name, lo, hi in REGIONS:
        a = max([0.0] + [t[k] for k in lo])
        b = min(t[k] for k in hi)
        out[name] = (a, b)
    return out


def admissible_r_negative(l: int, beta: float, delta, s: float) -> IntervalSet:
    """Union of the region conditions for edge exponents with a negative entry,
    intersected with (0, 3s)."""
    _check_l(l)
    delta = np.asarray(delta, float)
    if not np.any(delta < 0):
        raise ValueError("at least one edge exponent must be negative")
    if not l > beta:
        raise ValueError("needs l > beta")
    return IntervalSet.of(region_intervals(l, beta, delta).values()).intersect(0.0, 3 * s)


def regions_bruteforce(l, beta, delta, s, r: np.ndarray) -> np.ndarray:
    """Pointwise evaluation of the raw region inequalities on an r grid."""
    delta = np.asarray(delta, float)
    A = delta.sum()
    P = delta[delta >= 0].sum()
    ok = {
        "A": (r < A) & (r < 1.5 * (beta - P)),
        "B": (1.5 * (beta - P) < r) & (r < A) & (r < 1.5 * (l - P)),
        "i": (r > 1.5 * (l - P)) & (r > 1.5 * (beta - P)) & (r > A) & (r > 0.75 * beta)
        & (r < 1.5 * P) & (r < 0.75 * l),
        "ii": (r > A) & (r > 0.75 * beta) & (r < 1.5 * P) & (r < 0.75 * l) & (r < 1.5 * (beta - P)),
        "iii": (r > A) & (r > 1.5 * (beta - P)) & (r < 1.5 * P) & (r < 0.75 * beta) & (r < 1.5 * (l - P)),
        "iv": (r > A) & (r < 1.5 * P) & (r < 0.75 * beta) & (r < 1.5 * (beta - P)),
        "C": (r > 1.5 * P) & (r > 0.75 * beta) & (r < 0.75 * l),
        "D": (r > 1.5 * P) & (r < 0.75 * beta),
    }
    return (r > 0) & (r < 3 * s) & np.logical_or.reduce(list(ok.values()))


# ---------------------------------------------------------------------------
# condition trail


@dataclass(frozen=True)
class Condition:
    id: str
    passed: bool
    lhs: object = None
    rhs: object = None

    @property
    def theorem(self) -> str:
        return self.id.split("/")[0]

    def as_dict(self) -> dict:
        return {"id": self.id, "pass": bool(self.passed), "lhs": _plain(self.lhs), "rhs": _plain(self.rhs)}


def _plain(v):
    if isinstance(v, (tuple, list, np.ndarray)):
        return [_plain(x) for x in v]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


@dataclass
class WeightCheck:
    entries: list

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def per_edge(self) -> list[bool]:
        return [e.passed for e in self.entries]


def _between(theorem, j, lo, mid, hi):
    return Condition(f"{theorem}/edge-weight[{j}]", bool(lo < mid < hi), mid, (lo, hi))


def dirichlet_weight_check(l, delta, strips) -> WeightCheck:
    """-delta_+ < delta_j - l + 1 < delta_- at every edge."""
    return WeightCheck([_between("weighted-dirichlet", j, -dp, d - l + 1, dm)
                        for j, (d, (dp, dm)) in enumerate(zip(delta, strips))])


def neumann_weight_check(l, delta, strips) -> WeightCheck:
    """max(l - delta_+, 0) < delta_j + 1 < l at every edge."""
    return WeightCheck([_between("weighted-neumann", j, max(l - dp, 0.0), d + 1, l)
                        for j, (d, (dp, _)) in enumerate(zip(delta, strips))])


def mixed_weight_check(l, delta, strips, jtilde) -> WeightCheck:
    """l - delta_+ < delta_j + 1 < l on J~, with the lower bound raised to
    l - 2 off J~."""
    out = []
    for j, (d, (dp, _)) in enumerate(zip(delta, strips)):
        lo = l - dp if j in jtilde else max(l - dp, l - 2)
        out.append(_between("weighted-mixed", j, lo, d + 1, l))
    return WeightCheck(out)


# ---------------------------------------------------------------------------
# problem description and report


@dataclass(frozen=True)
class Constants:
    alpha0_dirichlet: float = 1.5
    alpha0_neumann: float = 1.5
    alpha0_mixed: float = 1.25
    eps_mixed: float = 0.1

    def __post_init__(self):
        if not (self.alpha0_dirichlet >= 1.5 and self.alpha0_neumann >= 1.5 and self.alpha0_mixed >= 1.25):
            raise ValueError("alpha0 constants lie below their known lower bounds")
        if not self.eps_mixed > 0:
            raise ValueError("eps_mixed must be positive")


@dataclass(frozen=True)
class ProblemSpec:
    cone: PolyhedralCone
    bc: BCAssignment
    l: int
    beta: float
    delta: tuple
    radius: float = 1.0
    f_in_L2: bool = True
    homogeneous: bool = True
    s: float | None = None
    mean_zero: bool = False
    constants: Constants = field(default_factory=Constants)

    def __post_init__(self):
        object.__setattr__(self, "delta", tuple(float(d) for d in self.delta))
        if len(self.delta) != self.cone.n:
            raise ValueError("delta length differs from the edge count")
        if len(self.bc.faces) != self.cone.n:
            raise ValueError("boundary assignment length differs from the face count")

    @property
    def variant(self) -> str:
        return self.bc.variant


@dataclass(frozen=True)
class SobolevBound:
    value: float
    open: bool  # True: every alpha below value is attained, value itself is not
    theorem: str


class AdvisorFailure(ValueError):
    def __init__(self, condition: Condition, trail: list):
        self.condition = condition
        self.trail = list(trail)
        super().__init__(f"condition {condition.id} failed: {THEOREMS[condition.theorem]} "
                         f"(lhs={_plain(condition.lhs)}, rhs={_plain(condition.rhs)})")

    def as_dict(self) -> dict:
        return {"failed": self.condition.id, "theorem": THEOREMS[self.condition.theorem],
                "trail": [c.as_dict() for c in self.trail]}


_S_RANGE = {"dirichlet": (0.5, 1.5), "neumann": (0.5, 1.5)}


def _sobolev_conditions(spec: ProblemSpec) -> tuple[SobolevBound, list]:
    v = spec.variant
    th = f"fractional-{v}"
    c = spec.constants
    if spec.homogeneous:
        a0 = {"dirichlet": c.alpha0_dirichlet, "neumann": c.alpha0_neumann, "mixed": c.alpha0_mixed}[v]
        return SobolevBound(a0, True, th), []
    lo, hi = _S_RANGE.get(v, (1 - c.eps_mixed, 1 + c.eps_mixed))
    conds = [Condition(f"{th}/s-interval", spec.s is not None and lo < spec.s < hi, spec.s, (lo, hi))]
    if v == "neumann":
        conds.append(Condition(f"{th}/mean-zero-data", bool(spec.mean_zero), spec.mean_zero, True))
    return SobolevBound(float(spec.s) if spec.s is not None else float("nan"), False, th), conds


def sobolev_bound(spec: ProblemSpec) -> SobolevBound:
    """Fractional Sobolev index of the solution: alpha0 (open) for homogeneous
    data, s for inhomogeneous data."""
    bound, conds = _sobolev_conditions(spec)
    for cnd in conds:
        if not cnd.passed:
            raise AdvisorFailure(cnd, conds)
    return bound


@dataclass
class RegularityReport:
    sobolev: SobolevBound
    besov_admissible: IntervalSet
    trail: list
    p: float = 2.0
    notes: list = field(default_factory=list)

    @property
    def sobolev_bound(self) -> float:
        return self.sobolev.value

    @property
    def r_max(self) -> float:
        return self.besov_admissible.sup

    def tau_of(self, r: float) -> float:
        return tau_of(r, self.p)

    @property
    def tau(self) -> float:
        return self.tau_of(self.r_max)

    @property
    def adaptive_rate(self) -> float:
        return self.r_max / 3.0

    @property
    def uniform_rate(self) -> float:
        return self.sobolev.value / 3.0

    @property
    def gain_factor(self) -> float:
        return self.adaptive_rate / self.uniform_rate

    def as_dict(self) -> dict:
        return {
            "sobolev_bound": self.sobolev.value,
            "sobolev_bound_open": self.sobolev.open,
            "besov_intervals": self.besov_admissible.as_list(),
            "r_max": self.r_max,
            "tau": self.tau,
            "adaptive_rate": self.adaptive_rate,
            "uniform_rate": self.uniform_rate,
            "gain_factor": self.gain_factor,
            "notes": list(self.notes),
            "trail": [c.as_dict() for c in self.trail],
        }

    def summary(self) -> str:
        iv = ", ".join(f"({a:.6g}, {b:.6g})" for a, b in self.besov_admissible.intervals) or "empty"
        bound = f"{'< ' if self.sobolev.open else '= '}{self.sobolev.value:g}"
        lines = [
            f"Sobolev index alpha {bound}",
            f"admissible Besov smoothness r in {iv}",
            f"r_max = {self.r_max:.6g} (excluded), tau(r_max) = {self.tau:.6g}",
            f"adaptive rate r_max/3 = {self.adaptive_rate:.6g}, uniform rate alpha/3 = {self.uniform_rate:.6g}",
            f"gain factor {self.gain_factor:.4g}",
            "conditions:",
        ]
        lines += [f"  [{'pass' if c.passed else 'FAIL'}] {c.id}" for c in self.trail]
        lines += [f"note: {n}" for n in self.notes]
        return "\n".join(lines)


def advise(spec: ProblemSpec, spectrum: PencilSpectrum) -> RegularityReport:
    """Run every hypothesis of the variant's Besov regularity result and
    return the admissible range, or raise AdvisorFailure naming the first
    condition that fails."""
    v = spec.variant
    weighted, besov = f"weighted-{v}", f"besov-{v}"
    l, beta, delta = spec.l, spec.beta, np.array(spec.delta)
    _check_l(l)
    trail = []
    notes = []

    trail.append(Condition(f"{besov}/l>beta", l > beta, l, beta))
    trail.append(Condition(f"{besov}/f-in-L2", bool(spec.f_in_L2), spec.f_in_L2, True))
    if v != "dirichlet":
        trail.append(Condition(f"{weighted}/l>=2", l >= 2, l, 2))
    if v == "mixed":
        iface = spec.bc.interface_edges(spec.cone)
        trail.append(Condition(f"{besov}/two-interface-edges", len(iface) == 2, sorted(iface), 2))

    strips = [e.strip for e in spectrum.edges]
    if v == "dirichlet":
        wc = dirichlet_weight_check(l, delta, strips)
    elif v == "neumann":
        wc = neumann_weight_check(l, delta, strips)
    else:
        wc = mixed_weight_check(l, delta, strips, spec.bc.jtilde(spec.cone))
    trail.extend(wc.entries)

    sc = strip_free_check(l, beta, spectrum)
    trail.append(Condition(f"{weighted}/strip-free-line", sc.ok, sc.line, sc.nearest))

    bound, sconds = _sobolev_conditions(spec)
    trail.extend(sconds)

    if np.any(delta < 0):
        if v != "dirichlet":
            jt = spec.bc.jtilde(spec.cone) if v == "mixed" else frozenset()
            for j in range(len(delta)):
                if j not in jt:
                    trail.append(Condition(f"embedding-w/delta-lower[{j}]", delta[j] > -1.0, delta[j], -1.0))
        route = "negative"
    elif np.all(delta > 0):
        route = "positive"
    else:
        trail.append(Condition(f"{besov}/edge-exponent-sign", False, list(delta),
                               "all positive or at least one negative"))
        route = None

    failed = [c for c in trail if not c.passed]
    if failed:
        raise AdvisorFailure(failed[0], trail)

    alpha = bound.value
    if route == "positive":
        adm = admissible_r_positive(l, delta, alpha)
    else:
        adm = admissible_r_negative(l, beta, delta, alpha)
        notes.append("negative edge exponent: r < 3*alpha together with one of the region conditions")
        notes.append("region conditions are sufficient, not claimed to be maximal")
    if bound.open:
        notes.append(f"alpha is an open bound: every alpha < {alpha:g} is attained")
    if v == "mixed" and not spec.homogeneous:
        notes.append("the trace-range epsilon is a configured value; its true size is unknown")
    return RegularityReport(bound, adm, trail, 2.0, notes)
