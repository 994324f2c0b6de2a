"""End-to-end experiments: pencil tables, advisor reports, coefficient studies,
best N-term rate fits and the embedding verification.

Every run writes into one directory and nothing else. Tables are CSV with a
header row and floats printed with 17 significant digits, so reruns of the
same config are byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
import platform
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import advisor as A
from . import bins as B
from . import wavelets as W
from .config import ConfigError, ExperimentConfig
from .geometry import TruncatedCone
from .pencil import PencilSpectrum, pencil_spectrum

FIELD_MAGIC = b"CBFIELD1"
_HEADER = struct.Struct("<8s3q3d3d")


# ---------------------------------------------------------------------------
# file formats


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path, rows: list[dict], header: list[str] | None = None) -> Path:
    path = Path(path)
    header = header or (list(rows[0]) if rows else [])
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(r.get(h)) for h in header])
    return path


def read_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(type(o).__name__)


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def write_field(path, values: np.ndarray, spacing, origin) -> Path:
    """Header: magic, dims (3 x int64), spacing, origin (3 x float64 each);
    body: float64 little-endian, C order."""
    values = np.ascontiguousarray(values, dtype="<f8")
    if values.ndim != 3:
        raise ValueError("field must be three-dimensional")
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(FIELD_MAGIC, *values.shape, *map(float, spacing), *map(float, origin)))
        fh.write(values.tobytes(order="C"))
    return path


def read_field(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    data = Path(path).read_bytes()
    magic, *rest = _HEADER.unpack_from(data)
    if magic != FIELD_MAGIC:
        raise ValueError(f"{path}: not a field file")
    dims, spacing, origin = rest[:3], np.array(rest[3:6]), np.array(rest[6:9])
    body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    if body.size != int(np.prod(dims)):
        raise ValueError(f"{path}: body holds {body.size} values, header says {dims}")
    return body.reshape(dims).copy(), spacing, origin


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# ---------------------------------------------------------------------------
# stages


def _out(out) -> Path:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _spectrum(cfg: ExperimentConfig) -> PencilSpectrum:
    s = cfg.section("pencil")
    return pencil_spectrum(cfg.cone, cfg.bc_assignment, count=int(s.get("count", 6)),
                           refinements=int(s.get("refinements", 5)), m_max=int(s.get("m_max", 4)))


def run_pencil(cfg: ExperimentConfig, out) -> tuple[PencilSpectrum, list[Path]]:
    out = _out(out)
    sp = _spectrum(cfg)
    edges = sp.table_edges()
    paths = [write_csv(out / "pencil_edges.csv", edges),
             write_csv(out / "pencil_vertex.csv", sp.table_vertex())]
    return sp, paths


def run_advise(cfg: ExperimentConfig, out, spectrum: PencilSpectrum | None = None):
    """Returns (report or failure, written paths)."""
    out = _out(out)
    sp = spectrum if spectrum is not None else _spectrum(cfg)
    try:
        rep = A.advise(cfg.problem(), sp)
    except A.AdvisorFailure as f:
        return f, [write_json(out / "advisor_failure.json", f.as_dict())]
    (out / "advisor_report.txt").write_text(rep.summary() + "\n")
    return rep, [write_json(out / "advisor_report.json", rep.as_dict()), out / "advisor_report.txt"]


def sample(cfg: ExperimentConfig) -> np.ndarray:
    wb = cfg.wavelet_block
    origin, side = cfg.sampling_box()
    return W.sample_function(cfg.singular_function(), wb.grid, origin, side)


def run_sample(cfg: ExperimentConfig, out) -> list[Path]:
    """Write point values of the configured function at the cell centres."""
    out = _out(out)
    wb = cfg.wavelet_block
    origin, side = cfg.sampling_box()
    h = side / wb.grid
    vals = sample(cfg) / h**1.5
    return [write_field(out / "function.field", vals, (h, h, h),
                        tuple(o + h / 2 for o in origin))]


def analyze_config(cfg: ExperimentConfig) -> tuple[W.CoeffField, dict]:
    wb = cfg.wavelet_block
    origin, side = cfg.sampling_box()
    cf = W.analyze(sample(cfg), cfg.wavelet_system, wb.levels, origin=origin, side=side)
    return cf, B.kmask(cf, cfg.truncated_cone)


def run_analyze(cfg: ExperimentConfig, out, coeffs=None) -> list[Path]:
    out = _out(out)
    cf, masks = coeffs or analyze_config(cfg)
    rows = [{"level": cf.j0, "kind": "scaling", "count": cf.approx.size,
             "count_in_K": int(masks["approx"].sum()), "energy": float(np.sum(cf.approx**2)),
             "energy_in_K": float(np.sum(cf.approx[masks["approx"]] ** 2)),
             "max_abs_in_K": float(np.max(np.abs(cf.approx[masks["approx"]]), initial=0.0))}]
    for j in cf.levels:
        d = cf.details[j]
        sel = d[:, masks[j]]
        rows.append({"level": j, "kind": "wavelet", "count": d.size, "count_in_K": sel.size,
                     "energy": float(np.sum(d * d)), "energy_in_K": float(np.sum(sel * sel)),
                     "max_abs_in_K": float(np.max(np.abs(sel), initial=0.0))})
    return [write_csv(out / "coefficient_levels.csv", rows)]


@dataclass
class RateCurves:
    N: np.ndarray
    adaptive: np.ndarray
    uniform: np.ndarray
    total: int


def rate_curves(cf: W.CoeffField, masks: dict) -> RateCurves:
    """Best N-term and level-truncation errors on the level-truncation counts."""
    lt = W.level_truncation_curve(cf, masks)
    nt = W.nterm_curve(cf, lt.N, masks)
    return RateCurves(lt.N, nt.sigma, lt.sigma, lt.total)


def fit_window(curves: RateCurves, min_points: int = 4) -> np.ndarray:
    """Indices used in the slope fit: usable points minus the two coarsest and the finest."""
    usable = np.flatnonzero((curves.uniform > 0) & (curves.adaptive > 0))
    if len(usable) < min_points:
        raise ValueError(f"only {len(usable)} usable levels; at least {min_points} are needed for a stable fit")
    win = usable[2:-1]
    if len(win) < 3:
        raise ValueError("fit window holds fewer than 3 points; add levels")
    return win


def run_nterm(cfg: ExperimentConfig, out, coeffs=None) -> tuple[RateCurves, list[Path]]:
    out = _out(out)
    cf, masks = coeffs or analyze_config(cfg)
    cur = rate_curves(cf, masks)
    rows = [{"N": n, "sigma_nterm": a, "sigma_level": u}
            for n, a, u in zip(cur.N, cur.adaptive, cur.uniform)]
    paths = [write_csv(out / "nterm.csv", rows)]
    Ns = cfg.section("nterm").get("Ns")
    if Ns:
        extra = W.nterm_curve(cf, sorted(int(n) for n in Ns), masks)
        paths.append(write_csv(out / "nterm_requested.csv", extra.as_rows()))
    return cur, paths


# ---------------------------------------------------------------------------
# embedding verification


@dataclass
class VerificationResult:
    predicted_intervals: list
    predicted_r_max: float
    predicted_rate: float  # r_max / 3
    sobolev_rate: float  # alpha / 3
    adaptive_slope: float
    uniform_slope: float
    slope_tolerance: float
    passed: bool
    fit_points: list = field(default_factory=list)
    reference_uniform_slope: float | None = None  # -(1 + lambda)/3 for edge functions
    artifacts: list = field(default_factory=list)

    @property
    def adaptive_rate(self) -> float:
        return -self.adaptive_slope

    @property
    def uniform_rate(self) -> float:
        return -self.uniform_slope

    @property
    def gap(self) -> float:
        """How much steeper the best N-term slope is than the uniform one."""
        return self.uniform_slope - self.adaptive_slope

    def as_dict(self) -> dict:
        d = asdict(self)
        d["artifacts"] = [str(p) for p in self.artifacts]
        d["gap"] = self.gap
        return d


def verdict(adaptive_slope: float, uniform_slope: float, predicted_rate: float, tol: float) -> bool:
    return bool(-adaptive_slope >= predicted_rate - tol and -adaptive_slope >= -uniform_slope - tol)


def run_verify_embedding(cfg: ExperimentConfig, out, spectrum=None, coeffs=None) -> VerificationResult:
    out = _out(out)
    tol = float(cfg.section("verify").get("slope_tolerance", 0.15))
    rep, paths = run_advise(cfg, out, spectrum)
    if isinstance(rep, A.AdvisorFailure):
        raise rep
    fn = cfg.singular_function()
    coeffs = coeffs or analyze_config(cfg)
    cur, p2 = run_nterm(cfg, out, coeffs)
    win = fit_window(cur)
    a = W.fit_rate((cur.N[win], cur.adaptive[win]))
    u = W.fit_rate((cur.N[win], cur.uniform[win]))
    ref = -(1.0 + fn.exponent) / 3.0 if fn.kind == "edge" else None
    res = VerificationResult(rep.besov_admissible.as_list(), rep.r_max, rep.adaptive_rate,
                             rep.uniform_rate, a, u, tol, verdict(a, u, rep.adaptive_rate, tol),
                             [int(n) for n in cur.N[win]], ref, paths + p2)
    res.artifacts.append(out / "verification.json")
    write_json(out / "verification.json", res.as_dict())
    return res


# ---------------------------------------------------------------------------
# cardinality study


@dataclass
class CardinalityVerdict:
    levels: list
    k_spread: float  # max/min over j of sup_k |Lambda_{j,k}|/k^2
    m_spread: float  # max/min over j of sup_{k,m} |Lambda_{j,k,m}|/m
    edge_m_spread: float  # the same over bins with 2m <= k only
    max_spread: float
    per_level: list
    passed: bool
    artifacts: list = field(default_factory=list)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["artifacts"] = [str(p) for p in self.artifacts]
        return d


def _edge_m_ratio(t: B.CardinalityTable, kmin: int) -> float:
    kmax = 2 ** (t.j - 1)
    vals = [c / m for (k, m), c in t.by_km.items() if kmin <= k <= kmax and 1 <= m and 2 * m <= k]
    return max(vals) if vals else 0.0


def _spread(vals) -> float:
    vals = np.asarray(vals, float)
    return float(vals.max() / vals.min()) if vals.min() > 0 else np.inf


def cardinality_study(tk: TruncatedCone, levels, k_min: int = 2, m_k_min: int = 4,
                      max_spread: float = 4.0) -> tuple[CardinalityVerdict, list, list]:
    levels = [int(j) for j in levels]
    if not levels or min(levels) < 4:
        raise ValueError("cardinality study needs levels j >= 4 (insufficient levels)")
    krows, mrows, per = [], [], []
    for j in levels:
        t = B.bin_cardinalities(tk, j)
        for k in sorted(t.by_k):
            c = t.by_k[k]
            krows.append({"j": j, "k": k, "count": c, "count_over_k2": c / k**2 if k else None})
        for (k, m) in sorted(t.by_km):
            c = t.by_km[(k, m)]
            mrows.append({"j": j, "k": k, "m": m, "count": c, "count_over_m": c / m if m else None})
        per.append({"j": j, "sup_k": t.sup_k_ratio(k_min), "sup_m": t.sup_m_ratio(m_k_min),
                    "sup_m_edge": _edge_m_ratio(t, m_k_min)})
    ks = _spread([p["sup_k"] for p in per])
    ms = _spread([p["sup_m"] for p in per])
    es = _spread([p["sup_m_edge"] for p in per])
    v = CardinalityVerdict(levels, ks, ms, es, max_spread, per, bool(ks <= max_spread and ms <= max_spread))
    return v, krows, mrows


def run_cardinality_study(cfg: ExperimentConfig, out) -> CardinalityVerdict:
    out = _out(out)
    s = cfg.section("cardinality")
    v, krows, mrows = cardinality_study(cfg.truncated_cone, s.get("levels", [4, 5, 6]),
                                        int(s.get("k_min", 2)), int(s.get("m_k_min", 4)),
                                        float(s.get("max_spread", 4.0)))
    v.artifacts = [write_csv(out / "cardinality_k.csv", krows, ["j", "k", "count", "count_over_k2"]),
                   write_csv(out / "cardinality_km.csv", mrows, ["j", "k", "m", "count", "count_over_m"]),
                   write_csv(out / "cardinality_levels.csv", v.per_level)]
    v.artifacts.append(out / "cardinality_verdict.json")
    write_json(out / "cardinality_verdict.json", v.as_dict())
    return v


# ---------------------------------------------------------------------------
# full report


def versions() -> dict:
    return {"conebesov": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


@dataclass
class RunReport:
    status: str  # "pass", "advisor-failure" or "verify-failure"
    directory: Path
    advisor: object
    verification: VerificationResult | None
    manifest: dict

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def write_manifest(cfg: ExperimentConfig, out: Path, artifacts, status: str, extra=None) -> dict:
    inputs = [{"path": cfg.source or "<inline>", "sha256": cfg.digest}]
    arts = sorted({Path(p).resolve() for p in artifacts})
    man = {
        "name": cfg.name,
        "status": status,
        "inputs": inputs,
        "versions": versions(),
        "seeds": {"experiment": cfg.seed, "eigensolver_start": "seeded by the free node count"},
        "artifacts": [{"file": p.relative_to(out.resolve()).as_posix(), "sha256": sha256_file(p)}
                      for p in arts],
    }
    if extra:
        man.update(extra)
    write_json(out / "manifest.json", man)
    return man


def run_report(cfg: ExperimentConfig, out) -> RunReport:
    """pencil -> advise -> (optional) verify, with a manifest of everything written."""
    out = _out(out)
    sp, paths = run_pencil(cfg, out)
    rep, p2 = run_advise(cfg, out, sp)
    paths += p2
    ver = None
    if isinstance(rep, A.AdvisorFailure):
        status = "advisor-failure"
    else:
        status = "pass"
        if cfg.section("report").get("verify", False):
            ver = run_verify_embedding(cfg, out, sp)
            paths += ver.artifacts
            status = "pass" if ver.passed else "verify-failure"
    for p in paths:
        if out.resolve() not in Path(p).resolve().parents:
            raise ConfigError(f"artifact {p} escaped the run directory")
    man = write_manifest(cfg, out, paths, status)
    return RunReport(status, out, rep, ver, man)
