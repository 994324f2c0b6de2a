"""Command line entry point: ``conebesov <command> --config FILE --out DIR``.

Exit codes: 0 on success or a passing verdict, 2 on a failing verdict
(advisor failure, verification or cardinality verdict false), 1 on errors.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import advisor as A
from . import experiments as E
from .config import ExperimentConfig

log = logging.getLogger("conebesov")

OK, ERROR, VERDICT_FAIL = 0, 1, 2


def _pencil(cfg, out):
    _, paths = E.run_pencil(cfg, out)
    return OK, paths


def _advise(cfg, out):
    rep, paths = E.run_advise(cfg, out)
    if isinstance(rep, A.AdvisorFailure):
        log.warning("%s", rep)
        return VERDICT_FAIL, paths
    print(rep.summary())
    return OK, paths


def _sample(cfg, out):
    return OK, E.run_sample(cfg, out)


def _analyze(cfg, out):
    return OK, E.run_analyze(cfg, out)


def _nterm(cfg, out):
    _, paths = E.run_nterm(cfg, out)
    return OK, paths


def _cardinality(cfg, out):
    v = E.run_cardinality_study(cfg, out)
    print(f"k spread {v.k_spread:.4g}, m spread {v.m_spread:.4g} (limit {v.max_spread:g}): "
          f"{'bounded' if v.passed else 'NOT bounded'}")
    return (OK if v.passed else VERDICT_FAIL), v.artifacts


def _verify(cfg, out):
    try:
        r = E.run_verify_embedding(cfg, out)
    except A.AdvisorFailure as f:
        # the configured function class is not advisor-admissible
        raise RuntimeError(f"verification needs an admissible weight class: {f}") from f
    print(f"best N-term slope {r.adaptive_slope:.4f}, level-truncation slope {r.uniform_slope:.4f}, "
          f"predicted rate {r.predicted_rate:.4f}: {'pass' if r.passed else 'FAIL'}")
    return (OK if r.passed else VERDICT_FAIL), r.artifacts


def _report(cfg, out):
    rep = E.run_report(cfg, out)
    print(f"report {rep.status}: {out}")
    return (OK if rep.passed else VERDICT_FAIL), []


COMMANDS = {
    "pencil": _pencil, "advise": _advise, "sample": _sample, "analyze": _analyze,
    "nterm": _nterm, "cardinality": _cardinality, "verify": _verify, "report": _report,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="conebesov", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="experiment config (JSON)")
    ap.add_argument("--out", required=True, help="run directory for all outputs")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = ExperimentConfig.load(args.config)
        code, paths = COMMANDS[args.command](cfg, args.out)
    except Exception as exc:  # any stage error maps to exit code 1
        log.error("%s failed: %s", args.command, exc)
        if args.verbose:
            log.exception("traceback")
        return ERROR
    for p in paths:
        log.info("wrote %s", p)
    return code


if __name__ == "__main__":
    sys.exit(main())
