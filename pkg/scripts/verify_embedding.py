"""Best N-term versus level-truncation rates for the reentrant and mixed edge functions."""

import argparse
from pathlib import Path

from conebesov import experiments as E
from conebesov.config import ExperimentConfig

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("configs", nargs="*", default=["lshape_verify", "lshape_mixed_verify"])
    ap.add_argument("--out", default=str(ROOT / "runs"))
    args = ap.parse_args()
    print(f"{'config':24s} {'N-term':>8s} {'uniform':>8s} {'theory':>8s} {'r_max/3':>8s}  verdict")
    for name in args.configs:
        cfg = ExperimentConfig.load(ROOT / "configs" / f"{name}.json")
        r = E.run_verify_embedding(cfg, Path(args.out) / name)
        ref = r.reference_uniform_slope if r.reference_uniform_slope is not None else float("nan")
        print(f"{name:24s} {r.adaptive_slope:8.3f} {r.uniform_slope:8.3f} {ref:8.3f} "
              f"{r.predicted_rate:8.3f}  {'pass' if r.passed else 'FAIL'}")
