"""Lattice-cube bin cardinalities on the octant and the Fichera complement."""

import argparse
from pathlib import Path

from conebesov import experiments as E
from conebesov.config import ExperimentConfig

ROOT = Path(__file__).resolve().parents[1]

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("configs", nargs="*", default=["cardinality_octant", "cardinality_fichera_j4_7",
                                                   "cardinality_fichera"])
    ap.add_argument("--out", default=str(ROOT / "runs"))
    args = ap.parse_args()
    for name in args.configs:
        v = E.run_cardinality_study(ExperimentConfig.load(ROOT / "configs" / f"{name}.json"),
                                    Path(args.out) / name)
        print(f"{name}: levels {v.levels}")
        for row in v.per_level:
            print(f"  j={row['j']}  sup count/k^2 {row['sup_k']:7.3f}  sup count/m {row['sup_m']:8.3f}"
                  f"  (bins with 2m <= k: {row['sup_m_edge']:7.3f})")
        print(f"  spreads k {v.k_spread:.3g}, m {v.m_spread:.3g}, edge-dominated m {v.edge_m_spread:.3g}: "
              f"{'bounded' if v.passed else 'NOT bounded'} (limit {v.max_spread:g})")
