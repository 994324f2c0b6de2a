"""Run the advisor report for every shipped demo config into runs/<name>."""

import argparse
from pathlib import Path

from conebesov.cli import main

ROOT = Path(__file__).resolve().parents[1]
DEMOS = ["octant_dirichlet_demo", "octant_failing_weight", "octant_failing_strip", "octant_negative_delta"]


def run(out: Path) -> dict:
    codes = {}
    for name in DEMOS:
        codes[name] = main(["report", "--config", str(ROOT / "configs" / f"{name}.json"), "--out", str(out / name)])
    return codes


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(ROOT / "runs"))
    for name, code in run(Path(ap.parse_args().out)).items():
        print(f"{name}: exit {code}")
