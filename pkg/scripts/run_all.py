"""Run every figure script in turn, writing under results/ (or --out)."""

import argparse
import subprocess
import sys
from pathlib import Path

SCRIPTS = [
    "fig1_collapse_revival",
    "fig2_periodic_inversion",
    "fig3_packets",
    "fig4_retrieval",
    "fig5_7_cat",
    "fig8_overlap",
    "forward_oracle_study",
]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results")
    args = parser.parse_args()
    here = Path(__file__).resolve().parent
    for name in SCRIPTS:
        print(f"== {name}", flush=True)
        subprocess.run([sys.executable, str(here / f"{name}.py"), "--out", str(Path(args.out) / name)], check=True)


if __name__ == "__main__":
    main()
