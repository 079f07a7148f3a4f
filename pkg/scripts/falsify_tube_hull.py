"""Stress the interval reach hulls of a solved run with random in-tube controls.

    python scripts/falsify_tube_hull.py --out runs/reference [--trials 5000] [--substeps 100]

Reads the decision and hulls from the artifact directory, draws random
control trajectories inside the tube, integrates them densely and counts
points that leave their interval's hull.
"""
import argparse
import sys
from pathlib import Path

from rgreach import artifacts as art
from rgreach.chaser_reach import audit_hull_coverage
from rgreach.cli import load_run


def main(out, trials, substeps, seed):
    _, sc, dec = load_run(out)
    rep = audit_hull_coverage(sc.chaser, dec.tube(sc.directions), art.read_rtc(out), trials, seed=seed,
                         substeps=substeps)
    for k in ("trials", "points", "violations", "worst_margin"):
        print(f"{k:>13}: {rep[k]}")
    return 1 if rep["violations"] else 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, required=True)
    ap.add_argument("--trials", type=int, default=5000)
    ap.add_argument("--substeps", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    sys.exit(main(a.out, a.trials, a.substeps, a.seed))
