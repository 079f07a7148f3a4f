"""Solve the reference interception scenario end to end and print a summary.

    python scripts/run_reference_scenario.py [--config configs/reference.toml] [--out runs/reference]

Runs target reachability, the reachability-guaranteed solve, the artifact
verifier and the plot-table export, in that order.
"""
import argparse
import sys
from pathlib import Path

from rgreach import artifacts as art
from rgreach.cli import main

ROOT = Path(__file__).resolve().parents[1]


def run(config, out, trials):
    steps = [
        ["solve", "--config", str(config), "--out", str(out), "--trials", str(trials)],
        ["verify", "--out", str(out), "--trials", str(trials)],
        ["export", "--out", str(out), "--dest", str(out / "plots")],
    ]
    for argv in steps:
        code = main(argv)
        if code:
            return code
    s = art.read_json(out / "summary.json")
    r = art.read_json(out / "reports.json")
    rows = [
        ("status", s["status"]),
        ("outer iterations", s["iterations"]),
        ("objective [N^2 s]", f"{s['objective']:.6f}"),
        ("control-tube radius [N]", f"{s['R_delta']:.6f}"),
        ("max violation", f"{s['max_violation']:.2e}"),
        ("containment residual", f"{s['containment_residual']:.2e}"),
        ("boundary gap [m]", f"{s['touch_distance']:.2e}"),
        ("nominal endpoint miss [m]", f"{s['nominal_endpoint_distance']:.6f}"),
        ("solve time [s]", f"{r['solve_time_s']:.2f}"),
    ]
    width = max(len(k) for k, _ in rows)
    for k, v in rows:
        print(f"{k:<{width}}  {v}")
    return 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", type=Path, default=ROOT / "configs" / "reference.toml")
    ap.add_argument("--out", type=Path, default=ROOT / "runs" / "reference")
    ap.add_argument("--trials", type=int, default=1000)
    a = ap.parse_args()
    sys.exit(run(a.config, a.out, a.trials))
