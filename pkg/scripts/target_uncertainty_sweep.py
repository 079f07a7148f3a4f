"""Sweep the initial attitude uncertainty and report how the target's
reachable grasp region grows.

    python scripts/target_uncertainty_sweep.py [--rho 0.05 0.1 0.17 0.3] [--trials 2000]

For each radius: final enclosing-ball radius, grasp-polytope extent, and a
Monte-Carlo enclosure audit.
"""
import argparse
import time

import numpy as np

from rgreach.config import default_config, initial_ball, run_target, target_model
from rgreach.target_reach import audit_enclosure


def sweep(rhos, trials, seed):
    cfg = default_config()
    print(f"{'rho':>6} {'final radius':>13} {'polytope diam [m]':>18} {'violations':>11} {'time [ms]':>10}")
    for rho in rhos:
        cfg.target.rho = rho
        t0 = time.perf_counter()
        tr = run_target(cfg)
        ms = 1e3 * (time.perf_counter() - t0)
        V = tr.polytope.vertices
        diam = float(np.max(np.linalg.norm(V[:, None] - V[None], axis=-1)))
        rep = audit_enclosure(target_model(cfg), initial_ball(cfg), tr.polytope, cfg.chaser.horizon, trials, seed)
        print(f"{rho:6.3f} {tr.balls[-1].radius:13.6f} {diam:18.6f} {rep['violations']:11d} {ms:10.1f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rho", type=float, nargs="+", default=[0.05, 0.1, 0.17, 0.3])
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    sweep(a.rho, a.trials, a.seed)
