"""Command-line driver: ``rgreach {target-reach,solve,verify,export}``.

Exit codes: 0 success, 1 audit or verification failure, 2 configuration
error, 3 target reachability failure, 4 optimization failure.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import artifacts as art
from .artifacts import FILES, SCHEMA
from .chaser_reach import audit_hull_coverage, dense_rollout, rollout
from .config import (
    build_scenario,
    config_from_dict,
    initial_ball,
    load_config,
    run_target,
    solver_options,
    target_model,
)
from .errors import ConfigError, Infeasible, NoConvergence, NotStronglyConvex, ReachError
from .rgocp import assemble_nlp, audits_clean, decision_report, solve_rgocp, validate_solution
from .target_reach import audit_enclosure

EXIT_OK, EXIT_AUDIT, EXIT_CONFIG, EXIT_TARGET, EXIT_SOLVE = 0, 1, 2, 3, 4


def _fail(stage: str, msg: str, code: int) -> int:
    print(f"[{stage}] FAILED: {msg}", file=sys.stderr)
    return code


def _target_stage(cfg, out: Path, trials: int, seed: int):
    t0 = time.perf_counter()
    tr = run_target(cfg)
    elapsed = time.perf_counter() - t0
    print(f"[target-reach] propagated {len(tr.cover.samples)} orientations over {len(tr.times)} steps "
          f"in {1e3 * elapsed:.1f} ms; final MEGB radius {tr.balls[-1].radius:.6f} rad")
    enclosure = audit_enclosure(target_model(cfg), initial_ball(cfg), tr.polytope, float(tr.times[-1]), trials, seed)
    art.write_json(out / FILES["config"], cfg.to_dict())
    art.write_megb(out, tr.times, tr.balls)
    art.write_polytope(out, tr.polytope)
    art.write_json(out / FILES["target"], {
        "y_nom": tr.y_nom,
        "nominal_rotation": tr.nominal_rotation,
        "cover_delta": tr.cover.delta,
        "final_radius": tr.balls[-1].radius,
        "enclosure_audit": enclosure,
    })
    return tr, enclosure


def run_target_reach(config, out, trials=None, seed=None) -> int:
    try:
        cfg = load_config(config)
    except ConfigError as exc:
        return _fail("config", str(exc), EXIT_CONFIG)
    out = Path(out)
    trials = cfg.audit.enclosure_trials if trials is None else trials
    seed = cfg.audit.seed if seed is None else seed
    try:
        tr, enclosure = _target_stage(cfg, out, trials, seed)
    except (NotStronglyConvex, ReachError) as exc:
        return _fail("target-reach", str(exc), EXIT_TARGET)
    summary = {
        "schema": SCHEMA,
        "stage": "target-reach",
        "final_megb_radius": tr.balls[-1].radius,
        "cover_delta": tr.cover.delta,
        "y_nom": tr.y_nom,
        "polytope_vertices": len(tr.polytope.vertices),
        "enclosure_audit": enclosure,
    }
    art.write_json(out / FILES["summary"], summary)
    if enclosure["violations"]:
        return _fail("target-reach", f"{enclosure['violations']} grasp points outside the polytope", EXIT_AUDIT)
    print(f"[target-reach] enclosure audit: {enclosure['trials']} trials, 0 violations")
    return EXIT_OK


def run_solve(config, out, trials=None, seed=None, verbose=False) -> int:
    try:
        cfg = load_config(config)
    except ConfigError as exc:
        return _fail("config", str(exc), EXIT_CONFIG)
    out = Path(out)
    seed = cfg.audit.seed if seed is None else seed
    t1_trials = cfg.audit.coverage_trials if trials is None else trials
    try:
        tr, enclosure = _target_stage(cfg, out, cfg.audit.enclosure_trials, seed)
    except ReachError as exc:
        return _fail("target-reach", str(exc), EXIT_TARGET)
    try:
        sc = build_scenario(cfg, tr.polytope, tr.y_nom)
    except ConfigError as exc:
        return _fail("config", str(exc), EXIT_CONFIG)
    summary = {"schema": SCHEMA, "stage": "solve"}
    try:
        sol = solve_rgocp(sc, solver_options(cfg, verbose), audit_trials=t1_trials, seed=seed)
    except (Infeasible, NoConvergence) as exc:
        summary.update(status=type(exc).__name__, message=str(exc))
        art.write_json(out / FILES["summary"], summary)
        return _fail("solve", str(exc), EXIT_SOLVE)
    print(f"[solve] {sol.status} after {sol.iterations} outer iterations in {sol.solve_time:.2f} s; "
          f"objective {sol.objective:.6g}, R_delta {sol.decision.R_delta:.6g} N")
    validation = validate_solution(sol, sc, cfg.audit.validate_trials, seed)
    art.write_decision(out, sol.decision)
    art.write_snapshots(out, sol.snapshots)
    art.write_rtc(out, sol.rtc)
    clean = audits_clean(sol) and enclosure["violations"] == 0 and _validation_clean(validation)
    reports = {"solve_time_s": sol.solve_time, "residuals": sol.residuals, "audits": sol.audits,
               "enclosure_audit": enclosure, "validation": validation, "active": sol.active}
    art.write_json(out / FILES["reports"], reports)
    summary.update(
        status=sol.status,
        iterations=sol.iterations,
        objective=sol.objective,
        R_delta=sol.decision.R_delta,
        max_violation=sol.residuals["max_violation"],
        containment_residual=sol.residuals["containment"],
        nominal_endpoint_distance=sol.residuals["nominal_endpoint_distance"],
        nominal_tol=sc.nominal_tol,
        touch_distance=sol.touch_distance,
        scene_scale=sc.scene_scale,
        final_megb_radius=tr.balls[-1].radius,
        counts=assemble_nlp(sc).info["counts"],
        active=sol.active,
        coverage_violations=sol.audits["hull_coverage"]["violations"],
        coverage_trials=sol.audits["hull_coverage"]["trials"],
        audits_clean=bool(clean),
        files=sorted(FILES.values()),
    )
    art.write_json(out / FILES["summary"], summary)
    if not clean:
        return _fail("audit", "post-solve audits reported violations; see reports.json", EXIT_AUDIT)
    print(f"[solve] audits clean; artifacts in {out}")
    return EXIT_OK


def _validation_clean(rep) -> bool:
    return rep["linearity_error"] <= 1e-9 and rep["outside_polytope"] == 0 and rep["worst_miss"] <= 1e-6


def load_run(out: Path):
    """Rebuild scenario and decision from the artifacts directory."""
    summary = art.read_json(out / FILES["summary"])
    if summary.get("schema") != SCHEMA:
        raise ConfigError(f"unsupported artifact schema {summary.get('schema')!r}")
    cfg = config_from_dict(art.read_json(out / FILES["config"]))
    target = art.read_json(out / FILES["target"])
    sc = build_scenario(cfg, art.read_polytope(out), np.array(target["y_nom"]))
    dec = art.read_decision(out)
    return cfg, sc, dec


def run_verify(out, trials=None, seed=None) -> int:
    out = Path(out)
    try:
        cfg, sc, dec = load_run(out)
    except (OSError, KeyError, ValueError) as exc:
        return _fail("verify", f"cannot load artifacts: {exc}", EXIT_CONFIG)
    trials = cfg.audit.coverage_trials if trials is None else trials
    seed = cfg.audit.seed if seed is None else seed
    try:
        report = decision_report(sc, dec)
    except ValueError as exc:
        return _fail("verify", str(exc), EXIT_AUDIT)
    if report["violations"]:
        name, value = report["violations"][0]
        return _fail("verify", f"constraint {name} violated by {value:.3e} "
                               f"({len(report['violations'])} rows in total)", EXIT_AUDIT)
    print(f"[verify] all constraints satisfied (max violation {report['max_violation']:.3e})")
    snaps = art.read_snapshots(out)
    traj = rollout(sc.chaser, sc.directions[:, None, :] * dec.R_delta + dec.U[None])
    stored = np.stack([s.points for s in snaps], axis=1)
    if stored.shape != traj.shape or np.abs(stored - traj).max() > 1e-9:
        return _fail("verify", "chaser snapshots do not match the stored controls", EXIT_AUDIT)
    if trials == 0:
        print("[verify] no trials requested; Monte-Carlo audits skipped")
        return EXIT_OK
    rtc = art.read_rtc(out)
    t1 = audit_hull_coverage(sc.chaser, dec.tube(sc.directions), rtc, trials, seed)
    if t1["violations"]:
        return _fail("verify", f"time-coverage audit: {t1['violations']} points outside their interval hull",
                     EXIT_AUDIT)
    val = validate_solution(dec, sc, trials, seed)
    if not _validation_clean(val):
        return _fail("verify", f"interception validation failed: {val}", EXIT_AUDIT)
    print(f"[verify] {trials} trials: time-coverage violations 0, worst interception miss {val['worst_miss']:.2e} m")
    return EXIT_OK


def run_export(out, dest=None, substeps: int = 10) -> int:
    """Plot-ready columnar tables derived from the artifacts."""
    out = Path(out)
    dest = Path(dest) if dest else out / "export"
    try:
        cfg, sc, dec = load_run(out)
    except (OSError, KeyError, ValueError) as exc:
        return _fail("export", f"cannot load artifacts: {exc}", EXIT_CONFIG)
    ch = sc.chaser
    pos, vel = dense_rollout(ch, dec.U, substeps)
    t = (ch.times[:-1, None] + ch.dt * np.arange(substeps + 1)[None] / substeps).ravel()
    art.write_csv(dest / "nominal_trajectory.csv", ["t", "x", "y", "z", "vx", "vy", "vz"],
                  np.column_stack([t, pos.reshape(-1, 3), vel.reshape(-1, 3)]))
    covers = dec.U[None] + dec.R_delta * sc.directions[:, None, :]
    cpos, _ = dense_rollout(ch, covers, substeps)
    rows = [[k, ti, *p] for k in range(len(covers)) for ti, p in zip(t, cpos[k].reshape(-1, 3))]
    art.write_csv(dest / "cover_trajectories.csv", ["sample", "t", "x", "y", "z"], rows)
    _, megb = art.read_csv(out / FILES["megb"])
    art.write_csv(dest / "megb_radius.csv", ["time", "radius"], megb[:, [0, 10]])
    rtc = art.read_rtc(out)
    rows = []
    for i, ells in enumerate(rtc.ellipsoids):
        for k, e in enumerate(ells):
            axes, _ = e.semi_axes
            rows.append([i, k, *e.center, *axes])
    art.write_csv(dest / "rtc_ellipsoid_axes.csv", ["interval", "sample", "cx", "cy", "cz", "a1", "a2", "a3"], rows)
    art.write_csv(dest / "target_polytope.csv", ["x", "y", "z"], sc.target_polytope.vertices)
    print(f"[export] wrote plot tables to {dest}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rgreach", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("target-reach", "solve"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="scenario TOML file")
        p.add_argument("--out", required=True, help="artifact directory")
        p.add_argument("--trials", type=int, default=None, help="override Monte-Carlo trial count")
        p.add_argument("--seed", type=int, default=None, help="override audit seed")
        if name == "solve":
            p.add_argument("--verbose", action="store_true", help="print one line per outer iteration")
    p = sub.add_parser("verify")
    p.add_argument("--out", required=True, help="artifact directory written by solve")
    p.add_argument("--trials", type=int, default=None, help="Monte-Carlo trials (0 skips the sampled audits)")
    p.add_argument("--seed", type=int, default=None, help="audit seed")
    p = sub.add_parser("export")
    p.add_argument("--out", required=True, help="artifact directory written by solve")
    p.add_argument("--dest", default=None, help="destination directory (default OUT/export)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "trials", None) is not None and args.trials < 0:
        return _fail("config", "--trials must be non-negative", EXIT_CONFIG)
    if args.command == "target-reach":
        return run_target_reach(args.config, args.out, args.trials, args.seed)
    if args.command == "solve":
        return run_solve(args.config, args.out, args.trials, args.seed, args.verbose)
    if args.command == "verify":
        return run_verify(args.out, args.trials, args.seed)
    return run_export(args.out, args.dest)


if __name__ == "__main__":
    sys.exit(main())
