"""Run artifacts: CSV tables and JSON documents in a fixed directory layout.

Floats are written with ``repr`` so values round-trip exactly. Every file is
written to a temporary sibling and renamed into place.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

SCHEMA = "rgreach-artifacts/1"

FILES = {
    "config": "config.json",
    "target": "target.json",
    "megb": "target_megb.csv",
    "poly_vertices": "grasp_polytope_vertices.csv",
    "poly_halfspaces": "grasp_polytope_halfspaces.csv",
    "controls": "controls.csv",
    "lambda": "lambda.csv",
    "decision": "decision.json",
    "snapshots": "chaser_snapshots.csv",
    "rtc_ellipsoids": "rtc_ellipsoids.csv",
    "rtc_halfspaces": "rtc_halfspaces.csv",
    "reports": "reports.json",
    "summary": "summary.json",
}


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    _atomic_write(Path(path), buf.getvalue())


def read_csv(path):
    """Returns ``(header, float array of shape (rows, cols))``."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [[float(v) for v in row] for row in r if row]
    return header, np.array(rows, dtype=float).reshape(len(rows), len(header))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def write_json(path, data):
    _atomic_write(Path(path), json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


# typed writers / readers ----------------------------------------------------

def write_polytope(out: Path, poly):
    write_csv(out / FILES["poly_vertices"], ["x", "y", "z"], poly.vertices)
    write_csv(out / FILES["poly_halfspaces"], ["nx", "ny", "nz", "offset"],
              np.column_stack([poly.normals, poly.offsets]))


def read_polytope(out: Path):
    from .target_reach import GraspPolytope

    _, V = read_csv(out / FILES["poly_vertices"])
    _, H = read_csv(out / FILES["poly_halfspaces"])
    return GraspPolytope(V, H[:, :3], H[:, 3])


def write_megb(out: Path, times, balls):
    rows = [[t, *np.ravel(b.center), b.radius] for t, b in zip(times, balls)]
    write_csv(out / FILES["megb"], ["time"] + [f"r{i}{j}" for i in range(1, 4) for j in range(1, 4)] + ["radius"], rows)


def write_decision(out: Path, decision):
    write_csv(out / FILES["controls"], ["step", "ux", "uy", "uz"],
              [[j, *u] for j, u in enumerate(decision.U)])
    M = decision.Lambda.shape[1]
    write_csv(out / FILES["lambda"], ["vertex"] + [f"k{k}" for k in range(M)],
              [[v, *row] for v, row in enumerate(decision.Lambda)])
    write_json(out / FILES["decision"], {"R_delta": float(decision.R_delta)})


def read_decision(out: Path):
    from .rgocp import Decision

    _, C = read_csv(out / FILES["controls"])
    _, L = read_csv(out / FILES["lambda"])
    R = float(read_json(out / FILES["decision"])["R_delta"])
    return Decision(C[:, 1:4].copy(), R, L[:, 1:].copy())


def write_snapshots(out: Path, snapshots):
    rows = [[s.time, k, *p] for s in snapshots for k, p in enumerate(s.points)]
    write_csv(out / FILES["snapshots"], ["time", "sample", "x", "y", "z", "vx", "vy", "vz"], rows)


def read_snapshots(out: Path):
    from .chaser_reach import ReachSnapshot

    _, S = read_csv(out / FILES["snapshots"])
    times = np.unique(S[:, 0])
    return [ReachSnapshot(float(t), S[S[:, 0] == t][:, 2:8].copy()) for t in times]


def write_rtc(out: Path, rtc):
    rows = [[i, k, *e.center, *np.ravel(e.shape), e.pad] for i, ells in enumerate(rtc.ellipsoids)
            for k, e in enumerate(ells)]
    write_csv(out / FILES["rtc_ellipsoids"],
              ["interval", "sample", "cx", "cy", "cz"] + [f"e{i}{j}" for i in range(1, 4) for j in range(1, 4)] + ["pad"],
              rows)
    rows = [[i, *a, bb] for i, (A, b) in enumerate(rtc.halfspaces) for a, bb in zip(A, b)]
    write_csv(out / FILES["rtc_halfspaces"], ["interval", "ax", "ay", "az", "b"], rows)


def read_rtc(out: Path):
    from .chaser_reach import Ellipsoid, Rtc

    _, E = read_csv(out / FILES["rtc_ellipsoids"])
    _, H = read_csv(out / FILES["rtc_halfspaces"])
    n = int(H[:, 0].max()) + 1 if len(H) else 0
    ells = [[Ellipsoid(r[2:5].copy(), r[5:14].reshape(3, 3).copy(), float(r[14])) for r in E[E[:, 0] == i]]
            for i in range(n)]
    hs = [(H[H[:, 0] == i][:, 1:4].copy(), H[H[:, 0] == i][:, 4].copy()) for i in range(n)]
    return Rtc(ells, hs)
