import numpy as np
import pytest


def quat_mul(p, q):
    pw, px, py, pz = p
    qw, qx, qy, qz = q
    return np.array([
        pw * qw - px * qx - py * qy - pz * qz,
        pw * qx + px * qw + py * qz - pz * qy,
        pw * qy - px * qz + py * qw + pz * qx,
        pw * qz + px * qy - py * qx + pz * qw,
    ])


def quat_rotation_matrix(w):
    """Rotation matrix of axis-angle ``w`` built by conjugating basis vectors
    with a unit quaternion; independent of the Rodrigues formula."""
    w = np.asarray(w, dtype=float)
    th = np.linalg.norm(w)
    if th == 0.0:
        q = np.array([1.0, 0.0, 0.0, 0.0])
    else:
        q = np.concatenate([[np.cos(th / 2)], np.sin(th / 2) * w / th])
    qc = q * np.array([1.0, -1.0, -1.0, -1.0])
    cols = []
    for e in np.eye(3):
        v = quat_mul(quat_mul(q, np.concatenate([[0.0], e])), qc)
        cols.append(v[1:])
    return np.stack(cols, axis=1)


def random_axis_angle(rng, count, max_angle):
    d = rng.normal(size=(count, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return d * (max_angle * rng.random(count))[:, None]


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


ACCEPTANCE_LINES = []


def record(criterion, ok, detail):
    """Log one acceptance verdict (printed in the terminal summary)."""
    ACCEPTANCE_LINES.append(f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
