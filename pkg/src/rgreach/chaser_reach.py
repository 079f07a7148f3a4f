"""Sampling-based reachability for the controlled chaser.

The chaser is a 3-DOF double integrator driven by piecewise-constant thrust.
A control tube (nominal sequence plus a ball of radius ``R_delta``) is
sampled on its boundary sphere, the samples are rolled out exactly, and
consecutive snapshots are joined by two-focus ellipsoids whose convex hull
bounds every trajectory between sample times.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import FlowBoundViolated, InfeasibleBackoff
from .manifold import fibonacci_sphere


@dataclass(frozen=True)
class ChaserModel:
    """Point-mass chaser.

    ``u_lim`` [N] and ``v_lim`` [m/s] are per-axis box bounds (scalars or
    3-vectors); ``dt`` [s] is the control segment length.
    """

    mass: float
    x0: np.ndarray
    v0: np.ndarray
    u_lim: float
    v_lim: np.ndarray
    dt: float
    horizon: float
    segments: int

    def __post_init__(self):
        if not self.mass > 0 or not self.dt > 0:
            raise ValueError("mass and dt must be positive")
        if self.segments < 1 or abs(self.segments * self.dt - self.horizon) > 1e-12 * max(1.0, self.horizon):
            raise ValueError("segments * dt must equal horizon")
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float).reshape(3))
        object.__setattr__(self, "v0", np.asarray(self.v0, dtype=float).reshape(3))
        object.__setattr__(self, "v_lim", np.broadcast_to(np.asarray(self.v_lim, dtype=float), (3,)).copy())

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.segments + 1)

    @property
    def a_sup(self) -> np.ndarray:
        """Largest acceleration magnitude per axis."""
        return np.full(3, self.u_lim / self.mass)


@dataclass
class ControlTube:
    nominal: np.ndarray
    radius: float
    directions: np.ndarray = None

    def __post_init__(self):
        self.nominal = np.asarray(self.nominal, dtype=float)
        if self.directions is None:
            self.directions = fibonacci_sphere(32)
        self.directions = np.asarray(self.directions, dtype=float)
        if not self.radius >= 0:
            raise ValueError("tube radius must be non-negative")

    @classmethod
    def with_samples(cls, nominal, radius, count):
        return cls(nominal, radius, fibonacci_sphere(count))

    @property
    def size(self) -> int:
        return len(self.directions)


@dataclass
class ReachSnapshot:
    time: float
    points: np.ndarray
    epsilon: float = 0.0

    @property
    def positions(self) -> np.ndarray:
        return self.points[:, :3]

    @property
    def velocities(self) -> np.ndarray:
        return self.points[:, 3:]


@dataclass
class Ellipsoid:
    """``{x : (x - c)^T shape^-1 (x - c) <= 1}`` grown by a ball of radius ``pad``.

    ``shape`` may be singular (segment or disc); ``pad`` is an exact Minkowski
    sum with a ball, handled analytically in the support function.
    """

    center: np.ndarray
    shape: np.ndarray
    pad: float = 0.0
    degenerate: bool = False

    @cached_property
    def semi_axes(self):
        """Semi-axis lengths (descending) and unit axes as columns."""
        vals, vecs = np.linalg.eigh(self.shape)
        order = np.argsort(vals)[::-1]
        return np.sqrt(np.clip(vals[order], 0.0, None)), vecs[:, order]

    @property
    def quadratic(self) -> np.ndarray:
        """The inverse shape matrix (pseudo-inverse when singular)."""
        return np.linalg.pinv(self.shape)

    def support(self, p: np.ndarray) -> np.ndarray:
        """``max p.x`` over the padded set; ``p`` is ``(3,)`` or ``(k, 3)``."""
        p = np.asarray(p, dtype=float)
        quad = np.einsum("...i,ij,...j->...", p, self.shape, p)
        return p @ self.center + np.sqrt(np.clip(quad, 0.0, None)) + self.pad * np.linalg.norm(p, axis=-1)

    def boundary_points(self, normals: np.ndarray) -> np.ndarray:
        """Boundary point of the padded set with each given outward unit normal."""
        n = np.asarray(normals, dtype=float)
        En = n @ self.shape
        s = np.sqrt(np.clip(np.sum(En * n, axis=1), 0.0, None))
        core = np.where(s[:, None] > 0, En / np.where(s > 0, s, 1.0)[:, None], 0.0)
        return self.center + core + self.pad * n

    def contains(self, x: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        """Membership test; exact for non-degenerate shapes with no padding,
        otherwise a support-function test over 2000 directions (slightly
        permissive)."""
        d = np.atleast_2d(x) - self.center
        if self.pad == 0.0 and not self.degenerate:
            return np.einsum("ki,ij,kj->k", d, np.linalg.inv(self.shape), d) <= 1.0 + tol
        dirs = fibonacci_sphere(2000)
        return np.all(d @ dirs.T <= self.support(dirs) - self.center @ dirs.T + tol, axis=1)


@dataclass
class Rtc:
    """Per-interval ellipsoid unions and their outer convex-hull halfspaces."""

    ellipsoids: list
    halfspaces: list = field(repr=False)

    def __len__(self):
        return len(self.halfspaces)

    def margins(self, interval: int, points: np.ndarray) -> np.ndarray:
        """Worst halfspace value per point (``<= 0`` inside)."""
        A, b = self.halfspaces[interval]
        return (np.atleast_2d(points) @ A.T - b).max(axis=-1)

    def contains(self, interval: int, points: np.ndarray, tol: float = 0.0) -> np.ndarray:
        return self.margins(interval, points) <= tol


def control_cover(tube: ControlTube) -> np.ndarray:
    """Cover sequences ``nominal + radius * s_k``; shape ``(M, N, 3)``."""
    if tube.size < 4:
        raise ValueError("control cover needs at least 4 directions")
    return tube.nominal[None] + tube.radius * tube.directions[:, None, :]


def rollout(model: ChaserModel, controls: np.ndarray) -> np.ndarray:
    """Exact zero-order-hold rollout; returns ``(N + 1, 6)`` positions+velocities.

    ``controls`` may carry leading batch axes: ``(..., N, 3)`` -> ``(..., N+1, 6)``.
    """
    U = np.asarray(controls, dtype=float)
    if U.shape[-2:] != (model.segments, 3):
        raise ValueError(f"controls must have shape (..., {model.segments}, 3)")
    dt, m = model.dt, model.mass
    x = np.broadcast_to(model.x0, U.shape[:-2] + (3,)).copy()
    v = np.broadcast_to(model.v0, U.shape[:-2] + (3,)).copy()
    out = [np.concatenate([x, v], axis=-1)]
    for j in range(model.segments):
        u = U[..., j, :]
        x = x + v * dt + u * (dt * dt / (2.0 * m))
        v = v + u * (dt / m)
        out.append(np.concatenate([x, v], axis=-1))
    return np.stack(out, axis=-2)


def rollout_maps(model: ChaserModel):
    """Linear maps of the rollout: ``x_i = x0 + v0 t_i + Px[i] @ U`` (per axis).

    Returns ``(Px, Pv)`` of shape ``(N + 1, N)``; the same coefficients apply
    independently to each Cartesian axis.
    """
    N, dt, m = model.segments, model.dt, model.mass
    i = np.arange(N + 1)[:, None]
    j = np.arange(N)[None, :]
    Px = np.where(j < i, dt * dt / (2.0 * m) * (2.0 * (i - j) - 1.0), 0.0)
    Pv = np.where(j < i, dt / m, 0.0)
    return Px, Pv


def dense_rollout(model: ChaserModel, controls: np.ndarray, substeps: int = 100):
    """Exact states at ``substeps`` points per segment (segment end included).

    Returns positions and velocities of shape ``(..., N, substeps + 1, 3)``
    where index ``[..., i, s]`` is the state at ``t_i + s * dt / substeps``.
    """
    U = np.asarray(controls, dtype=float)
    states = rollout(model, U)
    x0, v0 = states[..., :-1, None, :3], states[..., :-1, None, 3:]
    tau = (model.dt * np.arange(substeps + 1) / substeps)[:, None]
    a = U[..., :, None, :] / model.mass
    return x0 + v0 * tau + 0.5 * a * tau * tau, v0 + a * tau


def reach_snapshots(model: ChaserModel, tube: ControlTube, eps: float = 0.0) -> list:
    """Snapshots of the rolled-out control cover at every grid time."""
    traj = rollout(model, control_cover(tube))
    return [ReachSnapshot(float(t), traj[:, i, :].copy(), eps) for i, t in enumerate(model.times)]


def lipschitz_bound(model: ChaserModel, a_sup: np.ndarray | None = None):
    """Flow bound ``L_t`` and discrete velocity backoff ``v_sup``.

    ``v_sup = v_lim - dt/2 * a_sup`` per axis and
    ``L_t = |v_sup|_2 + dt/2 |a_sup|_2``, which equals ``|v_lim|_2`` when
    ``a_sup`` is parallel to ``v_lim``.
    """
    a_sup = model.a_sup if a_sup is None else np.broadcast_to(np.asarray(a_sup, dtype=float), (3,))
    v_sup = model.v_lim - 0.5 * model.dt * a_sup
    if np.any(v_sup <= 0):
        raise InfeasibleBackoff(f"velocity backoff leaves v_sup = {v_sup}")
    L_t = float(np.linalg.norm(v_sup) + 0.5 * model.dt * np.linalg.norm(a_sup))
    return L_t, v_sup


def rtc_ellipsoid(x_i, x_next, L_t: float, dt: float, eps: float = 0.0) -> Ellipsoid:
    """Prolate spheroid with foci ``x_i``, ``x_next`` and focal-sum ``L_t dt``,
    padded by a ball of radius ``eps``."""
    x_i = np.asarray(x_i, dtype=float)
    x_next = np.asarray(x_next, dtype=float)
    reach = L_t * dt
    chord = x_next - x_i
    ell = float(np.linalg.norm(chord))
    if ell > reach + 1e-9:
        raise FlowBoundViolated(f"sample distance {ell:.6g} exceeds L_t*dt = {reach:.6g}")
    a = reach / 2.0
    b2 = max(a * a - ell * ell / 4.0, 0.0)
    if ell > 0:
        d = chord / ell
        shape = b2 * np.eye(3) + (a * a - b2) * np.outer(d, d)
    else:
        shape = a * a * np.eye(3)
    return Ellipsoid(0.5 * (x_i + x_next), shape, float(eps), degenerate=b2 <= 1e-24 * max(a * a, 1.0))


def _hull_halfspaces(ells: list, directions: np.ndarray):
    pts = np.concatenate([e.boundary_points(directions) for e in ells])
    try:
        hull = ConvexHull(pts)
    except QhullError:
        hull = ConvexHull(pts, qhull_options="QJ")
    A = hull.equations[:, :3]
    A = A / np.linalg.norm(A, axis=1, keepdims=True)
    A = np.unique(np.round(A, 12), axis=0)
    A = A / np.linalg.norm(A, axis=1, keepdims=True)
    # exact support of the union: every halfspace supports the true sets
    b = np.max([e.support(A) for e in ells], axis=0)
    return A, b


def build_rtc(snapshots: list, L_t: float, eps: float = 0.0, directions: int = 64) -> Rtc:
    """Reachable time coverage for each pair of consecutive snapshots."""
    dirs = fibonacci_sphere(directions)
    ells, hs = [], []
    for s0, s1 in zip(snapshots[:-1], snapshots[1:]):
        dt = s1.time - s0.time
        interval = [rtc_ellipsoid(p, q, L_t, dt, eps) for p, q in zip(s0.positions, s1.positions)]
        ells.append(interval)
        hs.append(_hull_halfspaces(interval, dirs))
    return Rtc(ells, hs)


def random_tube_controls(tube: ControlTube, rng: np.random.Generator) -> np.ndarray:
    """One control sequence drawn uniformly from the tube, independently per segment."""
    N = len(tube.nominal)
    d = rng.normal(size=(N, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = rng.random(N) ** (1.0 / 3.0)
    return tube.nominal + tube.radius * d * r[:, None]


def audit_hull_coverage(
    model: ChaserModel,
    tube: ControlTube,
    rtc: Rtc,
    trials: int,
    seed: int = 0,
    substeps: int = 100,
    chunk: int = 50,
) -> dict:
    """Monte-Carlo falsification of the time-coverage containment.

    Each trial draws an in-tube control sequence (seeded per trial), integrates
    it exactly at ``substeps`` points per segment and checks every position
    against its interval's hull.
    """
    report = {"trials": trials, "violations": 0, "violating_trials": 0, "worst_margin": None, "points": 0}
    if trials == 0:
        return report
    worst = -np.inf
    bad = np.zeros(trials, dtype=bool)
    for start in range(0, trials, chunk):
        ids = range(start, min(start + chunk, trials))
        U = np.stack([random_tube_controls(tube, np.random.default_rng([seed, t])) for t in ids])
        pos, _ = dense_rollout(model, U, substeps)
        for i in range(model.segments):
            m = rtc.margins(i, pos[:, i].reshape(-1, 3)).reshape(len(ids), -1)
            worst = max(worst, float(m.max()))
            report["violations"] += int(np.sum(m > 0))
            bad[start:start + len(ids)] |= np.any(m > 0, axis=1)
    report["violating_trials"] = int(bad.sum())
    report["worst_margin"] = worst
    report["points"] = trials * model.segments * (substeps + 1)
    return report


def velocity_audit(model: ChaserModel, controls: np.ndarray, substeps: int = 100) -> dict:
    """Largest per-axis and Euclidean speed along dense rollouts of ``controls``."""
    _, vel = dense_rollout(model, controls, substeps)
    return {
        "max_axis_speed": float(np.abs(vel).max()),
        "max_axis_excess": float((np.abs(vel) - model.v_lim).max()),
        "max_speed": float(np.linalg.norm(vel, axis=-1).max()),
    }


def estimate_epsilon(model: ChaserModel, tube: ControlTube, refine: int = 4) -> float:
    """Heuristic padding: largest gap from a refined cover's final positions to
    the nearest final position of the given cover. Diagnostic only."""
    coarse = rollout(model, control_cover(tube))[:, -1, :3]
    fine_tube = ControlTube(tube.nominal, tube.radius, fibonacci_sphere(refine * tube.size))
    fine = rollout(model, control_cover(fine_tube))[:, -1, :3]
    gaps = np.linalg.norm(fine[:, None] - coarse[None], axis=-1).min(axis=1)
    return float(gaps.max())
