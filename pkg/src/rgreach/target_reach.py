"""Forward reachability of an uncertainly oriented, torque-free tumbling target.

The initial orientation is only known to lie in a geodesic ball. A delta-cover
of that ball is propagated through Euler's rigid-body equations, each snapshot
is enclosed in a minimal enclosing geodesic ball centred at the Frechet mean,
and the final ball is lifted to a convex polytope enclosing the set of
reachable grasp-point positions.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull

from .errors import AngleAtPi, NoConvergence, NotStronglyConvex, RadiusTooLarge, SpreadTooLarge
from .manifold import (
    GeodesicBall,
    fibonacci_sphere,
    geodesic_distance,
    hat,
    polar_refine,
    project_to_so3,
    sample_ball_boundary,
    sample_ball_interior,
    so3_exp,
    so3_log,
)

MAX_SUBSTEP = 0.05


@dataclass(frozen=True)
class TargetModel:
    """Rigid target: principal inertia [kg m^2], body rate [rad/s],
    centre of mass [m, world] and grasp point [m, body]."""

    inertia: np.ndarray
    omega0: np.ndarray
    r_center: np.ndarray
    p_grasp: np.ndarray

    def __post_init__(self):
        J = np.asarray(self.inertia, dtype=float)
        if J.shape == (3, 3):
            if np.abs(J - np.diag(np.diag(J))).max() > 0:
                raise ValueError("inertia must be diagonal in the body frame")
            J = np.diag(J)
        if J.shape != (3,) or np.any(J <= 0):
            raise ValueError("inertia diagonal entries must be positive")
        object.__setattr__(self, "inertia", J)
        for name in ("omega0", "r_center", "p_grasp"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,):
                raise ValueError(f"{name} must be a 3-vector")
            object.__setattr__(self, name, v)

    @property
    def J(self) -> np.ndarray:
        return np.diag(self.inertia)

    def kinetic_energy(self, omega: np.ndarray) -> np.ndarray:
        return 0.5 * np.sum(self.inertia * omega * omega, axis=-1)

    def momentum_norm(self, omega: np.ndarray) -> np.ndarray:
        return np.linalg.norm(self.inertia * omega, axis=-1)


@dataclass
class OrientationCover:
    samples: list
    delta: float


@dataclass
class GraspPolytope:
    """Convex polytope ``{x : normals @ x + offsets <= 0}`` with its vertices."""

    vertices: np.ndarray
    normals: np.ndarray
    offsets: np.ndarray

    def margins(self, points: np.ndarray) -> np.ndarray:
        """Signed constraint values; all ``<= 0`` means inside."""
        return np.atleast_2d(points) @ self.normals.T + self.offsets

    def contains(self, points: np.ndarray, tol: float = 0.0) -> np.ndarray:
        return np.all(self.margins(points) <= tol, axis=-1)

    @property
    def volume(self) -> float:
        return float(ConvexHull(self.vertices).volume)


@dataclass
class TargetReach:
    times: np.ndarray
    balls: list
    cover: OrientationCover
    snapshots: list = field(repr=False)
    polytope: GraspPolytope
    nominal_rotation: np.ndarray
    y_nom: np.ndarray


def _rates(R, omega, inertia):
    Jw = inertia * omega
    domega = np.cross(Jw, omega) / inertia
    return R @ hat(omega), domega


def euler_step(R: np.ndarray, omega: np.ndarray, model: TargetModel, dt: float):
    """One RK4 step of ``R' = R w^x``, ``J w' = (J w) x w``, then polar reprojection.

    Works on single states or stacks (``R`` of shape ``(..., 3, 3)``).
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    R = np.asarray(R, dtype=float)
    omega = np.asarray(omega, dtype=float)
    J = model.inertia
    k1R, k1w = _rates(R, omega, J)
    k2R, k2w = _rates(R + 0.5 * dt * k1R, omega + 0.5 * dt * k1w, J)
    k3R, k3w = _rates(R + 0.5 * dt * k2R, omega + 0.5 * dt * k2w, J)
    k4R, k4w = _rates(R + dt * k3R, omega + dt * k3w, J)
    R_next = R + (dt / 6.0) * (k1R + 2.0 * k2R + 2.0 * k3R + k4R)
    w_next = omega + (dt / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
    return polar_refine(R_next), w_next


def propagate(R0: np.ndarray, omega0: np.ndarray, model: TargetModel, t_grid, max_step: float = MAX_SUBSTEP):
    """Integrate a stack of orientations; returns arrays sampled at ``t_grid``.

    ``R0`` has shape ``(K, 3, 3)``; ``omega0`` is ``(3,)`` or ``(K, 3)``.
    Output shapes are ``(len(t_grid), K, 3, 3)`` and ``(len(t_grid), K, 3)``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid[0] != 0.0 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must start at 0 and be strictly increasing")
    R = np.array(R0, dtype=float)
    omega = np.broadcast_to(np.asarray(omega0, dtype=float), R.shape[:-2] + (3,)).copy()
    Rs, ws = [R.copy()], [omega.copy()]
    for gap in np.diff(t_grid):
        n = max(1, math.ceil(gap / max_step - 1e-12))
        h = gap / n
        for _ in range(n):
            R, omega = euler_step(R, omega, model, h)
        Rs.append(R.copy())
        ws.append(omega.copy())
    return np.stack(Rs), np.stack(ws)


def _audit_grid(ball: GeodesicBall, directions: int = 400, levels: int = 20) -> np.ndarray:
    d = fibonacci_sphere(directions)
    r = ball.radius * np.arange(1, levels + 1) / levels
    w = (r[:, None, None] * d[None]).reshape(-1, 3)
    return ball.center @ so3_exp(w)


def build_cover(ball: GeodesicBall, count: int) -> OrientationCover:
    """Delta-cover of ``ball``: its centre followed by ``count`` boundary samples.

    ``delta`` is measured on a dense audit grid filling the ball.
    """
    if ball.radius >= np.pi / 2:
        raise RadiusTooLarge(f"ball radius {ball.radius} >= pi/2")
    if ball.radius == 0.0:
        return OrientationCover([ball.center.copy()], 0.0)
    samples = [ball.center.copy()] + sample_ball_boundary(ball, count)
    S = np.array(samples)
    grid = _audit_grid(ball)
    d = geodesic_distance(grid[:, None], S[None, :])
    return OrientationCover(samples, float(d.min(axis=1).max()))


def propagate_cover(cover: OrientationCover, model: TargetModel, t_grid) -> list:
    """Rollouts of every cover sample; list of ``(time, [R_k])`` snapshots."""
    t_grid = np.asarray(t_grid, dtype=float)
    Rs, _ = propagate(np.array(cover.samples), model.omega0, model, t_grid)
    return [(float(t), list(Rt)) for t, Rt in zip(t_grid, Rs)]


def _karcher(rotations: np.ndarray, tol: float = 1e-10, max_iter: int = 200) -> np.ndarray:
    R = project_to_so3(rotations.mean(axis=0))
    for _ in range(max_iter):
        step = np.zeros(3)
        for Ri in rotations:
            step += so3_log(R.T @ Ri)
        step /= len(rotations)
        if np.linalg.norm(step) < tol:
            return R
        R = project_to_so3(R @ so3_exp(step))
    raise NoConvergence(f"Frechet mean did not converge in {max_iter} iterations")


def frechet_mean(rotations) -> np.ndarray:
    """Rotation minimizing the sum of squared geodesic distances to the inputs."""
    S = np.asarray(rotations, dtype=float).reshape(-1, 3, 3)
    if len(S) == 1:
        return S[0].copy()
    spread = geodesic_distance(S[:, None], S[None, :]).max()
    if spread >= np.pi / 2:
        raise SpreadTooLarge(f"pairwise spread {spread:.6f} >= pi/2")
    return _karcher(S)


def megb(rotations) -> GeodesicBall:
    """Minimal enclosing geodesic ball centred at the Frechet mean."""
    S = np.asarray(rotations, dtype=float).reshape(-1, 3, 3)
    if len(S) == 1:
        return GeodesicBall(S[0].copy(), 0.0)
    try:
        center = _karcher(S)
    except AngleAtPi as exc:
        raise NotStronglyConvex(f"samples are not contained in a convex ball: {exc}") from exc
    radius = float(geodesic_distance(center, S).max())
    if radius >= np.pi / 2:
        raise NotStronglyConvex(f"enclosing radius {radius:.6f} >= pi/2")
    return GeodesicBall(center, radius)


def _orthonormal_complement(n: np.ndarray):
    a = np.eye(3)[int(np.argmin(np.abs(n)))]
    e1 = np.cross(n, a)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(n, e1)


def _enumerate_vertices(normals: np.ndarray, offsets: np.ndarray, tol: float) -> np.ndarray:
    verts = []
    for idx in itertools.combinations(range(len(normals)), 3):
        A = normals[list(idx)]
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        x = np.linalg.solve(A, -offsets[list(idx)])
        if np.all(normals @ x + offsets <= tol):
            if not any(np.linalg.norm(x - v) <= 1e3 * tol for v in verts):
                verts.append(x)
    return np.array(verts)


def _box(point: np.ndarray, edge: float) -> GraspPolytope:
    half = edge / 2
    normals = np.vstack([np.eye(3), -np.eye(3)])
    offsets = np.concatenate([-(point + half), point - half])
    corners = np.array(list(itertools.product([-half, half], repeat=3)))
    return GraspPolytope(point + corners, normals, offsets)


def lift_to_polytope(
    ball: GeodesicBall,
    model: TargetModel,
    facet_count: int = 4,
    pad: float = 1e-9,
    validate: int = 10_000,
    seed: int = 0,
) -> GraspPolytope:
    """Enclose the grasp-point patch reachable from ``ball`` in a polytope.

    The patch lies on the sphere of radius ``|p_grasp|`` around the target
    centre, inside the cap of angular radius ``ball.radius`` about the nominal
    grasp direction. It is bounded by tangent planes of that sphere at the cap
    centre and at ``facet_count`` points on the cap rim, plus the plane through
    the rim. With the default four rim planes the result has 8 vertices.
    """
    if ball.radius >= np.pi / 2:
        raise RadiusTooLarge(f"ball radius {ball.radius} >= pi/2")
    arm = float(np.linalg.norm(model.p_grasp))
    if arm <= 0.0:
        raise ValueError("p_grasp must be non-zero")
    c = model.r_center
    if ball.radius == 0.0:
        return _box(c + ball.center @ model.p_grasp, 1e-6)
    if facet_count < 3:
        raise ValueError("facet_count must be at least 3")

    r = ball.radius + pad
    n = ball.center @ model.p_grasp / arm
    e1, e2 = _orthonormal_complement(n)
    phi = 2 * np.pi * np.arange(facet_count) / facet_count
    rim = np.cos(r) * n + np.sin(r) * (np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2)
    tangent = np.vstack([n, rim])
    # tangent planes d.(x - c) <= arm, base plane n.(x - c) >= arm cos r
    normals = np.vstack([tangent, -n])
    offsets = np.concatenate([-(tangent @ c) - arm, [n @ c + arm * np.cos(r)]])
    verts = _enumerate_vertices(normals, offsets, 1e-9 * max(1.0, arm + np.linalg.norm(c)))
    poly = GraspPolytope(verts, normals, offsets)

    if validate:
        rng = np.random.default_rng(seed)
        inner = GeodesicBall(ball.center, ball.radius)
        Rs = sample_ball_interior(inner, validate, rng)
        pts = c + Rs @ model.p_grasp
        if not np.all(poly.contains(pts, tol=0.0)):
            raise RuntimeError("lifted polytope failed its containment self-check")
    return poly


def analyze_target(
    model: TargetModel,
    initial: GeodesicBall,
    count: int,
    t_grid,
    facet_count: int = 4,
) -> TargetReach:
    """Full target pipeline: cover, propagation, per-step MEGB, final lift."""
    cover = build_cover(initial, count)
    snaps = propagate_cover(cover, model, t_grid)
    balls = []
    for t, Rt in snaps:
        try:
            balls.append(megb(Rt))
        except NotStronglyConvex as exc:
            raise NotStronglyConvex(f"at t={t:g} s: {exc}") from exc
    poly = lift_to_polytope(balls[-1], model, facet_count)
    R_nom, _ = propagate(initial.center[None], model.omega0, model, t_grid)
    R_nom = R_nom[-1, 0]
    return TargetReach(
        times=np.asarray(t_grid, dtype=float),
        balls=balls,
        cover=cover,
        snapshots=snaps,
        polytope=poly,
        nominal_rotation=R_nom,
        y_nom=model.r_center + R_nom @ model.p_grasp,
    )


def audit_enclosure(
    model: TargetModel,
    initial: GeodesicBall,
    polytope: GraspPolytope,
    horizon: float,
    trials: int,
    seed: int = 0,
) -> dict:
    """Monte-Carlo check that grasp points of random rollouts land in ``polytope``."""
    if trials == 0:
        return {"trials": 0, "violations": 0, "worst_margin": None}
    rng = np.random.default_rng(seed)
    R0 = sample_ball_interior(initial, trials, rng)
    Rs, _ = propagate(R0, model.omega0, model, [0.0, horizon])
    pts = model.r_center + Rs[-1] @ model.p_grasp
    m = polytope.margins(pts).max(axis=1)
    return {"trials": trials, "violations": int(np.sum(m > 0.0)), "worst_margin": float(m.max())}
