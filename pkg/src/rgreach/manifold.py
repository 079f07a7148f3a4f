"""Lie-group primitives on SO(3).

Rotations are plain ``(3, 3)`` float arrays and axis-angle vectors are
``(3,)`` arrays; most functions also accept stacks with leading batch axes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AngleAtPi

SMALL_ANGLE = 1e-6
ORTHO_TOL = 1e-10
# angle distance from pi below which the logarithm is refused
PI_TOL = 1e-9

_GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


def hat(w: np.ndarray) -> np.ndarray:
    """Skew-symmetric matrix ``w^x`` so that ``hat(w) @ v == cross(w, v)``."""
    w = np.asarray(w, dtype=float)
    out = np.zeros(w.shape[:-1] + (3, 3))
    out[..., 0, 1] = -w[..., 2]
    out[..., 0, 2] = w[..., 1]
    out[..., 1, 0] = w[..., 2]
    out[..., 1, 2] = -w[..., 0]
    out[..., 2, 0] = -w[..., 1]
    out[..., 2, 1] = w[..., 0]
    return out


def vee(W: np.ndarray) -> np.ndarray:
    """Inverse of :func:`hat` (antisymmetric part only)."""
    W = np.asarray(W, dtype=float)
    return 0.5 * np.stack(
        [W[..., 2, 1] - W[..., 1, 2], W[..., 0, 2] - W[..., 2, 0], W[..., 1, 0] - W[..., 0, 1]],
        axis=-1,
    )


def is_rotation(R: np.ndarray, tol: float = ORTHO_TOL) -> bool:
    R = np.asarray(R, dtype=float)
    if R.shape[-2:] != (3, 3):
        return False
    eye = np.eye(3)
    ortho = np.linalg.norm(np.swapaxes(R, -1, -2) @ R - eye, axis=(-2, -1))
    det = np.linalg.det(R)
    return bool(np.all(ortho <= tol) and np.all(np.abs(det - 1.0) <= tol))


def so3_exp(w: np.ndarray) -> np.ndarray:
    """Rodrigues formula ``exp(w^x)``; batched over leading axes."""
    w = np.asarray(w, dtype=float)
    th = np.linalg.norm(w, axis=-1)
    th2 = th * th
    small = th < SMALL_ANGLE
    safe = np.where(small, 1.0, th)
    # 4th-order Taylor expansions below SMALL_ANGLE
    a = np.where(small, 1.0 - th2 / 6.0 + th2 * th2 / 120.0, np.sin(safe) / safe)
    b = np.where(small, 0.5 - th2 / 24.0 + th2 * th2 / 720.0, (1.0 - np.cos(safe)) / (safe * safe))
    W = hat(w)
    return np.eye(3) + a[..., None, None] * W + b[..., None, None] * (W @ W)


def rotation_angle(R: np.ndarray) -> np.ndarray:
    """Angle in ``[0, pi]`` of a rotation (or stack of rotations)."""
    R = np.asarray(R, dtype=float)
    s = np.linalg.norm(vee(R), axis=-1)
    c = 0.5 * (np.trace(R, axis1=-2, axis2=-1) - 1.0)
    return np.arctan2(s, c)


def so3_log(R: np.ndarray, pi_tol: float = PI_TOL) -> np.ndarray:
    """Axis-angle vector ``w`` with ``exp(w^x) = R`` and ``|w| <= pi``.

    Raises :class:`AngleAtPi` when the rotation angle is within ``pi_tol`` of
    pi, where the minimal rotation is not unique.
    """
    R = np.asarray(R, dtype=float)
    th = float(rotation_angle(R))
    if np.pi - th < pi_tol:
        raise AngleAtPi(f"rotation angle {th!r} is within {pi_tol:g} of pi")
    v = vee(R)
    if th < SMALL_ANGLE:
        # sin(th)/th ~ 1 - th^2/6
        return v * (1.0 + th * th / 6.0)
    if th < 3.0:
        return v * (th / np.sin(th))
    # near pi the antisymmetric part is tiny; recover the axis from R + R^T
    c = np.cos(th)
    S = (0.5 * (R + R.T) - c * np.eye(3)) / (1.0 - c)
    i = int(np.argmax(np.diag(S)))
    axis = S[:, i] / np.sqrt(S[i, i])
    axis /= np.linalg.norm(axis)
    if axis @ v < 0.0:
        axis = -axis
    return th * axis


def geodesic_distance(R1: np.ndarray, R2: np.ndarray) -> np.ndarray | float:
    """Angle of the minimal rotation between ``R1`` and ``R2`` (batched)."""
    R1 = np.asarray(R1, dtype=float)
    R2 = np.asarray(R2, dtype=float)
    d = rotation_angle(np.swapaxes(R1, -1, -2) @ R2)
    return float(d) if np.ndim(d) == 0 else d


def frobenius_distance(R1: np.ndarray, R2: np.ndarray) -> float:
    """``|log(R1^T R2)|_F / sqrt(2)``; equal to :func:`geodesic_distance` below pi."""
    w = so3_log(np.asarray(R1).T @ np.asarray(R2))
    return float(np.linalg.norm(hat(w), "fro") / np.sqrt(2.0))


def geodesic(R0: np.ndarray, R1: np.ndarray, t: float) -> np.ndarray:
    """Point at fraction ``t`` along the minimal geodesic from ``R0`` to ``R1``."""
    R0 = np.asarray(R0, dtype=float)
    w = so3_log(R0.T @ np.asarray(R1, dtype=float))
    return R0 @ so3_exp(t * w)


def project_to_so3(M: np.ndarray) -> np.ndarray:
    """Closest rotation in Frobenius norm (polar factor), batched."""
    U, _, Vt = np.linalg.svd(M)
    det = np.linalg.det(U @ Vt)
    fix = np.ones(np.shape(det) + (3,))
    fix[..., 2] = np.sign(det)
    return (U * fix[..., None, :]) @ Vt


def polar_refine(M: np.ndarray, iterations: int = 2) -> np.ndarray:
    """Polar factor of a nearly orthogonal matrix by Newton iteration.

    Quadratically convergent; only valid when ``M`` is already close to a
    rotation (as after one integrator step).
    """
    X = np.asarray(M, dtype=float)
    for _ in range(iterations):
        X = 0.5 * (X + np.swapaxes(np.linalg.inv(X), -1, -2))
    return X


def fibonacci_sphere(count: int) -> np.ndarray:
    """Deterministic, antipodally symmetric near-uniform unit vectors.

    Half of the points follow the Fibonacci spiral on the upper hemisphere and
    the other half are their antipodes, so the directions sum to exactly zero
    for even ``count``. For odd ``count`` one extra point sits on the equator.
    """
    if count < 1:
        raise ValueError("count must be positive")
    half = count // 2
    i = np.arange(half)
    z = 1.0 - (2.0 * i + 1.0) / count
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = i * _GOLDEN_ANGLE
    upper = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    parts = [upper, -upper]
    if count % 2:
        phi = half * _GOLDEN_ANGLE
        parts.append(np.array([[np.cos(phi), np.sin(phi), 0.0]]))
    return np.concatenate(parts, axis=0)


@dataclass(frozen=True)
class GeodesicBall:
    """Closed geodesic ball ``{center @ exp(w^x) : |w| <= radius}``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not self.radius >= 0.0:
            raise ValueError(f"radius must be non-negative, got {self.radius!r}")
        if not is_rotation(self.center, 1e-8):
            raise ValueError("center is not a rotation matrix")

    @property
    def strongly_convex(self) -> bool:
        return self.radius < np.pi / 2

    def contains(self, R: np.ndarray, tol: float = 1e-9) -> np.ndarray | bool:
        return geodesic_distance(self.center, R) <= self.radius + tol


def sample_ball_boundary(ball: GeodesicBall, count: int) -> list[np.ndarray]:
    """Rotations on the boundary sphere of ``ball`` (Fibonacci layout)."""
    if count < 4:
        raise ValueError("count must be at least 4")
    w = ball.radius * fibonacci_sphere(count)
    return list(ball.center @ so3_exp(w))


def sample_ball_interior(ball: GeodesicBall, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random axis-angle offsets inside the ball, mapped to rotations."""
    d = rng.normal(size=(count, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = ball.radius * rng.random(count) ** (1.0 / 3.0)
    return ball.center @ so3_exp(d * r[:, None])
