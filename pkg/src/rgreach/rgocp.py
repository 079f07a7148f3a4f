"""Reachability-guaranteed trajectory optimization for the chaser.

Decision variables are a nominal thrust sequence ``U`` (N x 3), a tube
radius ``R_delta`` and a row-stochastic matrix ``Lambda`` expressing every
target-polytope vertex as a convex combination of the chaser's final cover
positions. Cover rollouts are exact linear maps of ``(U, R_delta)``, so the
problem is assembled by single shooting with analytic Jacobians.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.optimize import lsq_linear
from scipy.spatial import ConvexHull, QhullError

from .chaser_reach import (
    ChaserModel,
    ControlTube,
    Ellipsoid,
    Rtc,
    audit_hull_coverage,
    build_rtc,
    control_cover,
    lipschitz_bound,
    reach_snapshots,
    rollout,
    rollout_maps,
    velocity_audit,
)
from .errors import ConfigError, Infeasible, NoConvergence
from .manifold import GeodesicBall, fibonacci_sphere, sample_ball_interior
from .nlp_solver import NLPProblem, SolverOptions, Status, minimize
from .target_reach import GraspPolytope, TargetModel, propagate

ACTIVE_TOL = 1e-6
# the endpoint tolerance is tightened by this much [m] so that a solution
# within the solver's feasibility tolerance still meets the stated bound
NOMINAL_BACKOFF = 2e-6
_AXES = "xyz"


@dataclass(frozen=True)
class Halfspace:
    """Free region ``{x : p.x + h <= 0}``; ``p`` is normalized on construction."""

    p: np.ndarray
    h: float

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float).reshape(3)
        n = np.linalg.norm(p)
        if not n > 0:
            raise ConfigError("halfspace normal must be nonzero")
        object.__setattr__(self, "p", p / n)
        object.__setattr__(self, "h", float(self.h) / n)


@dataclass
class Scenario:
    chaser: ChaserModel
    target_polytope: GraspPolytope
    y_nom: np.ndarray
    x_bounds: np.ndarray
    obstacles: list = field(default_factory=list)
    nominal_tol: float = 0.05
    eps: float = 0.0
    M: int = 32
    target: Optional[TargetModel] = None
    target_initial: Optional[GeodesicBall] = None
    w_R: float = 0.0
    fixed_r_delta: Optional[float] = None

    def __post_init__(self):
        self.y_nom = np.asarray(self.y_nom, dtype=float).reshape(3)
        self.x_bounds = np.asarray(self.x_bounds, dtype=float)
        if self.x_bounds.shape != (2, 3):
            raise ConfigError("x_bounds must be a 2 x 3 array [lower, upper]")
        lo, hi = self.x_bounds[0] + self.eps, self.x_bounds[1] - self.eps
        if np.any(lo > hi):
            raise ConfigError("state box is empty after the epsilon shrink")
        Y = self.target_polytope.vertices
        if np.any(Y < lo) or np.any(Y > hi):
            raise ConfigError("target polytope vertices lie outside the state box")
        if self.M < 4:
            raise ConfigError("cover size M must be at least 4")
        if self.nominal_tol <= 2 * NOMINAL_BACKOFF or self.eps < 0:
            raise ConfigError("nominal_tol must be positive and eps non-negative")
        if self.fixed_r_delta is not None and not 0 <= self.fixed_r_delta <= self.chaser.u_lim:
            raise ConfigError("fixed_r_delta must lie in [0, u_lim]")
        self.obstacles = [o if isinstance(o, Halfspace) else Halfspace(*o) for o in self.obstacles]

    @property
    def M_target(self) -> int:
        return len(self.target_polytope.vertices)

    @property
    def directions(self) -> np.ndarray:
        return fibonacci_sphere(self.M)

    @property
    def scene_scale(self) -> float:
        ref = self.target.r_center if self.target is not None else self.target_polytope.vertices.mean(axis=0)
        return float(np.linalg.norm(ref - self.chaser.x0))


@dataclass(frozen=True)
class Decision:
    U: np.ndarray
    R_delta: float
    Lambda: np.ndarray

    def pack(self) -> np.ndarray:
        return np.concatenate([np.ravel(self.U), [self.R_delta], np.ravel(self.Lambda)])

    @classmethod
    def unpack(cls, z: np.ndarray, N: int, M_target: int, M: int) -> "Decision":
        z = np.asarray(z, dtype=float)
        return cls(z[: 3 * N].reshape(N, 3).copy(), float(z[3 * N]), z[3 * N + 1:].reshape(M_target, M).copy())

    def tube(self, directions: np.ndarray) -> ControlTube:
        return ControlTube(self.U, self.R_delta, directions)


@dataclass
class Solution:
    decision: Decision
    snapshots: list = field(repr=False)
    rtc: Rtc = field(repr=False)
    objective: float
    residuals: dict
    x_nom_final: np.ndarray
    active: dict
    touch_distance: float
    status: str
    iterations: int
    solve_time: float
    audits: dict = field(default_factory=dict)


def containment_residual(Lambda: np.ndarray, X_final: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """``Y - Lambda @ X_final``; zero with row-stochastic ``Lambda`` puts Y in hull(X)."""
    Lambda, X_final, Y = (np.asarray(a, dtype=float) for a in (Lambda, X_final, Y))
    if Lambda.shape != (len(Y), len(X_final)) or X_final.shape[1:] != Y.shape[1:]:
        raise ValueError("inconsistent shapes for containment residual")
    return Y - Lambda @ X_final


def ellipsoid_halfspace_margin(e: Ellipsoid, hs: Halfspace) -> float:
    """Largest value of ``p.x + h`` over the ellipsoid (<= 0 means it is safe)."""
    return float(e.support(hs.p) + hs.h)


class _Layout:
    """Index bookkeeping and constant linear blocks of the assembled NLP."""

    def __init__(self, sc: Scenario):
        ch = sc.chaser
        self.N, self.M, self.Mt, self.nO = ch.segments, sc.M, sc.M_target, len(sc.obstacles)
        self.nu = 3 * self.N
        self.iR = self.nu
        self.nc = self.nu + 1
        self.n = self.nc + self.Mt * self.M
        self.S = sc.directions
        self.Px, self.Pv = rollout_maps(ch)
        self.alpha = self.Px.sum(axis=1)
        self.beta = self.Pv.sum(axis=1)
        t = ch.times
        self.x_free = ch.x0 + t[:, None] * ch.v0
        self.v_free = np.broadcast_to(ch.v0, (self.N + 1, 3))
        # d x_k(t_i)_a / d (U, R): shape (M, N+1, 3, nc)
        eye3 = np.eye(3)
        DxU = np.einsum("ij,ab->iajb", self.Px, eye3).reshape(self.N + 1, 3, self.nu)
        DvU = np.einsum("ij,ab->iajb", self.Pv, eye3).reshape(self.N + 1, 3, self.nu)
        self.DX = np.concatenate(
            [np.broadcast_to(DxU, (self.M, self.N + 1, 3, self.nu)),
             (self.alpha[None, :, None] * self.S[:, None, :])[..., None]], axis=-1)
        self.DV = np.concatenate(
            [np.broadcast_to(DvU, (self.M, self.N + 1, 3, self.nu)),
             (self.beta[None, :, None] * self.S[:, None, :])[..., None]], axis=-1)

    def states(self, U, R):
        xn = self.x_free + self.Px @ U
        vn = self.v_free + self.Pv @ U
        X = xn[None] + R * self.alpha[None, :, None] * self.S[:, None, :]
        V = vn[None] + R * self.beta[None, :, None] * self.S[:, None, :]
        return xn, vn, X, V


def _constraint_names(lay: _Layout):
    N, M, Mt, nO = lay.N, lay.M, lay.Mt, lay.nO
    ineq = [f"control[j={j},{a},{s}]" for j in range(N) for a in _AXES for s in ("upper", "lower")]
    for kind in ("state", "velocity"):
        ineq += [f"{kind}[k={k},i={i},{a},{s}]" for k in range(M) for i in range(N + 1) for a in _AXES
                 for s in ("upper", "lower")]
    ineq += [f"obstacle[o={o},i={i},k={k}]" for i in range(N) for k in range(M) for o in range(nO)]
    ineq.append("nominal_endpoint")
    eq = [f"containment[v={v},{a}]" for v in range(Mt) for a in _AXES] + [f"rowsum[v={v}]" for v in range(Mt)]
    return eq, ineq


def _linear_block(sc: Scenario, lay: _Layout):
    """Control, state-box and velocity rows as ``A z + b <= 0`` (A over (U, R))."""
    ch = sc.chaser
    N, M, nc = lay.N, lay.M, lay.nc
    _, v_sup = lipschitz_bound(ch)
    # controls: +u + R - u_lim, -u + R - u_lim
    Ac = np.zeros((N, 3, 2, nc))
    for s, sign in enumerate((1.0, -1.0)):
        Ac[:, :, s, : lay.nu] = sign * np.eye(lay.nu).reshape(N, 3, lay.nu)
        Ac[:, :, s, lay.iR] = 1.0
    bc = np.full(N * 6, -ch.u_lim)
    lo, hi = sc.x_bounds[0] + sc.eps, sc.x_bounds[1] - sc.eps
    x0n, v0n, _, _ = lay.states(np.zeros((N, 3)), 0.0)
    blocks, offs = [Ac.reshape(-1, nc)], [bc]
    for D, base, upper, lower in ((lay.DX, x0n, hi, lo), (lay.DV, v0n, v_sup, -v_sup)):
        A = np.stack([D, -D], axis=3)  # (M, N+1, 3, 2, nc)
        b = np.stack([base[None] - upper, lower - base[None]], axis=-1)  # broadcast (1, N+1, 3, 2)
        blocks.append(A.reshape(-1, nc))
        offs.append(np.broadcast_to(b, (M, N + 1, 3, 2)).reshape(-1))
    A = np.vstack(blocks)
    return sp.csr_matrix(np.hstack([A, np.zeros((len(A), lay.n - nc))])), np.concatenate(offs)


def _obstacle_terms(sc: Scenario, lay: _Layout, X, L_t: float):
    """Margins (N, M, nO) and their gradients w.r.t. (U, R)."""
    N, M, nO = lay.N, lay.M, lay.nO
    if nO == 0:
        return np.zeros((N, M, 0)), np.zeros((N, M, 0, lay.nc))
    P = np.array([o.p for o in sc.obstacles])
    h = np.array([o.h for o in sc.obstacles])
    dt = sc.chaser.dt
    a2 = (0.5 * L_t * dt) ** 2
    Xa = np.swapaxes(X, 0, 1)  # (N+1, M, 3)
    c = 0.5 * (Xa[:-1] + Xa[1:])
    D = Xa[1:] - Xa[:-1]
    pd = D @ P.T  # (N, M, nO)
    # p^T E p for the prolate spheroid, smooth in the chord
    q = a2 - 0.25 * (np.sum(D * D, axis=-1)[..., None] - pd * pd)
    rq = np.sqrt(np.maximum(q, 1e-12))
    margin = c @ P.T + rq + sc.eps + h
    dq_dD = -0.5 * (D[:, :, None, :] - pd[..., None] * P[None, None])  # (N, M, nO, 3)
    gD = dq_dD / (2.0 * rq[..., None])
    g_next = 0.5 * P[None, None] + gD
    g_prev = 0.5 * P[None, None] - gD
    DXa = np.swapaxes(lay.DX, 0, 1)  # (N+1, M, 3, nc)
    jac = np.einsum("ikoa,ikaz->ikoz", g_prev, DXa[:-1]) + np.einsum("ikoa,ikaz->ikoz", g_next, DXa[1:])
    return margin, jac


def assemble_nlp(sc: Scenario) -> NLPProblem:
    """Build the smooth NLP; ``problem.info`` carries the row-count self-report."""
    lay = _Layout(sc)
    ch = sc.chaser
    N, M, Mt, nO, n, nc = lay.N, lay.M, lay.Mt, lay.nO, lay.n, lay.nc
    L_t, _ = lipschitz_bound(ch)
    A_lin, b_lin = _linear_block(sc, lay)
    n_lin = A_lin.shape[0]
    n_obs = N * M * nO
    Y = sc.target_polytope.vertices
    dt = ch.dt
    tol = sc.nominal_tol - NOMINAL_BACKOFF

    # fixed sparsity template for the inequality Jacobian
    dense_pattern = sp.csr_matrix(np.hstack([np.ones((n_obs, nc)), np.zeros((n_obs, n - nc))]))
    nom_pattern = sp.csr_matrix(np.hstack([np.ones((1, lay.nu)), np.zeros((1, n - lay.nu))]))
    template = sp.vstack([A_lin, dense_pattern, nom_pattern], format="csr")
    template.sort_indices()
    nnz_lin = A_lin.nnz
    obs_slice = slice(nnz_lin, nnz_lin + n_obs * nc)
    nom_slice = slice(obs_slice.stop, obs_slice.stop + lay.nu)
    assert template.nnz == nom_slice.stop

    def split(z):
        return z[: lay.nu].reshape(N, 3), z[lay.iR], z[nc:].reshape(Mt, M)

    s_mean = lay.S.mean(axis=0)
    s_sq = float(np.mean(np.sum(lay.S * lay.S, axis=1)))

    def objective(z):
        U, R, _ = split(z)
        # cover-averaged control energy minus optional tube reward
        f = dt * (np.sum(U * U) + 2.0 * R * np.sum(U @ s_mean) + N * R * R * s_sq) - sc.w_R * R
        g = np.zeros(n)
        g[: lay.nu] = (2.0 * dt * (U + R * s_mean)).ravel()
        g[lay.iR] = dt * (2.0 * np.sum(U @ s_mean) + 2.0 * N * R * s_sq) - sc.w_R
        return float(f), g

    aN = lay.alpha[-1]
    DxN = lay.DX[0, -1, :, : lay.nu]

    def eq(z):
        # containment measured from the nominal endpoint; equal to
        # Y - Lambda X_final whenever the row sums are one, better scaled
        U, R, Lam = split(z)
        xN = lay.x_free[-1] + lay.Px[-1] @ U
        LS = Lam @ lay.S
        res = Y - xN - R * aN * LS
        J = np.zeros((4 * Mt, n))
        Jc = J[: 3 * Mt].reshape(Mt, 3, n)
        Jc[:, :, : lay.nu] = -DxN
        Jc[:, :, lay.iR] = -aN * LS
        for v in range(Mt):
            Jc[v, :, nc + v * M: nc + (v + 1) * M] = -R * aN * lay.S.T
            J[3 * Mt + v, nc + v * M: nc + (v + 1) * M] = 1.0
        return np.concatenate([res.ravel(), Lam.sum(axis=1) - 1.0]), J

    def ineq(z):
        U, R, _ = split(z)
        xn, _, X, _ = lay.states(U, R)
        g_lin = A_lin @ z + b_lin
        margin, jac = _obstacle_terms(sc, lay, X, L_t)
        diff = xn[-1] - sc.y_nom
        g_nom = (diff @ diff - tol * tol) / (2.0 * tol)
        data = template.data.copy()
        data[obs_slice] = jac.reshape(-1)
        data[nom_slice] = (np.outer(lay.Px[-1], diff) / tol).ravel()
        J = sp.csr_matrix((data, template.indices, template.indptr), shape=template.shape)
        return np.concatenate([g_lin, margin.ravel(), [g_nom]]), J

    lower = np.concatenate([np.full(lay.nu, -ch.u_lim), [0.0], np.zeros(Mt * M)])
    upper = np.concatenate([np.full(lay.nu, ch.u_lim), [ch.u_lim], np.ones(Mt * M)])
    if sc.fixed_r_delta is not None:
        lower[lay.iR] = upper[lay.iR] = sc.fixed_r_delta
    eq_names, ineq_names = _constraint_names(lay)
    counts = {
        "variables": n,
        "control": 6 * N,
        "state": 6 * (N + 1) * M,
        "velocity": 6 * (N + 1) * M,
        "obstacle": n_obs,
        "containment": 3 * Mt,
        "rowsum": Mt,
        "nominal_endpoint": 1,
    }
    assert n_lin == counts["control"] + counts["state"] + counts["velocity"]
    return NLPProblem(
        n, objective, eq=eq, ineq=ineq, lower=lower, upper=upper,
        eq_names=eq_names, ineq_names=ineq_names,
        info={"counts": counts, "layout": lay, "L_t": L_t},
    )


def initial_guess(sc: Scenario) -> np.ndarray:
    """Minimum-energy transfer of the nominal to ``y_nom``; uniform ``Lambda``."""
    ch = sc.chaser
    Px, _ = rollout_maps(ch)
    row = Px[-1]
    gap = sc.y_nom - ch.x0 - ch.horizon * ch.v0
    R0 = 0.1 * ch.u_lim if sc.fixed_r_delta is None else sc.fixed_r_delta
    U = np.clip(np.outer(row, gap) / (row @ row), -(ch.u_lim - R0), ch.u_lim - R0)
    Lam = np.full((sc.M_target, sc.M), 1.0 / sc.M)
    return Decision(U, R0, Lam).pack()


def min_energy_cost(chaser: ChaserModel, target: np.ndarray) -> float:
    """Closed-form ``dt * sum |u|^2`` of the minimum-energy transfer to ``target``."""
    Px, _ = rollout_maps(chaser)
    row = Px[-1]
    gap = np.asarray(target, dtype=float) - chaser.x0 - chaser.horizon * chaser.v0
    return float(chaser.dt * (gap @ gap) / (row @ row))


def decision_report(sc: Scenario, decision: Decision, problem: NLPProblem | None = None, tol: float = ACTIVE_TOL):
    """Evaluate every constraint at ``decision``; returns violations, max residual and active rows."""
    problem = problem or assemble_nlp(sc)
    z = decision.pack()
    if z.shape != (problem.n,):
        raise ValueError("decision does not match the scenario dimensions")
    c, _ = problem.eq(z)
    g, _ = problem.ineq(z)
    bound_viol = np.maximum(problem.lower - z, 0.0) + np.maximum(z - problem.upper, 0.0)
    viol = [(problem.eq_names[i], float(abs(c[i]))) for i in np.flatnonzero(np.abs(c) > tol)]
    viol += [(problem.ineq_names[i], float(g[i])) for i in np.flatnonzero(g > tol)]
    viol += [(f"bound[{i}]", float(bound_viol[i])) for i in np.flatnonzero(bound_viol > tol)]
    viol.sort(key=lambda t: -t[1])
    active = [problem.ineq_names[i] for i in np.flatnonzero(np.abs(g) <= tol)]
    return {
        "violations": viol,
        "max_violation": float(max(np.abs(c).max(initial=0.0), np.maximum(g, 0).max(initial=0.0), bound_viol.max())),
        "active": active,
    }


def touch_distance(polytope_vertices: np.ndarray, final_positions: np.ndarray) -> float:
    """Smallest distance from a polytope vertex to a facet plane of hull(final positions).

    Negative when a vertex lies outside the hull.
    """
    try:
        hull = ConvexHull(final_positions)
    except QhullError:
        return 0.0
    A, b = hull.equations[:, :3], hull.equations[:, 3]
    norms = np.linalg.norm(A, axis=1)
    return float((-(polytope_vertices @ A.T + b) / norms).min())


def _group_active(names):
    out = {}
    for name in names:
        key = name.split("[", 1)[0]
        out[key] = out.get(key, 0) + 1
    return out


def solve_rgocp(sc: Scenario, opts: SolverOptions | None = None, audit_trials: int = 0, seed: int = 0) -> Solution:
    """Solve and audit; raises ``Infeasible`` or ``NoConvergence`` on failure."""
    start = time.perf_counter()
    problem = assemble_nlp(sc)
    res = minimize(problem, initial_guess(sc), opts)
    elapsed = time.perf_counter() - start
    if res.status is Status.INFEASIBLE:
        raise Infeasible(
            f"no feasible decision: max violation {res.max_violation:.3e} at {res.worst_constraint}",
            res.max_violation, res.worst_constraint,
        )
    if res.status is not Status.CONVERGED:
        raise NoConvergence(
            f"solver stopped after {res.iterations} outer iterations "
            f"(violation {res.max_violation:.3e}, stationarity {res.stationarity:.3e})"
        )
    lay = problem.info["layout"]
    dec = Decision.unpack(res.x, lay.N, lay.Mt, lay.M)
    return finish_solution(sc, dec, problem, res.objective, res.status.value, res.iterations, elapsed,
                           audit_trials, seed)


def finish_solution(sc, dec, problem, objective, status, iterations, elapsed, audit_trials=0, seed=0) -> Solution:
    """Rebuild sets from a decision and run the post-solve audits."""
    report = decision_report(sc, dec, problem)
    L_t = problem.info["L_t"]
    tube = dec.tube(sc.directions)
    snaps = reach_snapshots(sc.chaser, tube, sc.eps)
    rtc = build_rtc(snaps, L_t, sc.eps)
    Xf = snaps[-1].positions
    resid = containment_residual(dec.Lambda, Xf, sc.target_polytope.vertices)
    obstacle_worst = max(
        (ellipsoid_halfspace_margin(e, o) for ells in rtc.ellipsoids for e in ells for o in sc.obstacles),
        default=-np.inf,
    )
    x_nom = rollout(sc.chaser, dec.U)[-1, :3]
    audits = {
        "obstacle_worst_margin": float(obstacle_worst),
        "lambda_min": float(dec.Lambda.min()),
        "lambda_rowsum_error": float(np.abs(dec.Lambda.sum(axis=1) - 1.0).max()),
        "velocity": velocity_audit(sc.chaser, control_cover(tube)),
        "hull_coverage": audit_hull_coverage(sc.chaser, tube, rtc, audit_trials, seed),
    }
    return Solution(
        decision=dec,
        snapshots=snaps,
        rtc=rtc,
        objective=float(objective),
        residuals={
            "max_violation": report["max_violation"],
            "containment": float(np.abs(resid).max()),
            "nominal_endpoint_distance": float(np.linalg.norm(x_nom - sc.y_nom)),
        },
        x_nom_final=x_nom,
        active=_group_active(report["active"]),
        touch_distance=touch_distance(sc.target_polytope.vertices, Xf),
        status=status,
        iterations=iterations,
        solve_time=elapsed,
        audits=audits,
    )


def audits_clean(sol: Solution, tol: float = ACTIVE_TOL) -> bool:
    a = sol.audits
    t1 = a["hull_coverage"]
    return (
        sol.residuals["max_violation"] <= tol
        and sol.residuals["containment"] <= tol
        and a["obstacle_worst_margin"] <= tol
        and a["lambda_min"] >= -tol
        and a["lambda_rowsum_error"] <= tol
        and a["velocity"]["max_axis_excess"] <= 1e-9
        and t1["violations"] == 0
    )


def validate_solution(sol, sc: Scenario, trials: int, seed: int = 0) -> dict:
    """Monte-Carlo end-to-end check of the interception guarantee.

    Each trial draws a target initial orientation, propagates it, writes the
    realized grasp point as a convex combination of polytope vertices (bounded
    least squares), maps that through ``Lambda`` to cover weights and
    flies the matching combination of cover controls. ``sol`` may be a
    ``Solution`` or a bare ``Decision``.
    """
    dec = getattr(sol, "decision", sol)
    report = {"trials": trials, "linearity_error": 0.0, "worst_miss": 0.0, "outside_polytope": 0}
    if trials == 0:
        return report
    if sc.target is None or sc.target_initial is None:
        raise ValueError("scenario has no target model to sample from")
    rng = np.random.default_rng(seed)
    R0 = sample_ball_interior(sc.target_initial, trials, rng)
    Rs, _ = propagate(R0, sc.target.omega0, sc.target, [0.0, sc.chaser.horizon])
    grasp = sc.target.r_center + Rs[-1] @ sc.target.p_grasp
    Y = sc.target_polytope.vertices
    covers = control_cover(dec.tube(sc.directions))
    ends = rollout(sc.chaser, covers)[:, -1, :3]
    yc = Y.mean(axis=0)
    A = np.vstack([(Y - yc).T, np.ones(len(Y))])
    lin_err = miss = 0.0
    outside = 0
    for y in grasp:
        # bounded least squares (exact active set) on the simplex
        mu = lsq_linear(A, np.concatenate([y - yc, [1.0]]), bounds=(0, np.inf), method="bvls", tol=1e-14).x
        mu = mu / mu.sum()
        w = mu @ dec.Lambda
        end = rollout(sc.chaser, np.tensordot(w, covers, axes=1))[-1, :3]
        lin_err = max(lin_err, float(np.linalg.norm(end - w @ ends)))
        miss = max(miss, float(np.linalg.norm(end - y)))
        outside += int(not sc.target_polytope.contains(y, tol=1e-9)[0])
    report.update(linearity_error=lin_err, worst_miss=miss, outside_polytope=outside)
    return report
