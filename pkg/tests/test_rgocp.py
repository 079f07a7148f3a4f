import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rgreach.chaser_reach import Ellipsoid, control_cover, lipschitz_bound, rollout, rtc_ellipsoid
from rgreach.errors import ConfigError, Infeasible
from rgreach.manifold import fibonacci_sphere
from rgreach.nlp_solver import check_gradients
from rgreach.rgocp import (
    Decision,
    Halfspace,
    assemble_nlp,
    containment_residual,
    decision_report,
    ellipsoid_halfspace_margin,
    initial_guess,
    min_energy_cost,
    solve_rgocp,
    touch_distance,
    validate_solution,
)

from oracles import in_hull_lp
from scenarios import point_scenario, small_scenario


@pytest.fixture(scope="module")
def small_solution():
    sc = small_scenario(obstacles=[((0.0, 1.0, 0.0), -0.95)])
    return sc, solve_rgocp(sc, audit_trials=200, seed=1)


# containment -----------------------------------------------------------------

def test_containment_selector_and_centroid(rng):
    X = rng.normal(size=(6, 3))
    perm = np.eye(6)[[4, 0, 2]]
    assert np.abs(containment_residual(perm, X, X[[4, 0, 2]])).max() == 0.0
    lam = np.full((1, 6), 1 / 6)
    assert np.abs(containment_residual(lam, X, X.mean(axis=0, keepdims=True))).max() < 1e-15
    with pytest.raises(ValueError):
        containment_residual(np.ones((2, 5)), X, X[:2])


def test_containment_implies_hull_membership(rng):
    for _ in range(20):
        X = rng.normal(size=(10, 3))
        lam = rng.random((5, 10)) ** 3
        lam /= lam.sum(axis=1, keepdims=True)
        Y = lam @ X
        assert np.abs(containment_residual(lam, X, Y)).max() < 1e-14
        assert all(in_hull_lp(X, y) for y in Y)


# obstacle margin -------------------------------------------------------------

def test_margin_ball_signed_distance():
    r, c = 0.7, np.array([1.0, 2.0, -0.5])
    ball = Ellipsoid(c, r * r * np.eye(3))
    p = np.array([1.0, 2.0, 2.0]) / 3.0
    for d in (2.0, r, 0.1):
        hs = Halfspace(p, -(p @ c) - d)
        assert ellipsoid_halfspace_margin(ball, hs) == pytest.approx(r - d, abs=1e-14)


def test_margin_matches_surface_samples(rng):
    for _ in range(10):
        A = rng.normal(size=(3, 3))
        e = Ellipsoid(rng.normal(size=3), A @ A.T + 0.1 * np.eye(3))
        hs = Halfspace(rng.normal(size=3), rng.normal())
        m = ellipsoid_halfspace_margin(e, hs)
        # surface sampled through the square-root map of the shape matrix
        d = rng.normal(size=(1000, 3))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        L = np.linalg.cholesky(e.shape)
        pts = e.center + d @ L.T
        vals = pts @ hs.p + hs.h
        assert vals.max() <= m + 1e-12
        assert vals.max() >= m - 0.05 * np.sqrt(np.linalg.eigvalsh(e.shape).max())
        if m < 0:
            assert np.all(vals < 0)


def test_margin_degenerate_segment():
    a, b = np.array([0.0, 0.0, 0.0]), np.array([1.0, 0.5, 0.0])
    e = rtc_ellipsoid(a, b, np.linalg.norm(b - a), 1.0)
    for p in fibonacci_sphere(20):
        hs = Halfspace(p, 0.3)
        assert ellipsoid_halfspace_margin(e, hs) == pytest.approx(max(p @ a, p @ b) + 0.3, abs=1e-7)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-3),
       st.floats(-5, 5), st.floats(1e-3, 1e3))
def test_halfspace_scale_invariance(p, h, scale):
    a = Halfspace(p, h)
    b = Halfspace(scale * np.asarray(p), scale * h)
    assert abs(np.linalg.norm(a.p) - 1.0) <= 1e-12
    assert np.allclose(a.p, b.p, atol=1e-12) and a.h == pytest.approx(b.h, rel=1e-12, abs=1e-12)


def test_halfspace_rejects_zero():
    with pytest.raises(ConfigError):
        Halfspace(np.zeros(3), 1.0)


# assembly --------------------------------------------------------------------

def test_counts_self_report():
    sc = small_scenario(obstacles=[((0, 0, -1), -2.0), ((0, 1, 0), -3.0)])
    prob = assemble_nlp(sc)
    N, M, Mt, nO = 10, 8, sc.M_target, 2
    c = prob.info["counts"]
    assert c == {
        "variables": 3 * N + 1 + Mt * M,
        "control": N * 3 * 2,
        "state": (N + 1) * M * 6,
        "velocity": (N + 1) * M * 6,
        "obstacle": N * M * nO,
        "containment": Mt * 3,
        "rowsum": Mt,
        "nominal_endpoint": 1,
    }
    z = initial_guess(sc)
    g, Jg = prob.ineq(z)
    e, Je = prob.eq(z)
    assert len(g) == len(prob.ineq_names) == Jg.shape[0] == sum(c[k] for k in ("control", "state", "velocity", "obstacle", "nominal_endpoint"))
    assert len(e) == len(prob.eq_names) == Je.shape[0] == 4 * Mt


def test_gradient_check_random_point(rng):
    sc = small_scenario(obstacles=[((0, 0, -1), -2.0), ((1, 1, 0), -3.0)])
    prob = assemble_nlp(sc)
    z = initial_guess(sc)
    z[:30] += 0.1 * rng.uniform(-1, 1, 30)
    z[30] = 0.05
    z[31:] = rng.random(z.size - 31)
    assert check_gradients(prob, z, 1e-6) < 1e-4


def test_obstacle_rows_match_geometric_ellipsoids(rng):
    sc = small_scenario(obstacles=[((0.2, 1.0, -0.3), -1.0)])
    prob = assemble_nlp(sc)
    z = initial_guess(sc)
    z[:30] += 0.05 * rng.uniform(-1, 1, 30)
    dec = Decision.unpack(z, 10, sc.M_target, sc.M)
    g, _ = prob.ineq(z)
    names = prob.ineq_names
    L_t, _ = lipschitz_bound(sc.chaser)
    X = rollout(sc.chaser, control_cover(dec.tube(sc.directions)))[..., :3]
    hs = sc.obstacles[0]
    for i in (0, 4, 9):
        for k in (0, 5):
            row = names.index(f"obstacle[o=0,i={i},k={k}]")
            e = rtc_ellipsoid(X[k, i], X[k, i + 1], L_t, 1.0)
            assert g[row] == pytest.approx(ellipsoid_halfspace_margin(e, hs), abs=1e-12)


def test_scenario_validation():
    with pytest.raises(ConfigError):
        small_scenario(M=3)
    sc = small_scenario()
    with pytest.raises(ConfigError):
        type(sc)(sc.chaser, sc.target_polytope, sc.y_nom, np.array([[-1.0, -1, -1], [1, 1, 1]]))
    with pytest.raises(ConfigError):
        type(sc)(sc.chaser, sc.target_polytope, sc.y_nom, sc.x_bounds, eps=10.0)


# solve -----------------------------------------------------------------------

def test_trivial_ballistic_point():
    v0 = np.array([0.1, -0.05, 0.02])
    sc = point_scenario(10.0 * v0, v0=v0, fixed_r_delta=0.0)
    sol = solve_rgocp(sc)
    assert sol.status == "Converged"
    assert sol.objective == pytest.approx(0.0, abs=1e-10)
    assert np.abs(sol.decision.U).max() <= 1e-6
    assert sol.decision.R_delta == 0.0
    assert sol.residuals["containment"] <= 1e-9


def test_point_target_min_energy_cost():
    target = np.array([1.0, 0.5, -0.2])
    sc = point_scenario(target, fixed_r_delta=0.0)
    sol = solve_rgocp(sc)
    assert sol.status == "Converged"
    assert sol.objective == pytest.approx(min_energy_cost(sc.chaser, target), rel=1e-5)


def test_infeasible_small_thrust():
    with pytest.raises(Infeasible) as err:
        solve_rgocp(small_scenario(u_lim=0.05))
    assert err.value.max_violation > 1e-6
    assert err.value.worst_constraint is not None


def test_small_solution_structure(small_solution):
    sc, sol = small_solution
    assert sol.status == "Converged"
    assert sol.residuals["max_violation"] <= 1e-6
    assert sol.residuals["containment"] <= 1e-6
    assert sol.residuals["nominal_endpoint_distance"] <= sc.nominal_tol + 1e-6
    assert abs(sol.touch_distance) <= 1e-3 * sc.scene_scale
    assert sol.decision.R_delta > 0
    assert sol.audits["hull_coverage"]["violations"] == 0
    assert sol.audits["obstacle_worst_margin"] <= 1e-6
    assert sol.active.get("obstacle", 0) > 0


def test_small_solution_triangle_inequality(small_solution):
    sc, sol = small_solution
    covers = control_cover(sol.decision.tube(sc.directions))
    assert np.abs(covers).max() <= sc.chaser.u_lim + 1e-6


def test_small_solution_hull_oracle(small_solution):
    sc, sol = small_solution
    Xf = sol.snapshots[-1].positions
    lam = sol.decision.Lambda
    assert lam.min() >= 0 and np.abs(lam.sum(axis=1) - 1).max() < 1e-6
    # vertices nudged 1e-6 toward the centroid must pass an independent LP hull test
    c = Xf.mean(axis=0)
    Y = sc.target_polytope.vertices
    assert all(in_hull_lp(Xf, y + 1e-6 * (c - y) / np.linalg.norm(c - y)) for y in Y)


def test_decision_report_names_tamper(small_solution):
    sc, sol = small_solution
    ok = decision_report(sc, sol.decision)
    assert ok["violations"] == [] and ok["max_violation"] <= 1e-6
    U = sol.decision.U.copy()
    U[3, 0] += 0.02
    bad = decision_report(sc, Decision(U, sol.decision.R_delta, sol.decision.Lambda))
    assert bad["violations"] and bad["violations"][0][0].startswith("containment")


def test_touch_distance_signs():
    cube = np.array([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)], dtype=float)
    assert touch_distance(np.array([[0.5, 0.5, 0.5]]), cube) == pytest.approx(0.5)
    assert touch_distance(np.array([[0.5, 0.5, 1.0]]), cube) == pytest.approx(0.0, abs=1e-15)
    assert touch_distance(np.array([[0.5, 0.5, 1.2]]), cube) == pytest.approx(-0.2)


def test_validate_solution(small_solution):
    sc, sol = small_solution
    assert validate_solution(sol, sc, 0)["trials"] == 0
    rep = validate_solution(sol, sc, 200, seed=4)
    assert rep["linearity_error"] <= 1e-9
    assert rep["outside_polytope"] == 0
    assert rep["worst_miss"] <= 1e-6
