"""Smooth constrained minimization by an augmented-Lagrangian method.

Problems are ``min f(x)`` subject to ``c(x) = 0``, ``g(x) <= 0`` and box
bounds. The outer loop is a Powell-Hestenes-Rockafellar augmented Lagrangian;
each subproblem is solved by a bound-constrained limited-memory BFGS.
Jacobians are supplied by the caller as dense arrays or scipy sparse matrices.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import minimize as _scipy_minimize

from .errors import EvaluatorFailure


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    INFEASIBLE = "Infeasible"
    ITERATION_CAP = "IterationCap"


@dataclass
class NLPProblem:
    """Objective returns ``(f, grad)``; constraint evaluators return
    ``(values, jacobian)``. Inequalities follow ``g(x) <= 0``."""

    n: int
    objective: Callable
    eq: Optional[Callable] = None
    ineq: Optional[Callable] = None
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    eq_names: Optional[Sequence[str]] = None
    ineq_names: Optional[Sequence[str]] = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lower = np.full(self.n, -np.inf) if self.lower is None else np.asarray(self.lower, dtype=float)
        self.upper = np.full(self.n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float)

    def bounds(self):
        return [(None if np.isinf(lo) else lo, None if np.isinf(hi) else hi) for lo, hi in zip(self.lower, self.upper)]


@dataclass
class SolverOptions:
    mu0: float = 10.0
    mu_factor: float = 10.0
    mu_max: float = 1e10
    multiplier_cap: float = 1e8
    feas_tol: float = 1e-6
    stat_tol: float = 1e-5
    max_outer: int = 50
    max_inner: int = 5000
    memory: int = 10
    verbose: bool = False


@dataclass
class SolveResult:
    x: np.ndarray
    objective: float
    max_violation: float
    stationarity: float
    iterations: int
    status: Status
    eq_multipliers: np.ndarray
    ineq_multipliers: np.ndarray
    worst_constraint: Optional[str] = None
    merit_history: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED


def _finite(name, *arrays):
    for a in arrays:
        data = a.data if sp.issparse(a) else np.asarray(a)
        if not np.all(np.isfinite(data)):
            raise EvaluatorFailure(f"{name} evaluator returned non-finite values")


class _Evaluator:
    """Caches the last evaluation point; validates outputs."""

    def __init__(self, problem: NLPProblem):
        self.p = problem
        self._x = None

    def __call__(self, x):
        if self._x is not None and np.array_equal(x, self._x):
            return self._cache
        f, gf = self.p.objective(x)
        _finite("objective", f, gf)
        if self.p.eq is not None:
            c, Jc = self.p.eq(x)
            _finite("equality", c, Jc)
        else:
            c, Jc = np.zeros(0), sp.csr_matrix((0, self.p.n))
        if self.p.ineq is not None:
            g, Jg = self.p.ineq(x)
            _finite("inequality", g, Jg)
        else:
            g, Jg = np.zeros(0), sp.csr_matrix((0, self.p.n))
        self._x = np.array(x, copy=True)
        self._cache = (float(f), np.asarray(gf, dtype=float), np.asarray(c, dtype=float), Jc,
                       np.asarray(g, dtype=float), Jg)
        return self._cache


def _violation(c, g):
    v_eq = np.abs(c).max() if c.size else 0.0
    v_in = np.maximum(g, 0.0).max() if g.size else 0.0
    return float(max(v_eq, v_in))


def _worst_name(problem, c, g):
    best, name = -1.0, None
    if c.size:
        i = int(np.argmax(np.abs(c)))
        best, name = abs(c[i]), (problem.eq_names[i] if problem.eq_names else f"eq[{i}]")
    if g.size:
        i = int(np.argmax(g))
        if g[i] > best:
            best, name = g[i], (problem.ineq_names[i] if problem.ineq_names else f"ineq[{i}]")
    return name if best > 0 else None


def _projected_gradient(x, grad, lower, upper):
    return np.abs(np.clip(x - grad, lower, upper) - x).max() if x.size else 0.0


def _al_value(x, ev, lam, nu, mu):
    f, gf, c, Jc, g, Jg = ev(x)
    shifted = np.maximum(nu + mu * g, 0.0)
    val = f + lam @ c + 0.5 * mu * (c @ c) + (shifted @ shifted - nu @ nu) / (2.0 * mu)
    grad = gf + Jc.T @ (lam + mu * c) + Jg.T @ shifted
    return val, np.asarray(grad, dtype=float).ravel()


def _column_scales(ev, x, nu, mu):
    """Diagonal Gauss-Newton estimate of the subproblem curvature, returned as
    per-variable scale factors (1/sqrt of the curvature, floored)."""
    _, _, c, Jc, g, Jg = ev(x)
    active = (nu + mu * g) > 0
    d = mu * np.asarray(sp.csr_matrix(Jc).power(2).sum(axis=0)).ravel()
    if np.any(active):
        d += mu * np.asarray(sp.csr_matrix(Jg)[np.flatnonzero(active)].power(2).sum(axis=0)).ravel()
    d = np.maximum(d, max(1.0, 1e-8 * d.max(initial=0.0)))
    return 1.0 / np.sqrt(d)


def _inner(ev, x, lam, nu, mu, problem, opts, gtol):
    s = _column_scales(ev, x, nu, mu)

    def fun(y):
        val, grad = _al_value(s * y, ev, lam, nu, mu)
        return val, s * grad

    lo = np.where(np.isinf(problem.lower), -np.inf, problem.lower / s)
    hi = np.where(np.isinf(problem.upper), np.inf, problem.upper / s)
    bounds = [(None if np.isinf(a) else a, None if np.isinf(b) else b) for a, b in zip(lo, hi)]
    res = _scipy_minimize(
        fun,
        np.clip(x / s, lo, hi),
        jac=True,
        method="L-BFGS-B",
        bounds=bounds,
        options={"maxiter": opts.max_inner, "maxcor": opts.memory, "gtol": gtol, "ftol": 1e-15},
    )
    return np.clip(s * np.asarray(res.x, dtype=float), problem.lower, problem.upper)


def _feasibility_phase(ev, x, problem, opts):
    """Minimize the squared constraint violation over the box; returns the
    best violation reached (a witness of infeasibility when it stays large)."""

    def phi(z):
        _, _, c, Jc, g, Jg = ev(z)
        gp = np.maximum(g, 0.0)
        return 0.5 * (c @ c + gp @ gp), np.asarray(Jc.T @ c + Jg.T @ gp, dtype=float).ravel()

    res = _scipy_minimize(phi, x, jac=True, method="L-BFGS-B", bounds=problem.bounds(),
                          options={"maxiter": 4 * opts.max_inner, "gtol": 1e-14, "ftol": 1e-20})
    z = np.asarray(res.x, dtype=float)
    _, _, c, _, g, _ = ev(z)
    return z, _violation(c, g)


def minimize(problem: NLPProblem, x0: np.ndarray, opts: SolverOptions | None = None) -> SolveResult:
    """Augmented-Lagrangian solve; deterministic for identical inputs."""
    opts = opts or SolverOptions()
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (problem.n,):
        raise ValueError(f"x0 must have shape ({problem.n},)")
    if np.any(x < problem.lower) or np.any(x > problem.upper):
        raise ValueError("x0 must lie within the variable bounds")
    ev = _Evaluator(problem)
    _, _, c, _, g, _ = ev(x)
    lam = np.zeros(c.size)
    nu = np.zeros(g.size)
    mu = opts.mu0
    viol = _violation(c, g)
    history = []
    stat = np.inf
    it = 0
    for it in range(1, opts.max_outer + 1):
        gtol = max(1e-3 * opts.stat_tol, 1e-2 * 0.1 ** (it - 1))
        before, _ = _al_value(x, ev, lam, nu, mu)
        x = _inner(ev, x, lam, nu, mu, problem, opts, gtol)
        after, _ = _al_value(x, ev, lam, nu, mu)
        history.append((before, after))

        f, gf, c, Jc, g, Jg = ev(x)
        lam = np.clip(lam + mu * c, -opts.multiplier_cap, opts.multiplier_cap)
        nu = np.clip(nu + mu * g, 0.0, opts.multiplier_cap)
        new_viol = _violation(c, g)
        grad_l = np.asarray(gf + Jc.T @ lam + Jg.T @ nu, dtype=float).ravel()
        stat = _projected_gradient(x, grad_l, problem.lower, problem.upper)
        if opts.verbose:
            print(f"[AL {it:2d}] f={f:.8g} viol={new_viol:.3e} stat={stat:.3e} mu={mu:.1e}")
        if new_viol <= opts.feas_tol and stat <= opts.stat_tol:
            viol = new_viol
            status = Status.CONVERGED
            break
        if new_viol > 0.25 * viol and new_viol > opts.feas_tol:
            if mu >= opts.mu_max:
                viol = new_viol
                break
            mu = min(mu * opts.mu_factor, opts.mu_max)
        viol = new_viol
    else:
        status = None

    if not (viol <= opts.feas_tol and stat <= opts.stat_tol):
        status = Status.ITERATION_CAP
        if viol > opts.feas_tol:
            z, best = _feasibility_phase(ev, x, problem, opts)
            if best > opts.feas_tol:
                status = Status.INFEASIBLE
    f, _, c, _, g, _ = ev(x)
    return SolveResult(
        x=x,
        objective=f,
        max_violation=_violation(c, g),
        stationarity=float(stat),
        iterations=it,
        status=status,
        eq_multipliers=lam,
        ineq_multipliers=nu,
        worst_constraint=_worst_name(problem, c, g),
        merit_history=history,
    )


def _dense(J):
    return J.toarray() if sp.issparse(J) else np.atleast_2d(np.asarray(J, dtype=float))


def check_gradients(problem: NLPProblem, x: np.ndarray, h: float = 1e-6) -> float:
    """Worst relative error between supplied derivatives and central differences.

    Each block (objective gradient, equality Jacobian, inequality Jacobian) is
    compared in max-norm and normalized by the block's largest entry.
    """
    if not h > 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=float)
    blocks = [("objective", lambda z: problem.objective(z))]
    if problem.eq is not None:
        blocks.append(("eq", problem.eq))
    if problem.ineq is not None:
        blocks.append(("ineq", problem.ineq))
    worst = 0.0
    for _, fn in blocks:
        val, jac = fn(x)
        J = _dense(jac) if np.ndim(val) else np.atleast_2d(np.asarray(jac, dtype=float))
        fd = np.zeros_like(J)
        for i in range(x.size):
            e = np.zeros_like(x)
            e[i] = h
            fp = np.atleast_1d(fn(x + e)[0])
            fm = np.atleast_1d(fn(x - e)[0])
            fd[:, i] = (fp - fm) / (2.0 * h)
        scale = max(np.abs(J).max(), np.abs(fd).max(), 1e-12)
        worst = max(worst, float(np.abs(fd - J).max() / scale))
    return worst
