"""Scenario configuration: TOML documents mapped onto dataclasses.

Unknown keys are rejected and missing required keys are reported with their
dotted path. Units: metres, seconds, kilograms, newtons, radians.
"""
from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .chaser_reach import ChaserModel
from .errors import ConfigError
from .manifold import GeodesicBall, so3_exp
from .nlp_solver import SolverOptions
from .rgocp import Halfspace, Scenario
from .target_reach import TargetModel, TargetReach, analyze_target

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

REQUIRED = dataclasses.MISSING


@dataclass
class TargetConfig:
    inertia: list = REQUIRED  # principal moments [kg m^2]
    omega0: list = REQUIRED  # body rate [rad/s]
    center: list = REQUIRED  # centre of mass [m]
    grasp: list = REQUIRED  # grasp point in the body frame [m]
    rho: float = REQUIRED  # attitude uncertainty radius [rad]
    attitude: list = field(default_factory=lambda: [0.0, 0.0, 0.0])  # rotation vector of the nominal attitude
    cover_size: int = 30
    facet_count: int = 4


@dataclass
class ChaserConfig:
    mass: float = REQUIRED  # [kg]
    horizon: float = REQUIRED  # [s]
    dt: float = REQUIRED  # [s]
    x0: list = field(default_factory=lambda: [0.0, 0.0, 0.0])  # [m]
    v0: list = field(default_factory=lambda: [0.0, 0.0, 0.0])  # [m/s]
    u_lim: float = 1.0  # per-axis thrust bound [N]
    v_lim: float = 0.5  # per-axis speed bound [m/s]


@dataclass
class ObstacleConfig:
    p: list = REQUIRED  # free space is p.x + h <= 0
    h: float = REQUIRED


@dataclass
class ProblemConfig:
    cover_size: int = 32
    eps: float = 0.0  # [m]
    nominal_tol: float = -1.0  # [m]; negative selects 5% of |grasp|
    x_min: list = field(default_factory=lambda: [-5.0, -10.0, -10.0])
    x_max: list = field(default_factory=lambda: [15.0, 10.0, 10.0])
    w_R: float = 0.0
    obstacles: list = field(default_factory=lambda: [ObstacleConfig([0.0, 0.0, -1.0], -5.0)])


@dataclass
class SolverConfig:
    mu0: float = 10.0
    mu_factor: float = 10.0
    mu_max: float = 1e10
    multiplier_cap: float = 1e8
    feas_tol: float = 1e-6
    stat_tol: float = 1e-5
    max_outer: int = 50
    max_inner: int = 5000
    memory: int = 10


@dataclass
class AuditConfig:
    seed: int = 0
    coverage_trials: int = 1000
    enclosure_trials: int = 10000
    validate_trials: int = 1000


@dataclass
class Config:
    target: TargetConfig = REQUIRED
    chaser: ChaserConfig = REQUIRED
    problem: ProblemConfig = field(default_factory=ProblemConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    audit: AuditConfig = field(default_factory=AuditConfig)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_NESTED = {"target": TargetConfig, "chaser": ChaserConfig, "problem": ProblemConfig,
           "solver": SolverConfig, "audit": AuditConfig}


def _check_value(value, kind: str, path: str):
    number = (int, float)
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, number):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if kind == "list":
        if (not isinstance(value, list) or len(value) != 3
                or any(isinstance(v, bool) or not isinstance(v, number) for v in value)):
            raise ConfigError(f"{path}: expected a list of 3 numbers, got {value!r}")
        return [float(v) for v in value]
    raise ConfigError(f"{path}: unsupported field kind {kind}")


def _build(cls, data, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'document'}: expected a table")
    known = {f.name: f for f in dataclasses.fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown key '{path + '.' if path else ''}{key}'")
    kwargs = {}
    for name, f in known.items():
        sub = f"{path}.{name}" if path else name
        if name not in data:
            if f.default is REQUIRED and f.default_factory is REQUIRED:
                raise ConfigError(f"missing required key '{sub}'")
            continue
        value = data[name]
        if cls is Config:
            kwargs[name] = _build(_NESTED[name], value, sub)
        elif cls is ProblemConfig and name == "obstacles":
            if not isinstance(value, list):
                raise ConfigError(f"{sub}: expected an array of tables")
            kwargs[name] = [_build(ObstacleConfig, o, f"{sub}[{i}]") for i, o in enumerate(value)]
        else:
            kind = f.type if isinstance(f.type, str) else f.type.__name__
            kwargs[name] = _check_value(value, kind, sub)
    return cls(**kwargs)


def config_from_dict(data: dict) -> Config:
    cfg = _build(Config, data, "")
    _validate(cfg)
    return cfg


def load_config(path) -> Config:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: malformed TOML: {exc}") from exc
    return config_from_dict(data)


def _validate(cfg: Config):
    t, c, p = cfg.target, cfg.chaser, cfg.problem
    checks = [
        (all(v > 0 for v in t.inertia), "target.inertia", "must be positive"),
        (0 <= t.rho < np.pi / 2, "target.rho", "must lie in [0, pi/2)"),
        (t.cover_size >= 4, "target.cover_size", "must be at least 4"),
        (t.facet_count >= 3, "target.facet_count", "must be at least 3"),
        (np.linalg.norm(t.grasp) > 0, "target.grasp", "must be nonzero"),
        (c.mass > 0, "chaser.mass", "must be positive"),
        (c.dt > 0, "chaser.dt", "must be positive"),
        (c.horizon > 0, "chaser.horizon", "must be positive"),
        (abs(round(c.horizon / c.dt) * c.dt - c.horizon) <= 1e-9 * c.horizon, "chaser.horizon",
         "must be a multiple of chaser.dt"),
        (c.u_lim > 0, "chaser.u_lim", "must be positive"),
        (c.v_lim > 0, "chaser.v_lim", "must be positive"),
        (p.cover_size >= 4, "problem.cover_size", "must be at least 4"),
        (p.eps >= 0, "problem.eps", "must be non-negative"),
        (all(a < b for a, b in zip(p.x_min, p.x_max)), "problem.x_min", "must be below problem.x_max"),
        (cfg.audit.coverage_trials >= 0 and cfg.audit.enclosure_trials >= 0 and cfg.audit.validate_trials >= 0,
         "audit", "trial counts must be non-negative"),
    ]
    for ok, key, msg in checks:
        if not ok:
            raise ConfigError(f"{key}: {msg}")
    for i, o in enumerate(p.obstacles):
        if np.linalg.norm(o.p) == 0:
            raise ConfigError(f"problem.obstacles[{i}].p: must be nonzero")


def default_config() -> Config:
    """Tumbling-target interception scenario with the package's default assumptions."""
    return config_from_dict({
        "target": {"inertia": [29.2, 30.0, 38.4], "omega0": [0.0, 0.0698, 0.0], "center": [5.5, 0.0, 0.0],
                   "grasp": [1.0, 0.0, 0.0], "rho": 0.17},
        "chaser": {"mass": 32.0, "horizon": 30.0, "dt": 1.0},
    })


def target_model(cfg: Config) -> TargetModel:
    t = cfg.target
    return TargetModel(np.array(t.inertia), np.array(t.omega0), np.array(t.center), np.array(t.grasp))


def initial_ball(cfg: Config) -> GeodesicBall:
    return GeodesicBall(so3_exp(np.array(cfg.target.attitude)), cfg.target.rho)


def chaser_model(cfg: Config) -> ChaserModel:
    c = cfg.chaser
    n = int(round(c.horizon / c.dt))
    return ChaserModel(c.mass, np.array(c.x0), np.array(c.v0), c.u_lim, c.v_lim, c.dt, c.horizon, n)


def time_grid(cfg: Config) -> np.ndarray:
    return chaser_model(cfg).times


def solver_options(cfg: Config, verbose: bool = False) -> SolverOptions:
    return SolverOptions(**dataclasses.asdict(cfg.solver), verbose=verbose)


def nominal_tol(cfg: Config) -> float:
    tol = cfg.problem.nominal_tol
    return 0.05 * float(np.linalg.norm(cfg.target.grasp)) if tol < 0 else tol


def run_target(cfg: Config) -> TargetReach:
    return analyze_target(target_model(cfg), initial_ball(cfg), cfg.target.cover_size, time_grid(cfg),
                          cfg.target.facet_count)


def build_scenario(cfg: Config, polytope, y_nom) -> Scenario:
    p = cfg.problem
    return Scenario(
        chaser=chaser_model(cfg),
        target_polytope=polytope,
        y_nom=y_nom,
        x_bounds=np.array([p.x_min, p.x_max]),
        obstacles=[Halfspace(np.array(o.p), o.h) for o in p.obstacles],
        nominal_tol=nominal_tol(cfg),
        eps=p.eps,
        M=p.cover_size,
        target=target_model(cfg),
        target_initial=initial_ball(cfg),
        w_R=p.w_R,
    )
