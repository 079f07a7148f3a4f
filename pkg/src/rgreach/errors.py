"""Exception types shared across the package."""


class ReachError(Exception):
    """Base class for all package errors."""


class AngleAtPi(ReachError, ValueError):
    """Rotation angle is (numerically) pi, so the logarithm is not unique."""


class RadiusTooLarge(ReachError, ValueError):
    """Geodesic ball radius violates the strong-convexity bound pi/2."""


class SpreadTooLarge(ReachError, ValueError):
    """Rotation samples are too spread out for a unique Frechet mean."""


class NotStronglyConvex(ReachError, ValueError):
    """Minimal enclosing geodesic ball radius reached pi/2."""


class NoConvergence(ReachError, RuntimeError):
    """An iterative procedure hit its iteration cap."""


class FlowBoundViolated(ReachError, ValueError):
    """Two consecutive samples are farther apart than the flow bound allows."""


class InfeasibleBackoff(ReachError, ValueError):
    """Velocity backoff leaves no admissible discrete velocity."""


class EvaluatorFailure(ReachError, FloatingPointError):
    """An NLP evaluator returned non-finite values."""


class Infeasible(ReachError, RuntimeError):
    """The trajectory optimization problem has no feasible point."""

    def __init__(self, message, max_violation=None, worst_constraint=None):
        super().__init__(message)
        self.max_violation = max_violation
        self.worst_constraint = worst_constraint


class ConfigError(ReachError, ValueError):
    """Scenario configuration is malformed or inconsistent."""
