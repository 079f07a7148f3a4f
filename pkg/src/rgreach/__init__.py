"""Reachability analysis and reachability-guaranteed trajectory optimization
for intercepting an uncertainly tumbling rigid-body target."""

__version__ = "0.1.0"
