"""Interactive crowd dynamics with reciprocal collision avoidance."""

from .field import CrowdField
from .orca import compute_orca_constraints, feasible, orca_halfplane, solve_velocity
from .routes import connected_components, sample_routes
from .step import spawn_agents, step_crowd, write_trace
from .types import (
    AgentKind,
    CrowdAgent,
    CrowdConfig,
    HalfPlane,
    MAX_SPEED_OF_KIND,
    PREF_SPEED_RANGE,
    RADIUS_OF_KIND,
)

__all__ = [
    "AgentKind", "CrowdAgent", "CrowdConfig", "CrowdField", "HalfPlane",
    "MAX_SPEED_OF_KIND", "PREF_SPEED_RANGE", "RADIUS_OF_KIND",
    "compute_orca_constraints", "connected_components", "feasible",
    "orca_halfplane", "sample_routes", "solve_velocity", "spawn_agents",
    "step_crowd", "write_trace",
]
