"""Crowd simulation types."""

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np


class AgentKind(IntEnum):
    PEDESTRIAN = 0
    CYCLIST = 1
    SCOOTER = 2


MAX_SPEED_OF_KIND = {
    AgentKind.PEDESTRIAN: 2.0,
    AgentKind.CYCLIST: 5.0,
    AgentKind.SCOOTER: 4.0,
}

# preferred speed sampling ranges (m/s)
PREF_SPEED_RANGE = {
    AgentKind.PEDESTRIAN: (0.8, 1.4),
    AgentKind.CYCLIST: (2.0, 4.0),
    AgentKind.SCOOTER: (1.5, 3.0),
}

RADIUS_OF_KIND = {
    AgentKind.PEDESTRIAN: 0.3,
    AgentKind.CYCLIST: 0.45,
    AgentKind.SCOOTER: 0.4,
}


@dataclass
class CrowdAgent:
    id: int
    position: np.ndarray  # (2,) m
    velocity: np.ndarray  # (2,) m/s
    radius: float
    preferred_speed: float
    goal: np.ndarray  # (2,) m
    kind: AgentKind = AgentKind.PEDESTRIAN

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64)
        self.velocity = np.asarray(self.velocity, dtype=np.float64)
        self.goal = np.asarray(self.goal, dtype=np.float64)
        if self.radius <= 0:
            raise ValueError("radius must be > 0")
        if self.preferred_speed <= 0:
            raise ValueError("preferred_speed must be > 0")

    @property
    def max_speed(self) -> float:
        return MAX_SPEED_OF_KIND[self.kind]


@dataclass
class CrowdConfig:
    time_horizon: float = 2.0  # s, against other agents
    obstacle_time_horizon: float = 1.0  # s, against static geometry and the robot
    neighbor_distance: float = 5.0  # m
    max_neighbors: int = 10
    dt: float = 0.05  # s
    # constraints are built against radii inflated by this margin, so the
    # tangent (grazing) solutions ORCA legalizes never dip below physical
    # contact under time discretization
    safety_margin: float = 0.03  # m

    def __post_init__(self):
        for name in ("time_horizon", "obstacle_time_horizon", "neighbor_distance",
                     "max_neighbors", "dt"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.dt > 0.1:
            raise ValueError("dt must be <= 0.1 s")
        if self.safety_margin < 0:
            raise ValueError("safety_margin must be >= 0")


@dataclass
class HalfPlane:
    """Permitted half of velocity space: (v - point) . normal >= 0."""

    point: np.ndarray  # (2,) m/s
    normal: np.ndarray  # (2,) unit outward normal

    def __post_init__(self):
        self.point = np.asarray(self.point, dtype=np.float64)
        self.normal = np.asarray(self.normal, dtype=np.float64)
        n = float(np.hypot(self.normal[0], self.normal[1]))
        if abs(n - 1.0) > 1e-9:
            raise ValueError("normal must be unit length")

    def satisfied(self, v, tol: float = 1e-12) -> bool:
        v = np.asarray(v, dtype=np.float64)
        return float((v - self.point) @ self.normal) >= -tol
