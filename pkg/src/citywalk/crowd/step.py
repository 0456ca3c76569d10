"""Single-environment stepping API and trace export.

step_crowd is the one-env contract; the engine's batched path lives in
CrowdField. Both share the same constraint and LP code.
"""

import json

import numpy as np

from ..rng import make_rng
from .field import CrowdField
from .routes import sample_routes
from .types import AgentKind, CrowdAgent, CrowdConfig, PREF_SPEED_RANGE, RADIUS_OF_KIND


def step_crowd(agents, robot_state, occupancy, config: CrowdConfig,
               seed: int = 0, resample_goals: bool = True) -> list:
    """Advance all agents one tick of config.dt; two-phase, deterministic.

    robot_state: None or (position (2,), velocity (2,), radius).
    """
    if not agents:
        return []
    field = CrowdField([occupancy], config, [seed], resample_goals=resample_goals)
    field.set_agents([agents])
    if robot_state is None:
        field.step()
    else:
        r_pos, r_vel, r_rad = robot_state
        field.step(robot_pos=np.asarray(r_pos, dtype=np.float64).reshape(1, 2),
                   robot_vel=np.asarray(r_vel, dtype=np.float64).reshape(1, 2),
                   robot_radius=r_rad)
    return field.agents_of(0)


def spawn_agents(occupancy, count: int, seed: int, region_mask=None) -> list:
    """Sample routed agents with kind-dependent speeds and radii."""
    if count == 0:
        return []
    rng = make_rng(seed, "crowd-spawn")
    kinds = []
    for _ in range(count):
        roll = rng.random()
        if roll < 0.7:
            kinds.append(AgentKind.PEDESTRIAN)
        elif roll < 0.9:
            kinds.append(AgentKind.CYCLIST)
        else:
            kinds.append(AgentKind.SCOOTER)
    max_radius = max(RADIUS_OF_KIND[k] for k in kinds)
    routes = sample_routes(occupancy, count, int(rng.integers(2 ** 63)),
                           kind=AgentKind.PEDESTRIAN, region_mask=region_mask,
                           max_radius=max_radius)
    agents = []
    for i, (kind, (start, goal)) in enumerate(zip(kinds, routes)):
        lo, hi = PREF_SPEED_RANGE[kind]
        agents.append(CrowdAgent(
            id=i, position=start, velocity=np.zeros(2),
            radius=RADIUS_OF_KIND[kind], preferred_speed=float(rng.uniform(lo, hi)),
            goal=goal, kind=kind,
        ))
    return agents


def write_trace(records, fh):
    """Newline-delimited JSON {tick, env, id, x, y, vx, vy} records."""
    for rec in records:
        fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")))
        fh.write("\n")
