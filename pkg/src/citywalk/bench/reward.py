"""Navigation reward.

R = R_term + c1 * R_track + c2 * R_walkable + c3 * R_collision, with the
tracking term a two-scale tanh shaping of the distance to goal. Terminal
rewards fire exclusively on the reach / out-of-bounds step, which also
ends the episode.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class RewardConfig:
    terminal_reach: float = 50.0
    terminal_oob: float = -100.0
    c1: float = 2.0
    c2: float = 0.5
    c3: float = 1.0
    track_scale_far: float = 1.0  # m
    track_scale_near: float = 0.2  # m
    track_near_weight: float = 0.2


def track_term(distance_m, config: RewardConfig = RewardConfig()):
    """[1 - tanh(d/1.0)] + 0.2 * [1 - tanh(d/0.2)] (vectorized)."""
    d = np.asarray(distance_m, dtype=np.float64)
    return (1.0 - np.tanh(d / config.track_scale_far)) + \
        config.track_near_weight * (1.0 - np.tanh(d / config.track_scale_near))


def reward_terms(distance_m, off_walkable, colliding, reached, out_of_bounds,
                 config: RewardConfig = RewardConfig()):
    """All four components, vectorized; returns (r_term, r_track, r_walk, r_coll)."""
    d = np.asarray(distance_m, dtype=np.float64)
    reached = np.asarray(reached, dtype=bool)
    oob = np.asarray(out_of_bounds, dtype=bool)
    r_term = np.where(reached, config.terminal_reach, 0.0) + \
        np.where(oob, config.terminal_oob, 0.0)
    r_track = track_term(d, config)
    r_walk = np.where(np.asarray(off_walkable, dtype=bool), -1.0, 0.0)
    r_coll = np.where(np.asarray(colliding, dtype=bool), -1.0, 0.0)
    return r_term, r_track, r_walk, r_coll


def reward_batch(distance_m, off_walkable, colliding, reached, out_of_bounds,
                 config: RewardConfig = RewardConfig()):
    r_term, r_track, r_walk, r_coll = reward_terms(
        distance_m, off_walkable, colliding, reached, out_of_bounds, config)
    total = r_term + config.c1 * r_track + config.c2 * r_walk + config.c3 * r_coll
    terminal = np.asarray(reached, dtype=bool) | np.asarray(out_of_bounds, dtype=bool)
    return total, terminal


def compute_reward(prev_state, next_state, events, config: RewardConfig = RewardConfig()):
    """One transition's reward and terminal flag.

    States carry distance_to_goal (m); events carry on_walkable,
    collision, reached, out_of_bounds booleans. The tracking term uses the
    next state's distance.
    """
    d = float(next_state["distance_to_goal"] if isinstance(next_state, dict)
              else next_state.distance_to_goal)
    off_walkable = not events.get("on_walkable", True)
    total, terminal = reward_batch(
        d, off_walkable, events.get("collision", False),
        events.get("reached", False), events.get("out_of_bounds", False), config)
    return float(total), bool(terminal)
