"""Episode logs and navigation metric aggregation."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import EmptyInput


class Outcome(str, Enum):
    SUCCESS = "Success"
    OUT_OF_BOUNDS = "OutOfBounds"
    TRUNCATED = "Truncated"


@dataclass
class EpisodeLog:
    """Per-step trace of one navigation episode.

    steps: records with distance_to_goal, on_walkable, collision, and the
    position after the step. l_route is the assigned route length;
    l_best_start the grid geodesic start-to-goal at episode start;
    geodesic_end the remaining grid geodesic at episode end.
    """

    start_position: tuple
    l_route: float
    l_best_start: float
    outcome: Outcome
    geodesic_end: float
    steps: list = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.outcome == Outcome.SUCCESS

    def moving_length(self) -> float:
        prev = np.asarray(self.start_position, dtype=np.float64)
        total = 0.0
        for rec in self.steps:
            p = np.asarray(rec["position"], dtype=np.float64)
            total += float(np.hypot(*(p - prev)))
            prev = p
        return total


def nav_metric_values(ep: EpisodeLog, spl_variant: str = "standard") -> dict:
    """Per-episode metric contributions."""
    s = 1.0 if ep.success else 0.0
    l_moving = ep.moving_length()
    l_best = max(ep.l_best_start, 1e-9)
    route = max(ep.l_route, 1e-9)
    progress = ep.l_best_start - ep.geodesic_end
    rc = float(np.clip(progress / route, 0.0, 1.0))
    if spl_variant == "paper-literal":
        spl = s * l_moving / l_best
    else:
        spl = s * l_best / max(l_moving, l_best)
    n = max(len(ep.steps), 1)
    on_walk = sum(1 for r in ep.steps if r["on_walkable"]) / n
    coll = sum(1 for r in ep.steps if r["collision"]) / n
    return {"SR": s, "RC": rc, "SPL": spl, "OnWalkable": on_walk, "Collision": coll}


def aggregate_nav_metrics(episodes, spl_variant: str = "standard") -> dict:
    """Mean and standard error of each metric over episodes."""
    if not episodes:
        raise EmptyInput("no episodes to aggregate")
    if spl_variant not in ("standard", "paper-literal"):
        raise ValueError(f"unknown SPL variant {spl_variant!r}")
    names = ["SR", "RC", "SPL", "OnWalkable", "Collision"]
    cols = {n: [] for n in names}
    for ep in episodes:
        vals = nav_metric_values(ep, spl_variant)
        for n in names:
            cols[n].append(vals[n])
    metrics = {}
    for n in names:
        arr = np.asarray(cols[n], dtype=np.float64)
        stderr = float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else 0.0
        metrics[n] = {"mean": float(arr.mean()), "stderr": stderr}
    return metrics


def collision_breakdown(episodes) -> dict:
    """Per-kind collision time fractions (static obstacles vs crowd)."""
    stat, dyn = [], []
    for ep in episodes:
        n = max(len(ep.steps), 1)
        stat.append(sum(1 for r in ep.steps if r.get("collision_static")) / n)
        dyn.append(sum(1 for r in ep.steps if r.get("collision_dynamic")) / n)
    return {"static": float(np.mean(stat)) if stat else 0.0,
            "dynamic": float(np.mean(dyn)) if dyn else 0.0}


def nav_report(episodes, task: str, robot: str, spl_variant: str = "standard") -> dict:
    return {
        "task": task,
        "robot": robot,
        "N": len(episodes),
        "metrics": aggregate_nav_metrics(episodes, spl_variant),
        "collision_breakdown": collision_breakdown(episodes),
        "flags": {"spl_variant": spl_variant},
    }
