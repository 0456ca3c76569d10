"""Scripted baseline navigation policy: shortest grid path plus pure pursuit.

The planning grid is walkable cells the robot can traverse, shrunk by the
body radius. A goal-anchored geodesic field (exact 8-connected shortest
path metric) is computed once; the followed path is the deterministic
greedy descent of that field, refreshed every 10 ticks or when the robot
strays. The follow point sits 1 m ahead along the path; the emitted
action is the ego-frame velocity command clamped to the unit box.
"""

import numpy as np

from ..gridmath import chamfer_distance
from ..paths import descend_field, geodesic_field_sweep
from ..urbangen.types import CellLabel
from ..envcore.robot import KinematicsKind, RobotModel, traversability_maps

REPLAN_TICKS = 10
LOOKAHEAD_M = 1.0
STRAY_LIMIT_M = 0.8
_DESCENT_CELLS = 48


class BaselinePolicy:
    def __init__(self, occupancy, model: RobotModel, goal):
        self.occ = occupancy
        self.model = model
        self.goal = np.asarray(goal, dtype=np.float64)
        res = occupancy.resolution
        maps = traversability_maps(occupancy, model)
        walk = occupancy.labels == int(CellLabel.WALKABLE)
        navigable = walk & maps["passable"]
        clearance = chamfer_distance(~navigable, res)
        self.navigable = navigable
        self.plan_mask = navigable & (clearance >= model.body_radius)
        if not self.plan_mask.any():
            self.plan_mask = navigable
        self.res = res
        goal_cell = self._snap(self.goal)
        self.field = geodesic_field_sweep(self.plan_mask, [goal_cell], res)
        self.path_xy = None
        self.ticks_since_plan = 0
        self.no_path = False

    def _snap(self, p):
        ny, nx = self.plan_mask.shape
        r = int(np.clip(p[1] / self.res, 0, ny - 1))
        c = int(np.clip(p[0] / self.res, 0, nx - 1))
        if self.plan_mask[r, c]:
            return (r, c)
        rows, cols = np.nonzero(self.plan_mask)
        d2 = (rows - r) ** 2 + (cols - c) ** 2
        i = int(np.argmin(d2))
        return (int(rows[i]), int(cols[i]))

    def plan_cells(self, pos):
        """The planned shortest-path cell sequence from pos (full descent)."""
        start = self._snap(np.asarray(pos, dtype=np.float64))
        if not np.isfinite(self.field[start]):
            return None
        return descend_field(self.field, self.plan_mask, start, self.res,
                             max_steps=self.field.size)

    def _replan(self, pos):
        self.ticks_since_plan = 0
        start = self._snap(pos)
        if not np.isfinite(self.field[start]):
            self.path_xy = None
            self.no_path = True
            return
        cells = descend_field(self.field, self.plan_mask, start, self.res,
                              max_steps=_DESCENT_CELLS)
        self.no_path = False
        pts = [((c + 0.5) * self.res, (r + 0.5) * self.res) for r, c in cells]
        if self.field[cells[-1]] <= 0.0:
            pts.append((float(self.goal[0]), float(self.goal[1])))
        self.path_xy = np.asarray(pts, dtype=np.float64)

    def _line_of_sight(self, a, b, mask) -> bool:
        d = float(np.hypot(b[0] - a[0], b[1] - a[1]))
        n = max(2, int(2.0 * d / self.res) + 2)  # half-cell sampling
        ts = np.linspace(0.0, 1.0, n)
        xs = a[0] + (b[0] - a[0]) * ts
        ys = a[1] + (b[1] - a[1]) * ts
        ny, nx = mask.shape
        rr = np.clip((ys / self.res).astype(np.int64), 0, ny - 1)
        cc = np.clip((xs / self.res).astype(np.int64), 0, nx - 1)
        return bool(mask[rr, cc].all())

    def _follow_point(self, pos):
        # straight shot once the goal is in line of sight on the plan grid
        if self._line_of_sight(pos, self.goal, self.plan_mask):
            return self.goal.copy()
        path = self.path_xy
        d = np.sqrt(((path - pos) ** 2).sum(axis=1))
        near = int(np.argmin(d))
        if d[near] > STRAY_LIMIT_M:
            return None  # strayed; replan
        # furthest point within the lookahead whose straight segment is
        # traversable; corner cutting onto blocked cells pulls back
        candidates = [near]
        acc = 0.0
        prev = path[near]
        for k in range(near + 1, len(path)):
            acc += float(np.hypot(*(path[k] - prev)))
            prev = path[k]
            candidates.append(k)
            if acc >= LOOKAHEAD_M:
                break
        for k in reversed(candidates):
            if self._line_of_sight(pos, path[k], self.navigable):
                return path[k]
        return path[near]

    def act(self, robot_state) -> tuple:
        """(action, info) for the current state."""
        pos = np.asarray([robot_state["x"], robot_state["y"]], dtype=np.float64)
        yaw = float(robot_state["yaw"])
        if self.path_xy is None or self.ticks_since_plan >= REPLAN_TICKS:
            self._replan(pos)
        self.ticks_since_plan += 1
        if self.no_path or self.path_xy is None or len(self.path_xy) == 0:
            return np.zeros(2), {"no_path": True}
        target = self._follow_point(pos)
        if target is None:
            self._replan(pos)
            if self.no_path or self.path_xy is None:
                return np.zeros(2), {"no_path": True}
            target = self._follow_point(pos)
            if target is None:
                target = self.path_xy[-1]

        to_t = target - pos
        dist_goal = float(np.hypot(*(self.goal - pos)))
        norm = float(np.hypot(*to_t))
        if norm < 1e-9:
            return np.zeros(2), {"no_path": False}
        direction = to_t / norm
        speed_frac = float(np.clip(dist_goal / LOOKAHEAD_M, 0.25, 1.0))

        if self.model.kinematics == KinematicsKind.HOLONOMIC:
            c, s = np.cos(yaw), np.sin(yaw)
            ego = np.array([c * direction[0] + s * direction[1],
                            -s * direction[0] + c * direction[1]])
            action = np.clip(ego * speed_frac, -1.0, 1.0)
        else:
            bearing = float(np.arctan2(direction[1], direction[0]))
            err = float(np.arctan2(np.sin(bearing - yaw), np.cos(bearing - yaw)))
            steer = float(np.clip(2.0 * err / self.model.max_steer, -1.0, 1.0))
            throttle = float(np.clip(np.cos(err), 0.15, 1.0)) * speed_frac
            action = np.array([throttle, steer])
        return action, {"no_path": False}


def baseline_policy_act(occupancy, robot_state, goal, model: RobotModel):
    """One-shot convenience wrapper around BaselinePolicy."""
    policy = BaselinePolicy(occupancy, model, goal)
    action, info = policy.act(robot_state)
    return np.clip(action, -1.0, 1.0), info
