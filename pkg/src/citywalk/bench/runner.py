"""Headless benchmark runners: navigation episodes and the AI-mode traverse."""

import numpy as np

from ..envcore.batch import BatchedEnv, EnvConfig, Scheme
from ..envcore.robot import ROBOT_MODELS
from ..paths import dijkstra_field
from ..rng import child_seed
from ..urbangen.types import CellLabel, Split
from .baseline import BaselinePolicy
from .episodes import EpisodeLog, nav_report, Outcome
from .presets import nav_spec, traverse_standard_spec
from .traverse import (
    ControlMode,
    PolicyBinding,
    TraverseSession,
    aggregate_traverse_metrics,
    classify_interval,
    dispatch_control,
)


def _goal_field(occupancy, goal):
    walk = occupancy.labels == int(CellLabel.WALKABLE)
    r, c = occupancy.cell_of(goal[0], goal[1])
    return dijkstra_field(walk, [(r, c)], occupancy.resolution)


def run_nav_episode(env: BatchedEnv, policy=None) -> EpisodeLog:
    """Run slot 0 of a freshly built/reset env to termination."""
    occ = env.occs[0]
    goal = env.goal[0]
    field = _goal_field(occ, goal)
    start = (float(env.x[0]), float(env.y[0]))
    r, c = occ.cell_of(*start)
    l_best = float(field[r, c])
    if not np.isfinite(l_best):
        l_best = float(np.hypot(goal[0] - start[0], goal[1] - start[1]))
    if policy is None:
        policy = BaselinePolicy(occ, env.model, goal)

    log = EpisodeLog(start_position=start, l_route=l_best, l_best_start=l_best,
                     outcome=Outcome.TRUNCATED, geodesic_end=l_best)
    for _ in range(env.config.horizon):
        action, info = policy.act(env.robot_state(0))
        res = env.step_batch(np.asarray(action)[None])[0]
        log.steps.append({
            "distance_to_goal": res.events["distance_to_goal"],
            "on_walkable": res.events["on_walkable"],
            "collision": res.events["collision"],
            "collision_static": res.events.get("collision_static", False),
            "collision_dynamic": res.events.get("collision_dynamic", False),
            "position": (float(env.x[0]), float(env.y[0])),
        })
        if res.terminated:
            log.outcome = Outcome.SUCCESS if res.events["reached"] else Outcome.OUT_OF_BOUNDS
            break
        if res.truncated:
            log.outcome = Outcome.TRUNCATED
            break
    rr, cc = occ.cell_of(float(env.x[0]), float(env.y[0]))
    if occ.in_bounds_cell(rr, cc) and np.isfinite(field[rr, cc]):
        log.geodesic_end = float(field[rr, cc])
    elif log.outcome == Outcome.SUCCESS:
        log.geodesic_end = 0.0
    return log


def run_nav_benchmark(preset: str, split: Split, episodes: int, seed: int = 0,
                      robot: str = "quadruped", spl_variant: str = "standard",
                      cache=None, progress=None):
    """Build one scene per episode and run the baseline policy on it."""
    logs = []
    cfg = EnvConfig(robot=robot)
    for i in range(episodes):
        spec = nav_spec(preset, split, child_seed(seed, "nav-bench", preset, i))
        env = BatchedEnv(spec, Scheme.ASYNC, master_seed=child_seed(seed, "env", i),
                         k=1, cache=cache, config=cfg)
        logs.append(run_nav_episode(env))
        if progress is not None:
            progress(i + 1, episodes)
    return nav_report(logs, task=preset, robot=robot, spl_variant=spl_variant), logs


DECISION_INTERVAL_M = 10.0
STUCK_WINDOW_TICKS = 400
STUCK_MIN_PROGRESS_M = 0.5
TRAVERSE_MAX_TICKS = 40000


class TraverseRunner:
    """AI-mode (and scripted shared-mode) traverse over the standard strip."""

    def __init__(self, scene_spec=None, seed: int = 0, robot: str = "quadruped",
                 mode: ControlMode = ControlMode.AI,
                 decision_interval_m: float = DECISION_INTERVAL_M,
                 cache=None, max_ticks: int = TRAVERSE_MAX_TICKS):
        if scene_spec is None:
            scene_spec = traverse_standard_spec(child_seed(seed, "traverse-scene"))
        self.mode = ControlMode(mode)
        cfg = EnvConfig(robot=robot, horizon=10 ** 9)  # traverse has no nav horizon
        self.env = BatchedEnv(scene_spec, Scheme.ASYNC, master_seed=seed, k=1,
                              cache=cache, config=cfg)
        self.occ = self.env.occs[0]
        self.model = ROBOT_MODELS[robot]
        self.goal = self.env.goal[0].copy()
        self.field = _goal_field(self.occ, self.goal)
        self.decision_interval_m = decision_interval_m
        self.session = TraverseSession(mode=self.mode, dt_interval=self.env.config.dt,
                                       decision_interval_m=decision_interval_m)
        base = BaselinePolicy(self.occ, self.model, self.goal)
        self.binding = PolicyBinding(
            nav={k: base for k in ("Clear", "Static", "Dynamic")},
            loc={k: base for k in ("Flat", "Slope", "Stair", "Rough")},
        )
        self.max_ticks = max_ticks
        self._policy = base
        self._last_decision_geo = None
        self._progress_anchor = (0, self._geodesic())

    def _geodesic(self) -> float:
        r, c = self.occ.cell_of(float(self.env.x[0]), float(self.env.y[0]))
        if self.occ.in_bounds_cell(r, c) and np.isfinite(self.field[r, c]):
            return float(self.field[r, c])
        return float(np.hypot(*(self.goal - np.array([self.env.x[0], self.env.y[0]]))))

    def window_summary(self) -> dict:
        """Occupancy census of the upcoming interval along the route."""
        x = float(self.env.x[0])
        res = self.occ.resolution
        ny, nx = self.occ.labels.shape
        c0 = int(np.clip(x / res, 0, nx - 1))
        c1 = int(np.clip((x + self.decision_interval_m) / res, 0, nx))
        if c1 <= c0:
            c1 = min(nx, c0 + 1)
        window = self.occ.labels[:, c0:c1]
        obstacle_density = float((window == int(CellLabel.OBSTACLE)).mean())
        crowd_present = False
        if self.env.crowd.A > 0:
            cx = self.env.crowd.pos[0, :, 0]
            crowd_present = bool(
                (self.env.crowd.active[0] & (cx >= c0 * res) & (cx < c1 * res)).any())
        terrain = self.env.scenes[0].terrain
        t0 = int(np.clip(x / terrain.tile_size, 0, terrain.cols - 1))
        t1 = int(np.clip((x + self.decision_interval_m) / terrain.tile_size + 1,
                         t0 + 1, terrain.cols))
        census = {"Flat": 0, "Slope": 0, "Stair": 0, "Rough": 0}
        total = 0
        from ..urbangen.types import FAMILY_OF_KIND
        for tr in range(terrain.rows):
            for tc in range(t0, t1):
                fam = FAMILY_OF_KIND[terrain.kind_at(tr, tc)]
                census[fam] += 1
                total += 1
        for k in census:
            census[k] /= max(total, 1)
        return {"obstacle_density": obstacle_density, "crowd_present": crowd_present,
                "terrain_census": census}

    def needs_decision(self) -> bool:
        geo = self._geodesic()
        return self._last_decision_geo is None or \
            self._last_decision_geo - geo >= self.decision_interval_m

    def apply_decision(self, tick: int, human_input=None):
        """Dispatch at the current decision point and bind the outcome."""
        self._last_decision_geo = self._geodesic()
        decision = dispatch_control(self.window_summary(), self.mode, human_input)
        if decision.controller == "Human":
            self.session.open_intervention(tick)
        else:
            self.session.close_intervention(tick)
            self._policy = self.binding.nav[decision.nav_key or "Clear"]
        self.session.events.append({"tick": tick, "type": "decision",
                                    "controller": decision.controller,
                                    "nav": decision.nav_key, "loc": decision.loc_key})
        return decision

    def release_intervention(self, tick: int):
        self.session.close_intervention(tick)

    def step_once(self, tick: int, action) -> dict:
        """Advance one tick with the given action; records the session tick."""
        env = self.env
        res = env.step_batch(np.asarray(action, dtype=np.float64).reshape(1, 2))[0]
        reset_now = False
        if res.events["out_of_bounds"]:
            reset_now = True
        geo = self._geodesic()
        anchor_tick, anchor_geo = self._progress_anchor
        if tick + 1 - anchor_tick >= STUCK_WINDOW_TICKS:
            if anchor_geo - geo < STUCK_MIN_PROGRESS_M:
                reset_now = True
            self._progress_anchor = (tick + 1, geo)
        self.session.record_tick(
            (env.x[0], env.y[0]), collision=res.events["collision"], reset=reset_now)
        if reset_now and not res.events["reached"]:
            self._do_reset(tick + 1)
        return res.events

    def ai_tick(self, tick: int) -> dict:
        action, _ = self._policy.act(self.env.robot_state(0))
        return self.step_once(tick, action)

    def human_tick(self, tick: int, vx: float, vy: float) -> dict:
        return self.step_once(tick, np.clip([vx, vy], -1.0, 1.0))

    def _do_reset(self, tick: int):
        env = self.env
        env.reset(0)
        env.goal[0] = self.goal
        self._policy = BaselinePolicy(self.occ, self.model, self.goal)
        self.binding = PolicyBinding(
            nav={k: self._policy for k in ("Clear", "Static", "Dynamic")},
            loc={k: self._policy for k in ("Flat", "Slope", "Stair", "Rough")},
        )
        self._last_decision_geo = None
        self._progress_anchor = (tick, self._geodesic())

    def report(self, reached: bool) -> dict:
        rep = aggregate_traverse_metrics(self.session)
        rep["reached_goal"] = bool(reached)
        rep["route_length_m"] = float(self.field[
            self.occ.cell_of(*self.session.positions[0])] if self.session.positions else 0.0)
        return rep

    def run(self) -> dict:
        tick = 0
        reached = False
        while tick < self.max_ticks:
            if self.needs_decision():
                self.apply_decision(tick)
            events = self.ai_tick(tick)
            tick += 1
            if events["reached"]:
                reached = True
                break
        return self.report(reached)


def run_traverse(mode: str = "ai", seed: int = 0, robot: str = "quadruped",
                 decision_interval_m: float = DECISION_INTERVAL_M, scene_spec=None,
                 cache=None) -> dict:
    mode = ControlMode(mode)
    if mode != ControlMode.AI:
        raise ValueError("headless traverse supports AI mode; use the server for "
                         "human-in-the-loop modes")
    runner = TraverseRunner(scene_spec=scene_spec, seed=seed, robot=robot, mode=mode,
                            decision_interval_m=decision_interval_m, cache=cache)
    return runner.run()
