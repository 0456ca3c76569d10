"""The batched environment engine.

A batch holds K environment slots. Under the asynchronous scheme each
slot carries its own procedurally sampled scene; under the synchronous
baseline all slots share one scene. Stepping is vectorized across slots
and bit-reproducible: per-slot streams derive from the slot seed, all
array work is row-independent, and the worker split never changes
results.
"""

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from ..crowd.field import CrowdField
from ..crowd.step import spawn_agents
from ..crowd.types import CrowdConfig
from ..errors import BatchShapeMismatch, SlotOutOfRange
from ..rng import child_seed, make_rng
from ..urbangen.occupancy import rasterize_occupancy
from ..urbangen.scene import scene_hash, traverse_segment_mask
from ..urbangen.types import CellLabel, SceneSpec, TaskKind
from .cache import AssetCache, default_cache
from .observe import make_observation, observe_batch
from .robot import ROBOT_MODELS, RobotModel, clamp_action, integrate_motion, traversability_maps


class Scheme(str, Enum):
    ASYNC = "Async"
    SYNC = "Sync"


def _default_reward_config():
    from ..bench.reward import RewardConfig

    return RewardConfig()


@dataclass
class EnvConfig:
    robot: str = "quadruped"
    horizon: int = 200
    dt: float = 0.05
    auto_reset: bool = False
    resample_on_reset: bool = False
    reach_threshold_m: float = 0.5
    include_semantics: bool = False
    reward: object = field(default_factory=_default_reward_config)
    crowd: CrowdConfig = field(default_factory=CrowdConfig)


@dataclass
class StepResult:
    observation: object
    reward: float
    terminated: bool
    truncated: bool
    events: dict


class BatchedEnv:
    """K environment slots stepping in lockstep."""

    def __init__(self, specs, scheme: Scheme, master_seed: int, k: int | None = None,
                 cache: AssetCache | None = None, config: EnvConfig | None = None,
                 env_seeds=None):
        self.config = config or EnvConfig()
        self.scheme = Scheme(scheme)
        self.cache = cache if cache is not None else default_cache()
        self.model: RobotModel = ROBOT_MODELS[self.config.robot]

        if isinstance(specs, SceneSpec):
            if k is None:
                k = 1
            base = [specs] * k
        else:
            base = list(specs)
            k = len(base)
        if k < 1:
            raise ValueError("K must be >= 1")
        self.K = k
        self.master_seed = int(master_seed)
        if env_seeds is None:
            env_seeds = [child_seed(master_seed, "env", i) for i in range(k)]
        if len(env_seeds) != k:
            raise ValueError("env_seeds must have length K")
        self.env_seeds = [int(s) for s in env_seeds]

        if self.scheme == Scheme.SYNC:
            if self.config.resample_on_reset:
                raise ValueError("resample_on_reset requires the Async scheme")
            shared = replace(base[0], seed=self.env_seeds[0])
            self.specs = [shared] * k
        else:
            self.specs = [replace(base[i], seed=self.env_seeds[i]) for i in range(k)]

        self.scenes = [None] * k
        self.occs = [None] * k
        self.scene_hashes = [""] * k
        self.reset_counts = np.zeros(k, dtype=np.int64)

        # robot state arrays
        self.x = np.zeros(k)
        self.y = np.zeros(k)
        self.yaw = np.zeros(k)
        self.vx = np.zeros(k)
        self.vy = np.zeros(k)
        self.elev = np.zeros(k)
        self.goal = np.zeros((k, 2))
        self.tick = np.zeros(k, dtype=np.int64)
        self.terminated = np.zeros(k, dtype=bool)
        self.truncated = np.zeros(k, dtype=bool)
        self.prev_dist = np.zeros(k)

        self._stack_ready = False
        for i in range(k):
            self._load_scene(i)
        self._build_stacks()
        self._build_crowd()
        for i in range(k):
            self._spawn(i)

    # -- construction -----------------------------------------------------

    def _load_scene(self, i):
        scene = self.cache.scene(self.specs[i])
        self.scenes[i] = scene
        self.occs[i] = rasterize_occupancy(scene)
        self.scene_hashes[i] = scene_hash(scene)

    def _build_stacks(self):
        shapes = {occ.labels.shape for occ in self.occs}
        if len(shapes) != 1:
            raise ValueError("all scenes in a batch must share the grid shape")
        if self.scheme == Scheme.SYNC:
            slots = [0]
            self.env_index = np.zeros(self.K, dtype=np.int64)
        else:
            slots = list(range(self.K))
            self.env_index = np.arange(self.K, dtype=np.int64)
        self.labels_stack = np.stack([self.occs[s].labels for s in slots])
        self.elev_stack = np.stack([self.occs[s].elevation for s in slots])
        maps = [traversability_maps(self.occs[s], self.model) for s in slots]
        self.passable_stack = np.stack([m["passable"] for m in maps])
        self.obstacle_stack = np.stack([m["obstacle"] for m in maps])
        self.resolution = self.occs[0].resolution
        self.extent = (self.occs[0].labels.shape[1] * self.resolution,
                       self.occs[0].labels.shape[0] * self.resolution)
        self._stack_ready = True

    def _refresh_stack_row(self, i):
        # async slot replaced its scene (resample-on-reset)
        slot = int(self.env_index[i])
        occ = self.occs[i]
        self.labels_stack[slot] = occ.labels
        self.elev_stack[slot] = occ.elevation
        maps = traversability_maps(occ, self.model)
        self.passable_stack[slot] = maps["passable"]
        self.obstacle_stack[slot] = maps["obstacle"]

    def _build_crowd(self):
        self.crowd = CrowdField(
            self.occs, self.config.crowd,
            env_seeds=[child_seed(s, "crowd-run") for s in self.env_seeds],
        )
        lists = [self._crowd_agents(i) for i in range(self.K)]
        self.crowd.set_agents(lists)

    def _crowd_agents(self, i):
        spec = self.specs[i]
        if spec.pedestrian_count <= 0:
            return []
        mask = None
        if spec.task_kind == TaskKind.TRAVERSE:
            mask = traverse_segment_mask(self.occs[i].labels.shape, (2, 5))
        return spawn_agents(
            self.occs[i], spec.pedestrian_count,
            child_seed(self.env_seeds[i], "crowd", int(self.reset_counts[i])),
            region_mask=mask,
        )

    def _spawn(self, i):
        scene = self.scenes[i]
        rng = make_rng(self.env_seeds[i], "spawn", int(self.reset_counts[i]))
        routes = scene.routes
        pick = int(rng.integers(len(routes)))
        (sx, sy), (gx, gy) = routes[pick]
        self.x[i], self.y[i] = float(sx), float(sy)
        self.goal[i] = (float(gx), float(gy))
        self.yaw[i] = float(np.arctan2(gy - sy, gx - sx))
        self.vx[i] = self.vy[i] = 0.0
        r, c = self.occs[i].cell_of(self.x[i], self.y[i])
        self.elev[i] = float(self.occs[i].elevation[r, c])
        self.tick[i] = 0
        self.terminated[i] = False
        self.truncated[i] = False
        self.prev_dist[i] = float(np.hypot(gx - sx, gy - sy))

    # -- stepping -----------------------------------------------------------

    def step_batch(self, actions, workers: int = 1):
        """Advance every live slot one control step of config.dt."""
        acts = np.asarray(actions, dtype=np.float64)
        if acts.shape != (self.K, 2):
            raise BatchShapeMismatch(f"expected ({self.K}, 2) actions, got {acts.shape}")
        acts = np.clip(acts, -1.0, 1.0)
        cfg = self.config

        if cfg.auto_reset:
            for i in np.flatnonzero(self.terminated | self.truncated):
                self._reset_state(int(i))

        live = ~(self.terminated | self.truncated)

        robot_pos = np.stack([self.x, self.y], axis=-1)
        robot_vel = np.stack([self.vx, self.vy], axis=-1)
        if self.crowd.A > 0:
            self.crowd.step(robot_pos=robot_pos, robot_vel=robot_vel,
                            robot_radius=self.model.body_radius,
                            env_mask=live, workers=workers)

        nx, ny, nyaw, nvx, nvy = integrate_motion(
            self.x, self.y, self.yaw, acts[:, 0], acts[:, 1], self.model, cfg.dt)

        res = self.resolution
        w_m, l_m = self.extent
        inside = (nx >= 0) & (nx < w_m) & (ny >= 0) & (ny < l_m)
        rr = np.clip((ny / res).astype(np.int64), 0, self.labels_stack.shape[1] - 1)
        cc = np.clip((nx / res).astype(np.int64), 0, self.labels_stack.shape[2] - 1)
        passable = self.passable_stack[self.env_index, rr, cc]
        obstacle = self.obstacle_stack[self.env_index, rr, cc]
        blocked = inside & ~passable

        collision_static = blocked & obstacle
        hit_agent = np.zeros(self.K, dtype=bool)
        # crowd contact: cancel motion that would overlap an agent
        if self.crowd.A > 0:
            cand = np.stack([nx, ny], axis=-1)
            d2 = ((self.crowd.pos - cand[:, None, :]) ** 2).sum(-1)
            rr_sum = self.crowd.radius + self.model.body_radius
            contact = (d2 < rr_sum ** 2) & self.crowd.active
            hit_agent = contact.any(axis=1)
            blocked = blocked | hit_agent
        collision = collision_static | hit_agent

        move = live & inside & ~blocked
        frozen = live & blocked
        self.x = np.where(move | (live & ~inside), nx, self.x)
        self.y = np.where(move | (live & ~inside), ny, self.y)
        self.yaw = np.where(live, nyaw, self.yaw)
        self.vx = np.where(move, nvx, np.where(frozen, 0.0, self.vx))
        self.vy = np.where(move, nvy, np.where(frozen, 0.0, self.vy))
        self.vx = np.where(live, self.vx, 0.0)
        self.vy = np.where(live, self.vy, 0.0)

        rr2 = np.clip((self.y / res).astype(np.int64), 0, self.labels_stack.shape[1] - 1)
        cc2 = np.clip((self.x / res).astype(np.int64), 0, self.labels_stack.shape[2] - 1)
        in_now = (self.x >= 0) & (self.x < w_m) & (self.y >= 0) & (self.y < l_m)
        self.elev = np.where(in_now, self.elev_stack[self.env_index, rr2, cc2], self.elev)
        labels_now = self.labels_stack[self.env_index, rr2, cc2]
        on_walkable = in_now & (labels_now == int(CellLabel.WALKABLE))

        dist = np.hypot(self.goal[:, 0] - self.x, self.goal[:, 1] - self.y)
        path_inc = np.where(live, np.hypot(self.vx * cfg.dt, self.vy * cfg.dt), 0.0)
        reached = live & (dist <= cfg.reach_threshold_m)
        oob = live & ~in_now

        from ..bench.reward import reward_batch

        reward, terminal = reward_batch(
            dist, live & ~on_walkable, live & collision, reached, oob, cfg.reward)
        reward = np.where(live, reward, 0.0)

        self.tick = np.where(live, self.tick + 1, self.tick)
        self.terminated = self.terminated | reached | oob
        # horizon truncation; set alongside termination only for a reach
        # exactly at the horizon step
        self.truncated = self.truncated | (live & (self.tick >= cfg.horizon) & ~oob)
        self.prev_dist = dist

        obs = self._observe_all()
        results = []
        for i in range(self.K):
            events = {
                "collision": bool(live[i] and collision[i]),
                "collision_static": bool(live[i] and collision_static[i]),
                "collision_dynamic": bool(live[i] and hit_agent[i]),
                "on_walkable": bool(on_walkable[i]),
                "reached": bool(reached[i]),
                "out_of_bounds": bool(oob[i]),
                "distance_to_goal": float(dist[i]),
                "path_increment": float(path_inc[i]),
            }
            results.append(StepResult(
                observation=make_observation(obs, i),
                reward=float(reward[i]),
                terminated=bool(self.terminated[i]),
                truncated=bool(self.truncated[i]),
                events=events,
            ))
        return results

    def _observe_all(self):
        return observe_batch(
            self.x, self.y, self.yaw, self.goal,
            np.stack([self.vx, self.vy], axis=-1), self.elev,
            self.labels_stack, self.elev_stack, self.resolution,
            self.model.max_step_rise, include_semantics=self.config.include_semantics,
            env_index=self.env_index,
        )

    def observe(self, i: int = 0):
        if not (0 <= i < self.K):
            raise SlotOutOfRange(f"slot {i} of {self.K}")
        sl = slice(i, i + 1)
        obs = observe_batch(
            self.x[sl], self.y[sl], self.yaw[sl], self.goal[sl],
            np.stack([self.vx[sl], self.vy[sl]], axis=-1), self.elev[sl],
            self.labels_stack, self.elev_stack, self.resolution,
            self.model.max_step_rise, include_semantics=self.config.include_semantics,
            env_index=self.env_index[sl],
        )
        return make_observation(obs, 0)

    def _reset_state(self, slot: int, resample: bool | None = None):
        self.reset_counts[slot] += 1
        do_resample = self.config.resample_on_reset if resample is None else resample
        if do_resample:
            if self.scheme == Scheme.SYNC:
                raise ValueError("resample_on_reset requires the Async scheme")
            new_seed = child_seed(self.env_seeds[slot], "resample",
                                  int(self.reset_counts[slot]))
            self.specs[slot] = replace(self.specs[slot], seed=new_seed)
            self._load_scene(slot)
            self._refresh_stack_row(slot)
            self.crowd.replace_env(slot, self.occs[slot])
        self.crowd.set_env_agents(slot, self._crowd_agents(slot))
        self._spawn(slot)

    def reset(self, slot: int, resample: bool | None = None):
        """Respawn one slot; other slots are untouched."""
        if not (0 <= slot < self.K):
            raise SlotOutOfRange(f"slot {slot} of {self.K}")
        self._reset_state(slot, resample)
        return self.observe(slot)

    def robot_state(self, i: int = 0) -> dict:
        return {
            "x": float(self.x[i]), "y": float(self.y[i]), "yaw": float(self.yaw[i]),
            "vx": float(self.vx[i]), "vy": float(self.vy[i]),
            "elevation": float(self.elev[i]),
            "goal": [float(self.goal[i, 0]), float(self.goal[i, 1])],
            "tick": int(self.tick[i]),
        }


def build_batch(specs, scheme, master_seed, k=None, cache=None, config=None,
                env_seeds=None) -> BatchedEnv:
    return BatchedEnv(specs, scheme, master_seed, k=k, cache=cache, config=config,
                      env_seeds=env_seeds)
