"""Robot embodiments, kinematics, and traversability gating.

Joint-level locomotion is out of scope; a per-embodiment traversability
predicate (max step rise, max grade, max roughness) gates motion instead.
Wheeled robots integrate an Ackermann bicycle model; all other
embodiments are holonomic velocity-command platforms.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

TWO_PI = 2.0 * np.pi
YAW_RATE_LIMIT = TWO_PI  # rad/s; holonomic yaw chases the velocity direction


class Embodiment(str, Enum):
    WHEELED = "Wheeled"
    QUADRUPED = "Quadruped"
    WHEELED_LEGGED = "WheeledLegged"
    HUMANOID = "Humanoid"


class KinematicsKind(str, Enum):
    ACKERMANN = "Ackermann"
    HOLONOMIC = "Holonomic"


@dataclass(frozen=True)
class RobotModel:
    name: str
    embodiment: Embodiment
    body_radius: float
    max_speed: float
    kinematics: KinematicsKind
    wheelbase: float = 0.0  # Ackermann only
    max_steer: float = 0.0  # rad, Ackermann only
    max_step_rise: float = 0.25
    max_grade: float = 0.60
    max_roughness: float = 0.15

    def __post_init__(self):
        if self.embodiment == Embodiment.WHEELED and self.kinematics != KinematicsKind.ACKERMANN:
            raise ValueError("wheeled robots use the Ackermann model")
        if self.embodiment != Embodiment.WHEELED and self.kinematics != KinematicsKind.HOLONOMIC:
            raise ValueError("non-wheeled robots are holonomic")
        for f in ("body_radius", "max_speed", "max_step_rise", "max_grade", "max_roughness"):
            if getattr(self, f) <= 0:
                raise ValueError(f"{f} must be > 0")
        if self.kinematics == KinematicsKind.ACKERMANN and (
                self.wheelbase <= 0 or self.max_steer <= 0):
            raise ValueError("Ackermann needs positive wheelbase and max_steer")


ROBOT_MODELS = {
    "wheeled": RobotModel(
        name="wheeled", embodiment=Embodiment.WHEELED, body_radius=0.35, max_speed=2.0,
        kinematics=KinematicsKind.ACKERMANN, wheelbase=0.4, max_steer=0.6,
        max_step_rise=0.05, max_grade=0.15, max_roughness=0.03,
    ),
    "quadruped": RobotModel(
        name="quadruped", embodiment=Embodiment.QUADRUPED, body_radius=0.35, max_speed=2.0,
        kinematics=KinematicsKind.HOLONOMIC,
        max_step_rise=0.25, max_grade=0.60, max_roughness=0.15,
    ),
    "wheeled_legged": RobotModel(
        name="wheeled_legged", embodiment=Embodiment.WHEELED_LEGGED, body_radius=0.45,
        max_speed=2.0, kinematics=KinematicsKind.HOLONOMIC,
        max_step_rise=0.25, max_grade=0.60, max_roughness=0.18,
    ),
    "humanoid": RobotModel(
        name="humanoid", embodiment=Embodiment.HUMANOID, body_radius=0.35, max_speed=1.2,
        kinematics=KinematicsKind.HOLONOMIC,
        max_step_rise=0.20, max_grade=0.45, max_roughness=0.12,
    ),
}


@dataclass
class RobotState:
    x: float
    y: float
    yaw: float
    vx: float = 0.0
    vy: float = 0.0
    elevation: float = 0.0


def clamp_action(action) -> np.ndarray:
    return np.clip(np.asarray(action, dtype=np.float64).reshape(2), -1.0, 1.0)


def integrate_motion(x, y, yaw, action0, action1, model: RobotModel, dt: float):
    """Candidate pose after dt; vectorized over leading dims.

    Holonomic: the action is the ego-frame velocity as fractions of
    max_speed; yaw chases the velocity direction at a bounded rate.
    Ackermann: action0 is throttle fraction, action1 steering fraction.
    Returns (nx, ny, nyaw, vx, vy).
    """
    if model.kinematics == KinematicsKind.HOLONOMIC:
        ex = action0 * model.max_speed
        ey = action1 * model.max_speed
        c, s = np.cos(yaw), np.sin(yaw)
        vx = c * ex - s * ey
        vy = s * ex + c * ey
        nx = x + vx * dt
        ny = y + vy * dt
        speed = np.hypot(vx, vy)
        target = np.where(speed > 1e-9, np.arctan2(vy, vx), yaw)
        dyaw = np.arctan2(np.sin(target - yaw), np.cos(target - yaw))
        dyaw = np.clip(dyaw, -YAW_RATE_LIMIT * dt, YAW_RATE_LIMIT * dt)
        nyaw = yaw + dyaw
        return nx, ny, nyaw, vx, vy
    v = action0 * model.max_speed
    steer = action1 * model.max_steer
    yaw_rate = v * np.tan(steer) / model.wheelbase
    nyaw = yaw + yaw_rate * dt
    vx = v * np.cos(yaw)
    vy = v * np.sin(yaw)
    nx = x + vx * dt
    ny = y + vy * dt
    return nx, ny, nyaw, vx, vy


def traversability_maps(occupancy, model: RobotModel):
    """Per-cell gate for the model: passable, plus blocking cause masks.

    step rise: max elevation difference to the 4-neighbors; grade: central
    difference magnitude; roughness: local deviation from the cell
    neighborhood mean.
    """
    from ..urbangen.types import CellLabel

    elev = occupancy.elevation.astype(np.float64)
    res = occupancy.resolution
    ny, nx = elev.shape

    step = np.zeros_like(elev)
    for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        shifted = np.full_like(elev, np.nan)
        r0, r1 = max(dr, 0), ny + min(dr, 0)
        c0, c1 = max(dc, 0), nx + min(dc, 0)
        shifted[r0:r1, c0:c1] = elev[r0 - dr:r1 - dr, c0 - dc:c1 - dc]
        with np.errstate(invalid="ignore"):
            step = np.fmax(step, np.abs(elev - shifted))

    # roughness: deviation from the 5x5 box mean
    k = 2
    pad = np.pad(elev, k, mode="edge")
    csum = np.cumsum(np.cumsum(pad, axis=0), axis=1)
    csum = np.pad(csum, ((1, 0), (1, 0)))
    w = 2 * k + 1
    box = (csum[w:, w:] - csum[:-w, w:] - csum[w:, :-w] + csum[:-w, :-w]) / (w * w)
    rough = np.abs(elev - box)

    # grade: slope of the box-smoothed surface at robot scale, so single
    # steps are judged by the step gate and bumps by the roughness gate
    gx = np.zeros_like(elev)
    gy = np.zeros_like(elev)
    gx[:, 1:-1] = (box[:, 2:] - box[:, :-2]) / (2 * res)
    gy[1:-1, :] = (box[2:, :] - box[:-2, :]) / (2 * res)
    grade = np.hypot(gx, gy)

    obstacle = occupancy.labels == int(CellLabel.OBSTACLE)
    blocked = (
        obstacle
        | (step > model.max_step_rise)
        | (grade > model.max_grade)
        | (rough > model.max_roughness)
    )
    return {
        "passable": ~blocked,
        "obstacle": obstacle,
        "step": step.astype(np.float32),
        "grade": grade.astype(np.float32),
        "rough": rough.astype(np.float32),
    }


def apply_action(state: RobotState, model: RobotModel, action, dt: float,
                 world=None):
    """One kinematic step with traversability gating.

    world: optional (occupancy, maps) pair from traversability_maps; when
    given, motion onto a blocked cell is cancelled (collision event if the
    blocker is an obstacle cell). Returns (new_state, events dict).
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    a = clamp_action(action)
    nx_, ny_, nyaw, vx, vy = integrate_motion(
        state.x, state.y, state.yaw, a[0], a[1], model, dt)
    events = {"collision": False, "out_of_bounds": False, "blocked": False}
    x, y = float(nx_), float(ny_)
    elevation = state.elevation
    if world is not None:
        occ, maps = world
        res = occ.resolution
        gny, gnx = occ.labels.shape
        inside = 0.0 <= x < gnx * res and 0.0 <= y < gny * res
        if not inside:
            events["out_of_bounds"] = True
        else:
            r, c = int(y / res), int(x / res)
            if not maps["passable"][r, c]:
                events["blocked"] = True
                events["collision"] = bool(maps["obstacle"][r, c])
                x, y = state.x, state.y
                vx, vy = 0.0, 0.0
            else:
                elevation = float(occ.elevation[r, c])
    return RobotState(x=x, y=y, yaw=float(nyaw), vx=float(vx), vy=float(vy),
                      elevation=elevation), events
