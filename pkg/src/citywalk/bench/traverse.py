"""Traverse sessions, their metrics, and the control dispatch rule.

A traverse session is a per-tick record of who controlled the robot,
resets, collisions, and positions. At every decision point the dispatch
rule either hands control to the human or binds a (navigation,
locomotion) policy pair for the next interval, depending on the control
mode and, in the shared modes, the human's answer.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import MissingHumanInput


class ControlMode(str, Enum):
    HUMAN = "human"
    HUMAN_AI_1 = "human-ai-1"
    HUMAN_AI_2 = "human-ai-2"
    AI = "ai"


NAV_KEYS = ("Clear", "Static", "Dynamic")
LOC_KEYS = ("Flat", "Slope", "Stair", "Rough")


@dataclass
class PolicyBinding:
    """Registries of primitive policies plus general fallbacks."""

    nav: dict
    loc: dict
    nav_general: object = None
    loc_general: object = None

    def __post_init__(self):
        for k in NAV_KEYS:
            if k not in self.nav:
                raise ValueError(f"missing nav policy for {k}")
        for k in LOC_KEYS:
            if k not in self.loc:
                raise ValueError(f"missing loc policy for {k}")
        if self.nav_general is None:
            self.nav_general = self.nav["Clear"]
        if self.loc_general is None:
            self.loc_general = self.loc["Flat"]


@dataclass
class ControlDecision:
    controller: str  # "Human" | "AI"
    nav_key: str | None = None
    loc_key: str | None = None
    opened_intervention: bool = False


# obstacle-cell fraction of the upcoming window above which the interval
# counts as obstacle-laden
OBSTACLE_DENSITY_THRESHOLD = 0.002


def classify_interval(window_summary: dict):
    """Rule-based (nav_key, loc_key) from the upcoming interval's census."""
    if window_summary.get("crowd_present", False):
        nav = "Dynamic"
    elif window_summary.get("obstacle_density", 0.0) > OBSTACLE_DENSITY_THRESHOLD:
        nav = "Static"
    else:
        nav = "Clear"
    census = window_summary.get("terrain_census", {})
    loc = "Flat"
    best = -1.0
    for k in LOC_KEYS:
        v = float(census.get(k, 0.0))
        if v > best:
            best, loc = v, k
    return nav, loc


def dispatch_control(state_summary: dict, mode: ControlMode, human_input=None) -> ControlDecision:
    """Eq.-style dispatch at a decision point.

    Human mode always yields human control. AI mode never does: it binds
    policies chosen by the interval classifier. The shared modes require
    a human answer: either a takeover or a policy choice.
    """
    mode = ControlMode(mode)
    if mode == ControlMode.HUMAN:
        return ControlDecision(controller="Human", opened_intervention=True)
    if mode == ControlMode.AI:
        nav, loc = classify_interval(state_summary)
        return ControlDecision(controller="AI", nav_key=nav, loc_key=loc)
    if human_input is None:
        raise MissingHumanInput(f"mode {mode.value} needs a human decision")
    if human_input.get("takeover"):
        return ControlDecision(controller="Human", opened_intervention=True)
    nav_auto, loc_auto = classify_interval(state_summary)
    nav = human_input.get("nav", nav_auto)
    if nav not in NAV_KEYS:
        raise ValueError(f"unknown nav policy key {nav!r}")
    if mode == ControlMode.HUMAN_AI_1:
        loc = human_input.get("loc", loc_auto)
        if loc not in LOC_KEYS:
            raise ValueError(f"unknown loc policy key {loc!r}")
        return ControlDecision(controller="AI", nav_key=nav, loc_key=loc)
    # human-ai-2: human picks nav, the general locomotion policy is fixed
    return ControlDecision(controller="AI", nav_key=nav, loc_key=None)


@dataclass
class TraverseSession:
    """Per-tick record of a traverse run."""

    mode: ControlMode
    dt_interval: float  # seconds represented by one tick
    decision_interval_m: float = 10.0
    intervene: list = field(default_factory=list)
    resets: list = field(default_factory=list)
    collisions: list = field(default_factory=list)
    positions: list = field(default_factory=list)
    events: list = field(default_factory=list)
    _open: bool = False

    def record_tick(self, position, collision: bool, reset: bool = False):
        self.intervene.append(self._open)
        self.collisions.append(bool(collision))
        self.resets.append(bool(reset))
        self.positions.append((float(position[0]), float(position[1])))

    def open_intervention(self, tick: int):
        if not self._open:
            self._open = True
            self.events.append({"tick": tick, "type": "intervention_start"})

    def close_intervention(self, tick: int):
        if self._open:
            self._open = False
            self.events.append({"tick": tick, "type": "intervention_end"})

    @property
    def intervention_open(self) -> bool:
        return self._open


def aggregate_traverse_metrics(session: TraverseSession) -> dict:
    """The traverse report; MCoT needs joint torques and is unavailable."""
    inter = np.asarray(session.intervene, dtype=bool)
    resets = np.asarray(session.resets, dtype=bool)
    colls = np.asarray(session.collisions, dtype=bool)
    pos = np.asarray(session.positions, dtype=np.float64)
    n = inter.size
    labor = float(inter.sum() * session.dt_interval)
    if n:
        prev = np.concatenate(([False], inter[:-1]))
        times = int((inter & ~prev).sum())
    else:
        times = 0
    if n >= 2:
        steps = np.sqrt(((pos[1:] - pos[:-1]) ** 2).sum(axis=1))
        speed = float(steps.mean() / session.dt_interval)
    else:
        speed = 0.0
    return {
        "mode": session.mode.value,
        "ticks": int(n),
        "AttemptsToSuccess": int(resets.sum()),
        "LaborCost_s": labor,
        "InterventionTimes": times,
        "Speed_mps": speed,
        "CollisionTimes": int(colls.sum()),
        "MCoT": None,  # requires joint torques; out of scope
    }
