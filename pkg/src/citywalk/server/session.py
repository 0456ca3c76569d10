"""Session state machine, independent of the transport.

One session owns one traverse runner. The simulation free-runs under AI
control, pauses while a decision is pending, and during an intervention
advances exactly one tick per teleop frame, so human labor equals teleop
ticks times dt. All inbound frames are applied at tick boundaries by the
owning loop; handle_frame returns the outbound frames to send.
"""

import numpy as np

from ..bench.runner import TraverseRunner
from ..bench.traverse import ControlMode
from ..errors import SchemaViolation
from ..jsonio import rle_encode
from ..urbangen.types import CellLabel
from .wire import make_frame

SNAPSHOT_EVERY = 2  # sim ticks per state broadcast
METRICS_EVERY = 20
MAX_AGENTS_IN_STATE = 64


class Session:
    def __init__(self, session_id: str, runner: TraverseRunner,
                 auto_ai_after_s: float | None = None):
        self.id = session_id
        self.runner = runner
        self.mode = runner.mode
        self.tick = 0
        self.pending_decision = None  # {"id", "summary", "options"}
        self.answered_ids = set()
        self.decision_seq = 0
        self.controller_present = False
        self.paused_no_controller = False
        self.ended = False
        self.final_report = None
        self.auto_ai_after_s = auto_ai_after_s
        self.pending_since_ticks = 0
        self.last_broadcast_tick = -1
        if self.mode == ControlMode.HUMAN:
            self.runner.session.open_intervention(0)

    # -- frame builders ---------------------------------------------------

    def scene_frame(self, role: str) -> dict:
        occ = self.runner.occ
        scene = self.runner.env.scenes[0]
        payload = {
            "digest": self.runner.env.scene_hashes[0],
            "resolution": float(occ.resolution),
            "shape": [int(s) for s in occ.labels.shape],
            "labels_rle": rle_encode(occ.labels),
            "zones_rle": rle_encode(scene.zones.grid),
            "goal": [float(self.runner.goal[0]), float(self.runner.goal[1])],
            "mode": self.mode.value,
            "dt": float(self.runner.env.config.dt),
            "extent_m": [float(v) for v in self.runner.env.extent],
            "objects": [o.to_dict() for o in scene.objects],
            "role": role,
        }
        return make_frame("scene", self.id, self.tick, payload)

    def state_frame(self) -> dict:
        env = self.runner.env
        crowd = env.crowd
        agents = []
        if crowd.A > 0:
            pos = crowd.pos[0]
            act = crowd.active[0]
            order = np.argsort(
                ((pos - np.array([env.x[0], env.y[0]])) ** 2).sum(-1) + np.where(act, 0, 1e18),
                kind="stable")
            for a in order[:MAX_AGENTS_IN_STATE]:
                if not act[a]:
                    break
                agents.append({
                    "id": int(a), "x": float(pos[a, 0]), "y": float(pos[a, 1]),
                    "vx": float(crowd.vel[0, a, 0]), "vy": float(crowd.vel[0, a, 1]),
                    "radius": float(crowd.radius[0, a]), "kind": int(crowd.kind[0, a]),
                })
        obs = env.observe(0)
        payload = {
            "robot": env.robot_state(0),
            "goal": [float(env.goal[0, 0]), float(env.goal[0, 1])],
            "agents": agents,
            "controller": "Human" if self.runner.session.intervention_open else "AI",
            "intervention_open": bool(self.runner.session.intervention_open),
            "paused": bool(self.paused()),
            "pending_decision": self.pending_decision is not None,
            "depth": [round(float(d), 3) for d in obs.depth],
        }
        return make_frame("state", self.id, self.tick, payload)

    def metrics_frame(self) -> dict:
        report = self.runner.report(reached=False)
        return make_frame("metrics", self.id, self.tick, {"report": report})

    def error_frame(self, message: str) -> dict:
        return make_frame("error", self.id, self.tick, {"message": message})

    # -- control ----------------------------------------------------------

    def paused(self) -> bool:
        return (self.pending_decision is not None or self.paused_no_controller
                or self.ended)

    def human_driven(self) -> bool:
        return self.runner.session.intervention_open

    def can_free_run(self) -> bool:
        return not self.paused() and not self.human_driven()

    def on_controller_joined(self):
        self.controller_present = True
        self.paused_no_controller = False

    def on_controller_left(self):
        """Safety rule: close any open intervention and pause."""
        self.controller_present = False
        if self.runner.session.intervention_open:
            self.runner.session.close_intervention(self.tick)
        if self.mode != ControlMode.AI:
            self.paused_no_controller = True

    def _request_decision(self):
        summary = self.runner.window_summary()
        self.decision_seq += 1
        options = [{"takeover": True}]
        for key in ("Clear", "Static", "Dynamic"):
            if self.mode == ControlMode.HUMAN_AI_2:
                options.append({"nav": key})
            else:
                options.append({"nav": key, "loc": "auto"})
        self.pending_decision = {"id": self.decision_seq, "summary": summary,
                                 "options": options}
        self.pending_since_ticks = 0
        return make_frame("decision_request", self.id, self.tick, {
            "id": self.decision_seq, "interval_summary": summary, "options": options,
        })

    def advance(self) -> list:
        """One loop iteration of the owning simulation task."""
        out = []
        if self.ended:
            return out
        if self.pending_decision is not None:
            self.pending_since_ticks += 1
            if self.auto_ai_after_s is not None and \
                    self.pending_since_ticks * self.runner.env.config.dt >= self.auto_ai_after_s:
                self.runner.apply_decision(self.tick, human_input={"nav": "Clear"} if
                                           self.mode != ControlMode.HUMAN else None)
                self.pending_decision = None
            else:
                return out
        if self.paused() or self.human_driven():
            return out
        if self.mode != ControlMode.HUMAN and self.runner.needs_decision():
            if self.mode == ControlMode.AI:
                self.runner.apply_decision(self.tick)
            else:
                out.append(self._request_decision())
                return out
        events = self.runner.ai_tick(self.tick)
        self.tick += 1
        out.extend(self._post_tick_frames(events))
        return out

    def _post_tick_frames(self, events) -> list:
        out = []
        # every-tick snapshots while the human drives, so clients can
        # account labor exactly; the usual cadence otherwise
        every_tick = self.runner.session.intervention_open
        if (every_tick or self.tick % SNAPSHOT_EVERY == 0) and \
                self.tick != self.last_broadcast_tick:
            self.last_broadcast_tick = self.tick
            out.append(self.state_frame())
        if self.tick % METRICS_EVERY == 0:
            out.append(self.metrics_frame())
        if events.get("reached"):
            self.ended = True
            self.final_report = self.runner.report(reached=True)
            out.append(make_frame("end", self.id, self.tick,
                                  {"report": self.final_report}))
        return out

    # -- inbound ----------------------------------------------------------

    def handle_frame(self, frame: dict, is_controller: bool) -> list:
        ftype = frame["type"]
        if ftype == "hello":
            role = "controller" if is_controller else "viewer"
            out = [self.scene_frame(role)]
            if self.tick % SNAPSHOT_EVERY != 0 or self.last_broadcast_tick < 0:
                out.append(self.state_frame())
            return out
        if ftype == "decision_response":
            return self._handle_decision(frame, is_controller)
        if ftype == "teleop":
            return self._handle_teleop(frame, is_controller)
        if ftype == "release":
            if not is_controller:
                return [self.error_frame("only the controller may release")]
            if self.mode == ControlMode.HUMAN:
                return [self.error_frame("human mode cannot release control")]
            if self.runner.session.intervention_open:
                self.runner.release_intervention(self.tick)
            return []
        return [self.error_frame(f"unexpected frame type {ftype!r}")]

    def _handle_decision(self, frame, is_controller) -> list:
        if not is_controller:
            return [self.error_frame("only the controller decides")]
        payload = frame["payload"]
        did = payload["id"]
        if self.pending_decision is None or did != self.pending_decision["id"]:
            if did in self.answered_ids:
                return [self.error_frame(f"decision {did} already answered")]
            return [self.error_frame(f"no pending decision with id {did}")]
        choice = payload["choice"]
        if not isinstance(choice, dict):
            raise SchemaViolation("choice must be an object")
        human_input = dict(choice)
        if human_input.get("loc") == "auto":
            human_input.pop("loc")
        try:
            self.runner.apply_decision(self.tick, human_input=human_input)
        except (ValueError, KeyError) as exc:
            return [self.error_frame(str(exc))]
        self.answered_ids.add(did)
        self.pending_decision = None
        # no state frame here: broadcast ticks stay strictly increasing and
        # the open flag reaches clients with the next stepped tick
        return []

    def _handle_teleop(self, frame, is_controller) -> list:
        if not is_controller:
            return [self.error_frame("only the controller may teleoperate")]
        if not self.runner.session.intervention_open:
            return [self.error_frame("teleop rejected: no intervention open")]
        if self.ended:
            return [self.error_frame("session ended")]
        payload = frame["payload"]
        events = self.runner.human_tick(self.tick, float(payload["vx"]),
                                        float(payload["vy"]))
        self.tick += 1
        return self._post_tick_frames(events)
