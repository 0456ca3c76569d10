"""Session service tests over a real websocket transport."""

import asyncio
import json

import numpy as np
import pytest
from aiohttp import ClientSession, WSMsgType
from aiohttp.test_utils import TestServer

from citywalk.bench.presets import traverse_standard_spec
from citywalk.errors import SchemaViolation
from citywalk.server.app import build_app
from citywalk.server.wire import load_schema, make_frame, parse_frame, validate_frame


def _frame(ftype, payload):
    return json.dumps({"type": ftype, "session": "c", "tick": 0, "payload": payload})


async def _recv_until(ws, want_types, limit=5000, timeout=15):
    """Collect frames until one of want_types arrives; returns (hit, seen)."""
    seen = []
    for _ in range(limit):
        msg = await asyncio.wait_for(ws.receive(), timeout=timeout)
        if msg.type != WSMsgType.TEXT:
            return None, seen
        frame = json.loads(msg.data)
        seen.append(frame)
        if frame["type"] in want_types:
            return frame, seen
    return None, seen


@pytest.fixture()
def strip_spec():
    return traverse_standard_spec(seed=21, pedestrians=2)


def run_async(coro):
    return asyncio.run(coro)


async def _start(app):
    server = TestServer(app)
    await server.start_server()
    return server


# -- wire schema ------------------------------------------------------------------

def test_schema_validates_frames():
    f = make_frame("teleop", "s", 3, {"vx": 1.0, "vy": 0.0})
    assert validate_frame(f, direction="client") == f
    with pytest.raises(SchemaViolation):
        validate_frame({"type": "teleop", "session": "s", "tick": 3,
                        "payload": {"vx": 1.0}})
    with pytest.raises(SchemaViolation):
        validate_frame({"type": "nope", "session": "s", "tick": 0, "payload": {}})
    with pytest.raises(SchemaViolation):
        parse_frame("{not json")


def test_schema_directions():
    with pytest.raises(SchemaViolation):
        validate_frame(make_frame("state", "s", 1, {
            "robot": {}, "goal": [0, 0], "agents": [], "controller": "AI",
            "intervention_open": False, "paused": False,
            "pending_decision": False, "depth": [],
        }), direction="client")


def test_schema_covers_all_spec_types():
    schema = load_schema()
    assert set(schema["types"]) == {
        "hello", "scene", "state", "decision_request", "decision_response",
        "teleop", "release", "metrics", "end", "error",
    }


# -- live sessions -------------------------------------------------------------------

def test_handshake_returns_scene_digest(strip_spec):
    async def _inner(strip_spec=strip_spec):
        app = build_app(scene_spec=strip_spec, mode="ai", seed=1, tick_hz=0.0)
        server = await _start(app)
        try:
            async with ClientSession() as cs:
                ws = await cs.ws_connect(server.make_url("/ws"))
                await ws.send_str(_frame("hello", {}))
                scene, _ = await _recv_until(ws, {"scene"})
                assert scene is not None
                assert len(scene["payload"]["digest"]) == 64
                assert scene["payload"]["role"] == "controller"
                await ws.close()
        finally:
            await server.close()

    run_async(_inner())


def test_state_frames_monotonic_in_ai_mode(strip_spec):
    async def _inner(strip_spec=strip_spec):
        app = build_app(scene_spec=strip_spec, mode="ai", seed=1, tick_hz=0.0)
        server = await _start(app)
        try:
            async with ClientSession() as cs:
                ws = await cs.ws_connect(server.make_url("/ws"))
                await ws.send_str(_frame("hello", {}))
                ticks = []
                for _ in range(60):
                    msg = await asyncio.wait_for(ws.receive(), timeout=15)
                    frame = json.loads(msg.data)
                    if frame["type"] == "state":
                        ticks.append(frame["tick"])
                    if len(ticks) >= 25:
                        break
                assert len(ticks) >= 25
                assert all(b > a for a, b in zip(ticks, ticks[1:]))
                await ws.close()
        finally:
            await server.close()

    run_async(_inner())


def test_teleop_guard_and_decision_idempotency(strip_spec):
    async def _inner(strip_spec=strip_spec):
        app = build_app(scene_spec=strip_spec, mode="human-ai-1", seed=1, tick_hz=0.0)
        server = await _start(app)
        try:
            async with ClientSession() as cs:
                ws = await cs.ws_connect(server.make_url("/ws"))
                await ws.send_str(_frame("hello", {}))
                decision, _ = await _recv_until(ws, {"decision_request"})
                assert decision is not None
                did = decision["payload"]["id"]

                # teleop with no intervention open: rejected
                await ws.send_str(_frame("teleop", {"vx": 1.0, "vy": 0.0}))
                err, _ = await _recv_until(ws, {"error"})
                assert "teleop rejected" in err["payload"]["message"]

                await ws.send_str(_frame("decision_response",
                                         {"id": did, "choice": {"takeover": True}}))
                # duplicate answer for the same id: protocol error
                await ws.send_str(_frame("decision_response",
                                         {"id": did, "choice": {"takeover": True}}))
                err2, _ = await _recv_until(ws, {"error"})
                assert "already answered" in err2["payload"]["message"]
                await ws.close()
        finally:
            await server.close()

    run_async(_inner())


def test_pause_freezes_sim_state(strip_spec):
    async def _inner(strip_spec=strip_spec):
        app = build_app(scene_spec=strip_spec, mode="human-ai-1", seed=1, tick_hz=0.0)
        server = await _start(app)
        try:
            host = next(iter(app["hosts"].values())) if app["hosts"] else None
            async with ClientSession() as cs:
                ws = await cs.ws_connect(server.make_url("/ws"))
                await ws.send_str(_frame("hello", {}))
                decision, _ = await _recv_until(ws, {"decision_request"})
                assert decision is not None
                host = next(iter(app["hosts"].values()))
                sess = host.session
                pose_before = dict(sess.runner.env.robot_state(0))
                crowd_before = sess.runner.env.crowd.pos.copy()
                tick_before = sess.tick
                await asyncio.sleep(0.5)  # paused: the loop must not advance
                assert sess.tick == tick_before
                assert sess.runner.env.robot_state(0) == pose_before
                assert np.array_equal(sess.runner.env.crowd.pos, crowd_before)
                await ws.close()
        finally:
            await server.close()

    run_async(_inner())


def test_controller_disconnect_closes_intervention(strip_spec):
    async def _inner(strip_spec=strip_spec):
        app = build_app(scene_spec=strip_spec, mode="human-ai-1", seed=1, tick_hz=0.0)
        server = await _start(app)
        try:
            async with ClientSession() as cs:
                ws = await cs.ws_connect(server.make_url("/ws"))
                await ws.send_str(_frame("hello", {}))
                decision, _ = await _recv_until(ws, {"decision_request"})
                did = decision["payload"]["id"]
                await ws.send_str(_frame("decision_response",
                                         {"id": did, "choice": {"takeover": True}}))
                for _ in range(5):
                    await ws.send_str(_frame("teleop", {"vx": 1.0, "vy": 0.0}))
                await asyncio.sleep(0.3)
                host = next(iter(app["hosts"].values()))
                assert host.session.runner.session.intervention_open
                await ws.close()
                await asyncio.sleep(0.3)
                assert not host.session.runner.session.intervention_open
                assert host.session.paused()
        finally:
            await server.close()

    run_async(_inner())


def test_metric_fidelity_between_server_and_client_stream(strip_spec):
    async def _inner(strip_spec=strip_spec):
        """Recomputing labor/intervention counters from received frames matches
        the server's final report."""
        app = build_app(scene_spec=strip_spec, mode="human-ai-1", seed=1, tick_hz=0.0)
        server = await _start(app)
        try:
            async with ClientSession() as cs:
                ws = await cs.ws_connect(server.make_url("/ws"))
                await ws.send_str(_frame("hello", {}))
                decision, _ = await _recv_until(ws, {"decision_request"})
                did = decision["payload"]["id"]
                await ws.send_str(_frame("decision_response",
                                         {"id": did, "choice": {"takeover": True}}))
                n_teleop = 24
                for _ in range(n_teleop):
                    await ws.send_str(_frame("teleop", {"vx": 1.0, "vy": 0.0}))
                await ws.send_str(_frame("release", {}))
                # wait for a metrics frame summing up at least the intervention
                report = None
                for _ in range(200):
                    frame, _ = await _recv_until(ws, {"metrics", "end"})
                    if frame is None:
                        break
                    report = frame["payload"]["report"]
                    if report["ticks"] >= n_teleop + 10:
                        break
                host = next(iter(app["hosts"].values()))
                sess = host.session
                dt = sess.runner.env.config.dt
                assert report is not None
                assert report["InterventionTimes"] == 1
                assert report["LaborCost_s"] == pytest.approx(n_teleop * dt, abs=1e-9)
                await ws.close()
        finally:
            await server.close()

    run_async(_inner())

