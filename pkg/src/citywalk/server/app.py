"""aiohttp transport: websocket endpoint, static frontend hosting, and the
single-writer simulation loop per session.

Inbound frames land in a queue and are applied at tick boundaries by the
session loop. The first connected client controls; later clients view.
"""

import asyncio
import json
import uuid

from aiohttp import web, WSMsgType

from ..bench.runner import TraverseRunner
from ..bench.traverse import ControlMode
from ..errors import SchemaViolation
from ..jsonio import canonical_dumps
from ..rng import child_seed
from .session import Session
from .wire import parse_frame

DEFAULT_PORT = 8732


class _Client:
    def __init__(self, ws):
        self.ws = ws
        self.is_controller = False


class SessionHost:
    """Owns one Session, its clients, and the simulation loop task."""

    def __init__(self, session: Session, tick_hz: float = 20.0):
        self.session = session
        self.tick_hz = tick_hz
        self.clients: list[_Client] = []
        self.inbox: asyncio.Queue = asyncio.Queue()
        self._task = None
        self.closed = asyncio.Event()

    def controller(self):
        for c in self.clients:
            if c.is_controller:
                return c
        return None

    async def attach(self, ws) -> _Client:
        client = _Client(ws)
        if self.controller() is None:
            client.is_controller = True
            self.session.on_controller_joined()
        self.clients.append(client)
        return client

    async def detach(self, client: _Client):
        if client in self.clients:
            self.clients.remove(client)
        if client.is_controller:
            self.session.on_controller_left()
            nxt = self.clients[0] if self.clients else None
            if nxt is not None:
                nxt.is_controller = True
                self.session.on_controller_joined()

    async def broadcast(self, frames):
        if not frames:
            return
        texts = [canonical_dumps(f) for f in frames]
        for client in list(self.clients):
            for text in texts:
                try:
                    await client.ws.send_str(text)
                except (ConnectionError, RuntimeError):
                    await self.detach(client)
                    break

    async def send_to(self, client: _Client, frames):
        for f in frames:
            try:
                await client.ws.send_str(canonical_dumps(f))
            except (ConnectionError, RuntimeError):
                await self.detach(client)
                return

    async def run_loop(self):
        session = self.session
        period = 1.0 / self.tick_hz if self.tick_hz > 0 else 0.0
        try:
            while not session.ended:
                made_progress = False
                while not self.inbox.empty():
                    client, frame = self.inbox.get_nowait()
                    replies = session.handle_frame(frame, client.is_controller)
                    direct = [f for f in replies if f["type"] == "error"]
                    shared = [f for f in replies if f["type"] != "error"]
                    if direct:
                        await self.send_to(client, direct)
                    await self.broadcast(shared)
                    made_progress = True
                frames = session.advance()
                if frames:
                    made_progress = True
                await self.broadcast(frames)
                if period > 0:
                    await asyncio.sleep(period)
                elif not made_progress:
                    await asyncio.sleep(0.001)
        finally:
            self.closed.set()

    def start(self):
        self._task = asyncio.get_event_loop().create_task(self.run_loop())

    async def stop(self):
        if self._task is not None:
            self._task.cancel()
            try:
                await self._task
            except asyncio.CancelledError:
                pass


def build_app(scene_spec=None, mode: str = "human-ai-1", seed: int = 0,
              robot: str = "quadruped", decision_interval_m: float = 10.0,
              auto_ai_after_s: float | None = None, tick_hz: float = 20.0,
              static_dir: str | None = None, cache=None) -> web.Application:
    app = web.Application()
    app["hosts"] = {}

    def _new_host() -> SessionHost:
        runner = TraverseRunner(scene_spec=scene_spec,
                                seed=child_seed(seed, "session", len(app["hosts"])),
                                robot=robot, mode=ControlMode(mode),
                                decision_interval_m=decision_interval_m, cache=cache)
        session = Session(uuid.uuid4().hex[:12], runner,
                          auto_ai_after_s=auto_ai_after_s)
        host = SessionHost(session, tick_hz=tick_hz)
        app["hosts"][session.id] = host
        host.start()
        return host

    async def ws_handler(request: web.Request):
        ws = web.WebSocketResponse(heartbeat=30.0)
        await ws.prepare(request)
        want = request.query.get("session")
        host = app["hosts"].get(want)
        if host is None:
            if app["hosts"] and want is None:
                host = next(iter(app["hosts"].values()))
            else:
                host = _new_host()
        client = await host.attach(ws)
        try:
            async for msg in ws:
                if msg.type == WSMsgType.TEXT:
                    try:
                        frame = parse_frame(msg.data, direction="client")
                    except SchemaViolation as exc:
                        await host.send_to(client, [host.session.error_frame(str(exc))])
                        continue
                    await host.inbox.put((client, frame))
                elif msg.type == WSMsgType.ERROR:
                    break
        finally:
            await host.detach(client)
        return ws

    async def sessions_handler(_request):
        return web.json_response({
            sid: {"tick": h.session.tick, "ended": h.session.ended,
                  "mode": h.session.mode.value, "clients": len(h.clients)}
            for sid, h in app["hosts"].items()
        })

    app.router.add_get("/ws", ws_handler)
    app.router.add_get("/sessions", sessions_handler)
    if static_dir:
        app.router.add_static("/", static_dir, show_index=True)

    async def _cleanup(app):
        for host in app["hosts"].values():
            await host.stop()

    app.on_cleanup.append(_cleanup)
    return app


def serve(scene_path=None, mode: str = "human-ai-1", host: str = "127.0.0.1",
          port: int = DEFAULT_PORT, decision_interval_m: float = 10.0,
          robot: str = "quadruped", seed: int = 0, auto_ai_after_s=None,
          tick_hz: float = 20.0, static_dir=None, quiet: bool = False):
    """Blocking entry point used by the CLI."""
    scene_spec = None
    if scene_path:
        from ..urbangen.scene import load_scene

        scene_spec = load_scene(scene_path).spec
    app = build_app(scene_spec=scene_spec, mode=mode, seed=seed, robot=robot,
                    decision_interval_m=decision_interval_m,
                    auto_ai_after_s=auto_ai_after_s, tick_hz=tick_hz,
                    static_dir=static_dir)
    if not quiet:
        print(f"serving ws://{host}:{port}/ws  (mode={mode})")
    web.run_app(app, host=host, port=port, print=None)


def _json_error(message):
    return web.json_response({"error": message}, status=400)
