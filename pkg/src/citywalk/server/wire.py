"""Wire protocol: frame construction and schema validation.

Frames are JSON text: {type, session, tick, payload}. The schema file is
shared verbatim with the browser client, which validates its outbound
frames against the same document.
"""

import json
from importlib import resources

from ..errors import SchemaViolation

_TYPE_CHECKS = {
    "string": lambda v: isinstance(v, str),
    "integer": lambda v: isinstance(v, int) and not isinstance(v, bool),
    "number": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    "boolean": lambda v: isinstance(v, bool),
    "array": lambda v: isinstance(v, list),
    "object": lambda v: isinstance(v, dict),
}


def load_schema() -> dict:
    text = resources.files("citywalk.data").joinpath("wire_schema.json").read_text("utf-8")
    return json.loads(text)


_SCHEMA = load_schema()


def validate_frame(frame: dict, direction: str | None = None) -> dict:
    """Raise SchemaViolation unless the frame matches the shared schema."""
    if not isinstance(frame, dict):
        raise SchemaViolation("frame is not an object")
    for name, kind in _SCHEMA["frame"]["required"].items():
        if name not in frame:
            raise SchemaViolation(f"missing field {name!r}")
        if not _TYPE_CHECKS[kind](frame[name]):
            raise SchemaViolation(f"field {name!r} must be {kind}")
    ftype = frame["type"]
    spec = _SCHEMA["types"].get(ftype)
    if spec is None:
        raise SchemaViolation(f"unknown frame type {ftype!r}")
    if direction is not None and spec["from"] != direction:
        raise SchemaViolation(f"{ftype!r} frames come from the {spec['from']}")
    payload = frame["payload"]
    for name, kind in spec["payload"].items():
        if name not in payload:
            raise SchemaViolation(f"{ftype}: missing payload field {name!r}")
        if not _TYPE_CHECKS[kind](payload[name]):
            raise SchemaViolation(f"{ftype}: payload field {name!r} must be {kind}")
    return frame


def make_frame(ftype: str, session: str, tick: int, payload: dict) -> dict:
    return validate_frame(
        {"type": ftype, "session": session, "tick": int(tick), "payload": payload})


def parse_frame(text: str, direction: str = "client") -> dict:
    try:
        frame = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"invalid JSON: {exc}") from exc
    return validate_frame(frame, direction)
