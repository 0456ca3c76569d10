"""Live session service over websockets."""

from .app import build_app, serve, SessionHost
from .session import Session, SNAPSHOT_EVERY
from .wire import load_schema, make_frame, parse_frame, validate_frame

__all__ = ["SNAPSHOT_EVERY", "Session", "SessionHost", "build_app", "load_schema",
           "make_frame", "parse_frame", "serve", "validate_frame"]
