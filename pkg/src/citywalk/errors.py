"""Exception types shared across the engine."""


class CitywalkError(Exception):
    """Base class for engine errors."""


class ExtentTooSmall(CitywalkError):
    """Scene extent leaves no room for any walkable zone."""


class ContradictionAfterRetries(CitywalkError):
    """Constraint collapse hit a contradiction on every restart."""


class PlacementOverflow(CitywalkError):
    """Bounded rejection sampling could not place the requested object count.

    Carries the partial placement so callers can keep what succeeded.
    """

    def __init__(self, placed, requested):
        super().__init__(f"placed {len(placed)} of {requested} objects")
        self.placed = placed
        self.requested = requested


class NoRouteAvailable(CitywalkError):
    """Route sampling could not satisfy the connectivity contract."""


class BatchShapeMismatch(CitywalkError):
    """Action count does not match the environment batch size."""


class SlotOutOfRange(CitywalkError):
    """Environment slot index is outside the batch."""


class EmptyInput(CitywalkError):
    """Aggregation was called with no episodes."""


class MissingHumanInput(CitywalkError):
    """A human-dependent control mode received no human input in time."""


class NoPath(CitywalkError):
    """Grid planner found no path between the given cells."""


class SceneLoadError(CitywalkError):
    """Scene file failed to parse or validate."""


class SchemaViolation(CitywalkError):
    """A wire frame did not validate against the protocol schema."""
