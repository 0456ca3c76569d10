"""citywalk: deterministic batch-parallel urban micromobility simulation."""

__version__ = "0.1.0"
