"""Asset catalog loading.

The bundled catalog stands in for a full 3D asset repository: each entry
is a category with a physical footprint, a height, and the functional
zones it may occupy.
"""

import json
from importlib import resources

from .types import CatalogEntry


def load_catalog(path=None) -> list:
    """Load a catalog from a JSON file, or the bundled default."""
    if path is None:
        text = resources.files("citywalk.data").joinpath("catalog.json").read_text("utf-8")
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    entries = [CatalogEntry.from_dict(d) for d in json.loads(text)]
    if not entries:
        raise ValueError("catalog is empty")
    return entries


def save_catalog(entries, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([e.to_dict() for e in entries], fh, indent=2)
        fh.write("\n")
