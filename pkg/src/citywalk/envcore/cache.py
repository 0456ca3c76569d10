"""Asset cache: one immutable catalog load, memoized scene construction.

Environments sample scenes out of this cache; synchronous batches hit the
same memo entry, asynchronous batches fill distinct ones. Keys are the
content hash of the scene spec.
"""

import threading

from ..jsonio import content_hash
from ..urbangen.catalog import load_catalog
from ..urbangen.scene import generate_scene


class AssetCache:
    def __init__(self, catalog=None, catalog_path=None):
        if catalog is None:
            catalog = load_catalog(catalog_path)
        self._catalog = tuple(catalog)
        self._scenes = {}
        self._lock = threading.Lock()

    @property
    def catalog(self):
        return self._catalog

    def scene(self, spec):
        key = content_hash(spec.to_dict())
        with self._lock:
            hit = self._scenes.get(key)
        if hit is not None:
            return hit
        scene = generate_scene(spec, catalog=list(self._catalog))
        with self._lock:
            self._scenes.setdefault(key, scene)
            return self._scenes[key]

    def __len__(self):
        return len(self._scenes)


_default_cache = None
_default_lock = threading.Lock()


def default_cache() -> AssetCache:
    global _default_cache
    with _default_lock:
        if _default_cache is None:
            _default_cache = AssetCache()
        return _default_cache
