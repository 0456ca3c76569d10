import numpy as np
import pytest

from citywalk.envcore.cache import AssetCache


@pytest.fixture(scope="session")
def cache():
    """One shared scene cache across the whole test run."""
    return AssetCache()


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)


def open_grid(side_m: float = 15.0, resolution: float = 0.1):
    """An all-walkable flat occupancy grid for crowd/env tests."""
    from citywalk.urbangen.types import CellLabel, OccupancyGrid

    n = int(side_m / resolution)
    labels = np.full((n, n), int(CellLabel.WALKABLE), dtype=np.uint8)
    return OccupancyGrid(resolution=resolution, labels=labels,
                         elevation=np.zeros((n, n), dtype=np.float32))
