"""Object placement by rejection sampling.

Placement draws a category, samples a pose inside the scene, and accepts
it only if every footprint cell lies in a zone the category allows and
the oriented footprint overlaps no previously placed object. Exhausting
the attempt budget returns the partial placement with an overflow flag.
"""

from dataclasses import dataclass

import numpy as np

from ..rng import make_rng
from .types import AssetInstance, TaskKind, TerrainKind, Zone

ATTEMPTS_PER_OBJECT = 100
BASE_OBJECTS_PER_100M2 = 4.0  # density 1.0 reference for obstacle tasks


def base_count(area_m2: float, task_kind: TaskKind) -> int:
    if task_kind == TaskKind.NAV_CLEAR:
        return 0
    return int(np.floor(BASE_OBJECTS_PER_100M2 * area_m2 / 100.0 + 0.5))


@dataclass
class PlacementResult:
    instances: list
    overflow: bool
    requested: int


def footprint_cells(inst: AssetInstance, resolution: float, shape: tuple):
    """(rows, cols) arrays of cells whose centers fall inside the footprint."""
    ny, nx = shape
    corners = inst.corners()
    x0, y0 = corners.min(axis=0)
    x1, y1 = corners.max(axis=0)
    c0 = max(0, int(x0 / resolution) - 1)
    c1 = min(nx - 1, int(x1 / resolution) + 1)
    r0 = max(0, int(y0 / resolution) - 1)
    r1 = min(ny - 1, int(y1 / resolution) + 1)
    if c1 < c0 or r1 < r0:
        return np.array([], dtype=np.int64), np.array([], dtype=np.int64)
    rr, cc = np.meshgrid(np.arange(r0, r1 + 1), np.arange(c0, c1 + 1), indexing="ij")
    px = (cc + 0.5) * resolution - inst.x
    py = (rr + 0.5) * resolution - inst.y
    c, s = np.cos(inst.yaw), np.sin(inst.yaw)
    lx = c * px + s * py
    ly = -s * px + c * py
    inside = (np.abs(lx) <= inst.footprint[0] / 2.0) & (np.abs(ly) <= inst.footprint[1] / 2.0)
    rows = rr[inside].ravel()
    cols = cc[inside].ravel()
    if rows.size == 0:
        # degenerate small footprint: claim the center cell
        rc, cc2 = int(inst.y / resolution), int(inst.x / resolution)
        if 0 <= rc < ny and 0 <= cc2 < nx:
            return np.array([rc]), np.array([cc2])
    return rows, cols


def footprints_overlap(a: AssetInstance, b: AssetInstance) -> bool:
    """Separating-axis test between the two oriented footprints."""
    reach_a = float(np.hypot(*a.footprint)) / 2.0
    reach_b = float(np.hypot(*b.footprint)) / 2.0
    if (a.x - b.x) ** 2 + (a.y - b.y) ** 2 > (reach_a + reach_b) ** 2:
        return False
    ca = a.corners()
    cb = b.corners()
    for rect in (ca, cb):
        for i in range(2):
            edge = rect[(i + 1) % 4] - rect[i]
            axis = np.array([-edge[1], edge[0]])
            pa = ca @ axis
            pb = cb @ axis
            if pa.max() < pb.min() or pb.max() < pa.min():
                return False
    return True


def place_objects(zone_map, terrain, catalog, density: float, seed: int,
                  task_kind: TaskKind = TaskKind.NAV_STATIC,
                  region_mask=None) -> PlacementResult:
    """Place round(density * base_count) objects; deterministic in seed."""
    if density < 0:
        raise ValueError("density must be >= 0")
    res = zone_map.resolution
    ny, nx = zone_map.grid.shape
    area = ny * nx * res * res
    count = int(np.floor(density * base_count(area, task_kind) + 0.5))
    if count == 0:
        return PlacementResult(instances=[], overflow=False, requested=0)

    rng = make_rng(seed, "objects")
    zone_grid = zone_map.grid
    small_first = sorted(range(len(catalog)),
                         key=lambda i: catalog[i].footprint[0] * catalog[i].footprint[1])
    placed = []
    for _ in range(count):
        ok = False
        for attempt in range(ATTEMPTS_PER_OBJECT):
            if attempt < ATTEMPTS_PER_OBJECT // 2:
                entry = catalog[int(rng.integers(len(catalog)))]
            else:
                entry = catalog[small_first[int(rng.integers(min(5, len(catalog))))]]
            x = float(rng.uniform(0, nx * res))
            y = float(rng.uniform(0, ny * res))
            yaw = float(rng.uniform(0, 2 * np.pi))
            inst = AssetInstance(category=entry.category, x=x, y=y, yaw=yaw,
                                 footprint=entry.footprint, height=entry.height)
            rows, cols = footprint_cells(inst, res, (ny, nx))
            if rows.size == 0:
                continue
            zones_under = zone_grid[rows, cols]
            allowed = np.isin(zones_under, [int(z) for z in entry.allowed_zones])
            if not allowed.all():
                continue
            if region_mask is not None and not region_mask[rows, cols].all():
                continue
            if terrain is not None:
                tr = min(terrain.rows - 1, int(y / terrain.tile_size))
                tc = min(terrain.cols - 1, int(x / terrain.tile_size))
                if terrain.kind_at(tr, tc) in (TerrainKind.STAIR_UP, TerrainKind.STAIR_DOWN):
                    continue
            if any(footprints_overlap(inst, other) for other in placed):
                continue
            placed.append(inst)
            ok = True
            break
        if not ok:
            return PlacementResult(instances=placed, overflow=True, requested=count)
    return PlacementResult(instances=placed, overflow=False, requested=count)
