"""Ground planning: divide the scene into functional zones.

Three layout families, chosen by scene scale and task:

* block layout (large scenes with a road network): road bands follow the
  block sockets, sidewalk bands of randomized width flank every road,
  zebra crosswalks cross the roads at multi-socket blocks, and the
  leftover quadrants become buildings, vegetation, or plazas;
* strip layout (traverse scenes): one long walkable corridor with a
  vegetation border;
* courtyard layout (navigation scenes): a connected walkable region of
  randomized shape surrounded by non-walkable ground, optionally crossed
  by a sidewalk trail and cornered by building patches.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ExtentTooSmall
from ..gridmath import chamfer_distance, fill_rect, rect_mask
from ..rng import make_rng
from .types import BLOCK_SIZE_M, BlockGraph, DIR_E, DIR_N, DIR_S, DIR_W, TaskKind, Zone, ZoneMap


@dataclass
class ZoneParams:
    extent_m: tuple
    resolution: float = 0.1
    task_kind: TaskKind = TaskKind.NAV_STATIC
    road_width: float = 6.0
    sidewalk_width_range: tuple = (1.5, 3.0)
    crosswalk_length: float = 1.2
    building_margin: float = 1.0
    blob_half_range: tuple = (0.30, 0.42)  # fraction of extent per side
    blob_extra_rects: tuple = (2, 4)
    trail_width_range: tuple = (1.2, 2.2)
    border_m: float = 1.0  # vegetation border of the traverse strip
    quadrant_weights: dict = field(
        default_factory=lambda: {"building": 0.4, "vegetation": 0.3, "plaza": 0.3}
    )


def plan_ground(block_graph, seed: int, zone_params: ZoneParams) -> ZoneMap:
    """Partition the extent into zones; deterministic in seed."""
    p = zone_params
    res = p.resolution
    w, l = p.extent_m
    nx = int(np.ceil(w / res))
    ny = int(np.ceil(l / res))
    if nx < 4 or ny < 4:
        raise ExtentTooSmall(f"extent {p.extent_m} too small at resolution {res}")
    rng = make_rng(seed, "zones")
    grid = np.full((ny, nx), int(Zone.VEGETATION), dtype=np.uint8)

    params_used = {}
    if block_graph is not None and block_graph.rows * block_graph.cols > 0 and \
            min(w, l) >= BLOCK_SIZE_M:
        params_used = _block_layout(grid, block_graph, rng, p)
    elif p.task_kind == TaskKind.TRAVERSE:
        params_used = _strip_layout(grid, rng, p)
    else:
        params_used = _courtyard_layout(grid, rng, p)

    walkable = np.isin(grid, (int(Zone.SIDEWALK), int(Zone.CROSSWALK), int(Zone.PLAZA)))
    if not walkable.any():
        raise ExtentTooSmall("no walkable zone fits the extent")
    return ZoneMap(resolution=res, grid=grid, params=params_used)


def _strip_layout(grid, rng, p):
    res = p.resolution
    w, l = p.extent_m
    b = min(p.border_m, 0.2 * min(w, l))
    fill_rect(grid, int(Zone.PLAZA), b, b, w - b, l - b, res)
    return {"layout": "strip", "border_m": float(b)}


def _courtyard_layout(grid, rng, p):
    res = p.resolution
    w, l = p.extent_m
    fx = float(rng.uniform(*p.blob_half_range))
    fy = float(rng.uniform(*p.blob_half_range))
    cx, cy = w / 2.0, l / 2.0
    walk = rect_mask(grid.shape, cx - fx * w, cy - fy * l, cx + fx * w, cy + fy * l, res)
    n_extra = int(rng.integers(p.blob_extra_rects[0], p.blob_extra_rects[1] + 1))
    for _ in range(n_extra):
        # center drawn inside the base rect keeps the union connected
        ex = float(rng.uniform(cx - fx * w, cx + fx * w))
        ey = float(rng.uniform(cy - fy * l, cy + fy * l))
        hw = float(rng.uniform(0.10, 0.25)) * w
        hl = float(rng.uniform(0.10, 0.25)) * l
        walk |= rect_mask(grid.shape, ex - hw, ey - hl, ex + hw, ey + hl, res)
    grid[walk] = int(Zone.PLAZA)

    trail = bool(rng.random() < 0.5)
    if trail:
        tw = float(rng.uniform(*p.trail_width_range))
        if rng.random() < 0.5:
            tx = float(rng.uniform(cx - 0.2 * w, cx + 0.2 * w))
            band = rect_mask(grid.shape, tx - tw / 2, 0, tx + tw / 2, l, res)
        else:
            ty = float(rng.uniform(cy - 0.2 * l, cy + 0.2 * l))
            band = rect_mask(grid.shape, 0, ty - tw / 2, w, ty + tw / 2, res)
        grid[band & walk] = int(Zone.SIDEWALK)

    n_buildings = int(rng.integers(0, 3))
    corners = [(0.0, 0.0), (w, 0.0), (0.0, l), (w, l)]
    order = rng.permutation(4)
    placed = 0
    for idx in order:
        if placed >= n_buildings:
            break
        kx, ky = corners[int(idx)]
        bw = float(rng.uniform(0.12, 0.22)) * w
        bl = float(rng.uniform(0.12, 0.22)) * l
        x0 = 0.0 if kx == 0.0 else w - bw
        y0 = 0.0 if ky == 0.0 else l - bl
        m = rect_mask(grid.shape, x0, y0, x0 + bw, y0 + bl, res)
        if not (m & walk).any():
            grid[m] = int(Zone.BUILDING)
            placed += 1
    return {
        "layout": "courtyard",
        "blob_half": [fx, fy],
        "extra_rects": n_extra,
        "trail": trail,
        "buildings": placed,
    }


def _block_layout(grid, graph: BlockGraph, rng, p):
    res = p.resolution
    w, l = p.extent_m
    bs = BLOCK_SIZE_M
    span_x = graph.cols * bs
    span_y = graph.rows * bs
    ox = (w - span_x) / 2.0
    oy = (l - span_y) / 2.0
    rw = p.road_width
    sw = float(rng.uniform(*p.sidewalk_width_range))

    road = np.zeros(grid.shape, dtype=bool)
    for node in graph.nodes:
        r, c = node.cell
        x0, y0 = ox + c * bs, oy + r * bs
        cx, cy = x0 + bs / 2.0, y0 + bs / 2.0
        if node.sockets[DIR_N]:
            road |= rect_mask(grid.shape, cx - rw / 2, y0, cx + rw / 2, cy, res)
        if node.sockets[DIR_S]:
            road |= rect_mask(grid.shape, cx - rw / 2, cy, cx + rw / 2, y0 + bs, res)
        if node.sockets[DIR_W]:
            road |= rect_mask(grid.shape, x0, cy - rw / 2, cx, cy + rw / 2, res)
        if node.sockets[DIR_E]:
            road |= rect_mask(grid.shape, cx, cy - rw / 2, x0 + bs, cy + rw / 2, res)

    dist = chamfer_distance(road, res)
    sidewalk = (dist > 0) & (dist <= sw)
    grid[sidewalk] = int(Zone.SIDEWALK)
    grid[road] = int(Zone.ROADWAY)

    # leftover quadrants per block: building / vegetation / plaza
    weights = p.quadrant_weights
    choices = ["building", "vegetation", "plaza"]
    probs = np.array([weights[c] for c in choices], dtype=float)
    probs /= probs.sum()
    zone_of = {
        "building": int(Zone.BUILDING),
        "vegetation": int(Zone.VEGETATION),
        "plaza": int(Zone.PLAZA),
    }
    free = ~(road | sidewalk)
    for node in graph.nodes:
        r, c = node.cell
        x0, y0 = ox + c * bs, oy + r * bs
        for qx in (0, 1):
            for qy in (0, 1):
                pick = choices[int(rng.choice(len(choices), p=probs))]
                m = rect_mask(
                    grid.shape,
                    x0 + qx * bs / 2 + p.building_margin,
                    y0 + qy * bs / 2 + p.building_margin,
                    x0 + (qx + 1) * bs / 2 - p.building_margin,
                    y0 + (qy + 1) * bs / 2 - p.building_margin,
                    res,
                )
                grid[m & free] = zone_of[pick]

    _paint_crosswalks(grid, graph, ox, oy, rw, p)
    return {"layout": "blocks", "sidewalk_width": sw, "road_width": rw}


def _paint_crosswalks(grid, graph, ox, oy, rw, p):
    """Zebra stripes across road bands at multi-socket blocks.

    Stripes alternate with roadway every cell, so each crosswalk cell is
    4-adjacent to a roadway cell by construction.
    """
    res = p.resolution
    bs = BLOCK_SIZE_M
    ny, nx = grid.shape
    cw = p.crosswalk_length
    inset = 1.0  # distance of the crossing from the block edge
    for node in graph.nodes:
        if sum(node.sockets) < 3:
            continue
        r, c = node.cell
        x0, y0 = ox + c * bs, oy + r * bs
        cx, cy = x0 + bs / 2.0, y0 + bs / 2.0
        spans = []
        if node.sockets[DIR_N]:
            spans.append((cx - rw / 2, y0 + inset, cx + rw / 2, y0 + inset + cw, "y"))
        if node.sockets[DIR_S]:
            spans.append((cx - rw / 2, y0 + bs - inset - cw, cx + rw / 2, y0 + bs - inset, "y"))
        if node.sockets[DIR_W]:
            spans.append((x0 + inset, cy - rw / 2, x0 + inset + cw, cy + rw / 2, "x"))
        if node.sockets[DIR_E]:
            spans.append((x0 + bs - inset - cw, cy - rw / 2, x0 + bs - inset, cy + rw / 2, "x"))
        for (sx0, sy0, sx1, sy1, axis) in spans:
            m = rect_mask(grid.shape, sx0, sy0, sx1, sy1, res)
            m &= grid == int(Zone.ROADWAY)
            rr, cc = np.nonzero(m)
            if rr.size == 0:
                continue
            # alternate along the crossing direction; stripe rows/cols must
            # keep a roadway neighbor inside the band
            if axis == "y":
                keep = rr % 2 == 1
                inner = (rr > 0) & (rr < ny - 1)
            else:
                keep = cc % 2 == 1
                inner = (cc > 0) & (cc < nx - 1)
            sel = keep & inner
            grid[rr[sel], cc[sel]] = int(Zone.CROSSWALK)
