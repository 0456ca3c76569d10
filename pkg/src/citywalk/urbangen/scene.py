"""The four-stage generation pipeline and scene serialization.

generate_scene is a pure function of its spec: every stage draws from a
child stream derived by hashing the spec seed with a stage label, and the
serialized output is canonical JSON, so one spec maps to one byte sequence.
"""

import numpy as np

from ..errors import NoRouteAvailable
from ..gridmath import chamfer_distance
from ..jsonio import canonical_dumps, content_hash, rle_decode, rle_encode
from ..paths import dijkstra_field
from ..rng import child_seed, make_rng
from .blocks import connect_blocks
from .catalog import load_catalog
from .occupancy import rasterize_occupancy
from .placement import place_objects
from .terrain import generate_terrain_wfc
from .types import (
    BLOCK_SIZE_M,
    BlockGraph,
    CellLabel,
    SceneDescription,
    SceneSpec,
    SCHEMA_VERSION,
    TaskKind,
    ZoneMap,
)
from .zones import ZoneParams, plan_ground

_BLOCK_LAYOUT_MIN_M = 2 * BLOCK_SIZE_M  # below this, scenes have no road network
MAX_ROUTE_ANCHORS = 8
MIN_ANCHOR_CLEARANCE_M = 0.4
TRAVERSE_SEGMENTS = 6


def generate_scene(spec: SceneSpec, catalog=None) -> SceneDescription:
    """Run block connection, ground planning, terrain, and placement."""
    if catalog is None:
        catalog = load_catalog()
    w, l = spec.extent_m
    if min(w, l) >= _BLOCK_LAYOUT_MIN_M and spec.task_kind != TaskKind.TRAVERSE:
        rows_b = int(l // BLOCK_SIZE_M)
        cols_b = int(w // BLOCK_SIZE_M)
        blocks = connect_blocks(child_seed(spec.seed, "blocks"), (rows_b, cols_b))
    else:
        blocks = BlockGraph(rows=0, cols=0, nodes=[], edges=[], capped=[])

    zones = plan_ground(
        blocks if blocks.nodes else None,
        child_seed(spec.seed, "ground"),
        ZoneParams(extent_m=spec.extent_m, resolution=spec.grid_resolution_m,
                   task_kind=spec.task_kind),
    )

    nonflat_mask = None
    if spec.task_kind == TaskKind.TRAVERSE:
        # terrain only on the uneven half of the strip
        nonflat_mask = np.zeros(zones.grid.shape, dtype=bool)
        split_col = int(zones.grid.shape[1] * 0.5)
        nonflat_mask[:, split_col:] = True
    terrain = generate_terrain_wfc(
        zones, spec.terrain_mix, child_seed(spec.seed, "terrain-stage"),
        split=spec.split, nonflat_mask=nonflat_mask,
    )

    region_mask = None
    density = spec.object_density
    if spec.task_kind == TaskKind.TRAVERSE:
        region_mask = traverse_segment_mask(zones.grid.shape, (1, 2, 4, 5))
        density *= 4.0 / 6.0  # objects occupy 4 of 6 segments at nominal density
    elif spec.task_kind in (TaskKind.NAV_STATIC, TaskKind.NAV_DYNAMIC):
        region_mask = np.isin(zones.grid, (0, 1, 2))  # walkable zones only
    placement = place_objects(
        zones, terrain, catalog, density,
        child_seed(spec.seed, "placement"), task_kind=spec.task_kind,
        region_mask=region_mask,
    )

    scene = SceneDescription(
        spec=spec, blocks=blocks, zones=zones, terrain=terrain,
        objects=placement.instances, routes=[],
        placement_overflow=placement.overflow,
    )
    grid = rasterize_occupancy(scene)
    scene.routes = _sample_route_anchors(spec, grid)
    return scene


def traverse_segment_mask(shape: tuple, segment_indices) -> np.ndarray:
    """Mask of the given traverse segments (6 equal bands along x)."""
    ny, nx = shape
    mask = np.zeros(shape, dtype=bool)
    for i in segment_indices:
        c0 = int(nx * i / TRAVERSE_SEGMENTS)
        c1 = int(nx * (i + 1) / TRAVERSE_SEGMENTS)
        mask[:, c0:c1] = True
    return mask


def _sample_route_anchors(spec: SceneSpec, grid) -> list:
    """Candidate (start, goal) pairs: clear walkable cells, grid-connected."""
    res = grid.resolution
    walkable = grid.labels == int(CellLabel.WALKABLE)
    clearance = chamfer_distance(~walkable, res)
    clear = walkable & (clearance >= MIN_ANCHOR_CLEARANCE_M)
    if not clear.any():
        clear = walkable
    if not clear.any():
        raise NoRouteAvailable("no walkable cells for route anchors")
    rows, cols = np.nonzero(clear)
    xs = (cols + 0.5) * res
    ys = (rows + 0.5) * res

    if spec.task_kind == TaskKind.TRAVERSE:
        return _traverse_anchor(grid, walkable, rows, cols, xs, ys, res)

    rng = make_rng(spec.seed, "routes")
    d = float(min(spec.extent_m))
    # separation window relaxes only when nothing qualifies
    windows = [(0.5 * d, 0.8 * d, 1.6), (0.35 * d, 0.8 * d, 2.0), (0.2 * d, 0.9 * d, 4.0)]
    pairs = []
    fields = []
    for _ in range(4):
        i = int(rng.integers(rows.size))
        fields.append((i, dijkstra_field(walkable, [(rows[i], cols[i])], res)[rows, cols]))
    for lo, hi, ratio_cap in windows:
        for i, geo in fields:
            euclid = np.sqrt((xs - xs[i]) ** 2 + (ys - ys[i]) ** 2)
            ok = (euclid >= lo) & (euclid <= hi) & np.isfinite(geo) & \
                 (geo <= ratio_cap * np.maximum(euclid, 1e-9))
            idx = np.flatnonzero(ok)
            for _ in range(min(2, idx.size)):
                j = int(idx[int(rng.integers(idx.size))])
                pairs.append([[float(xs[i]), float(ys[i])], [float(xs[j]), float(ys[j])]])
                if len(pairs) >= MAX_ROUTE_ANCHORS:
                    return pairs
        if pairs:
            return pairs
    raise NoRouteAvailable("could not find connected start/goal pairs")


def _traverse_anchor(grid, walkable, rows, cols, xs, ys, res) -> list:
    """One west-to-east route across the strip."""
    ny, nx = grid.labels.shape
    want_sx, want_gx = 1.5, nx * res - 1.5
    cy = ny * res / 2.0
    start_i = int(np.argmin((xs - want_sx) ** 2 + (ys - cy) ** 2))
    field = dijkstra_field(walkable, [(rows[start_i], cols[start_i])], res)
    geo = field[rows, cols]
    reachable = np.isfinite(geo)
    if not reachable.any():
        raise NoRouteAvailable("traverse strip is disconnected")
    score = (xs - want_gx) ** 2 + (ys - cy) ** 2 + np.where(reachable, 0.0, 1e12)
    goal_i = int(np.argmin(score))
    return [[[float(xs[start_i]), float(ys[start_i])],
             [float(xs[goal_i]), float(ys[goal_i])]]]


# -- serialization -----------------------------------------------------------

def scene_to_dict(scene: SceneDescription) -> dict:
    return {
        "schema_version": scene.schema_version,
        "spec": scene.spec.to_dict(),
        "blocks": scene.blocks.to_dict(),
        "zones": {
            "resolution": float(scene.zones.resolution),
            "shape": [int(s) for s in scene.zones.grid.shape],
            "rle": rle_encode(scene.zones.grid),
            "params": scene.zones.params,
        },
        "terrain": scene.terrain.to_dict(),
        "objects": [o.to_dict() for o in scene.objects],
        "routes": scene.routes,
        "placement_overflow": bool(scene.placement_overflow),
    }


def scene_from_dict(d: dict) -> SceneDescription:
    from .types import TerrainGrid

    zshape = d["zones"]["shape"]
    zones = ZoneMap(
        resolution=float(d["zones"]["resolution"]),
        grid=rle_decode(d["zones"]["rle"]).reshape(zshape[0], zshape[1]),
        params=d["zones"]["params"],
    )
    return SceneDescription(
        spec=SceneSpec.from_dict(d["spec"]),
        blocks=BlockGraph.from_dict(d["blocks"]),
        zones=zones,
        terrain=TerrainGrid.from_dict(d["terrain"]),
        objects=[_asset_from(o) for o in d["objects"]],
        routes=d["routes"],
        schema_version=int(d["schema_version"]),
        placement_overflow=bool(d.get("placement_overflow", False)),
    )


def _asset_from(o):
    from .types import AssetInstance

    return AssetInstance.from_dict(o)


def scene_to_json(scene: SceneDescription) -> str:
    return canonical_dumps(scene_to_dict(scene))


def scene_from_json(text: str) -> SceneDescription:
    import json

    from ..errors import SceneLoadError

    try:
        d = json.loads(text)
        if int(d.get("schema_version", -1)) != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {d.get('schema_version')}")
        return scene_from_dict(d)
    except (KeyError, ValueError, TypeError) as exc:
        raise SceneLoadError(str(exc)) from exc


def scene_hash(scene: SceneDescription) -> str:
    return content_hash(scene_to_dict(scene))


def save_scene(scene: SceneDescription, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(scene_to_json(scene))
        fh.write("\n")


def load_scene(path: str) -> SceneDescription:
    with open(path, "r", encoding="utf-8") as fh:
        return scene_from_json(fh.read())
