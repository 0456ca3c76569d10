"""Generation pipeline tests: blocks, zones, terrain, placement, rasterization."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from citywalk.errors import ContradictionAfterRetries
from citywalk.jsonio import rle_decode, rle_encode
from citywalk.rng import make_rng
from citywalk.urbangen import (
    BlockKind,
    CellLabel,
    connect_blocks,
    generate_scene,
    generate_terrain_wfc,
    load_catalog,
    place_objects,
    plan_ground,
    rasterize_occupancy,
    sample_terrain_param,
    SceneSpec,
    scene_hash,
    Split,
    TaskKind,
    TerrainKind,
    unmatched_interior_sockets,
    Zone,
    ZoneParams,
)
from citywalk.urbangen.blocks import _road_connected
from citywalk.urbangen.placement import footprints_overlap
from citywalk.urbangen.scene import scene_from_json, scene_to_json
from citywalk.urbangen.terrain import build_tile_set, tile_edge_profiles, profile_gap
from citywalk.urbangen import wfc


# -- blocks -------------------------------------------------------------------

def test_single_block_grid():
    g = connect_blocks(7, (1, 1))
    assert len(g.nodes) == 1
    assert g.nodes[0].kind in set(BlockKind)


def test_connect_blocks_deterministic():
    a = connect_blocks(7, (2, 2))
    b = connect_blocks(7, (2, 2))
    assert a.to_dict() == b.to_dict()


def test_no_unmatched_interior_sockets():
    g = connect_blocks(42, (2, 2))
    assert unmatched_interior_sockets(g) == 0


def test_block_grid_road_connected_many_seeds():
    for seed in range(20):
        g = connect_blocks(seed, (3, 3))
        assert unmatched_interior_sockets(g) == 0
        assert _road_connected(g)


# -- zones --------------------------------------------------------------------

def _zone_map(seed=3, extent=(50.0, 50.0), task=TaskKind.NAV_STATIC):
    if min(extent) >= 40:
        rows, cols = int(extent[1] // 20), int(extent[0] // 20)
        blocks = connect_blocks(seed, (rows, cols))
    else:
        blocks = None
    return plan_ground(blocks, seed, ZoneParams(extent_m=extent, task_kind=task))


def test_partition_identity():
    zm = _zone_map()
    assert sum(zm.counts().values()) == zm.grid.size


def test_small_scene_has_no_crosswalks():
    zm = _zone_map(extent=(10.0, 10.0), task=TaskKind.NAV_CLEAR)
    assert zm.counts()["ROADWAY"] == 0
    assert zm.counts()["CROSSWALK"] == 0


def test_crosswalk_adjacent_to_roadway():
    zm = _zone_map(seed=3)
    grid = zm.grid
    crosswalks = np.argwhere(grid == int(Zone.CROSSWALK))
    assert crosswalks.size > 0  # block layouts paint crossings
    ny, nx = grid.shape
    for r, c in crosswalks:
        neighbors = []
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < ny and 0 <= cc < nx:
                neighbors.append(grid[rr, cc])
        assert int(Zone.ROADWAY) in neighbors, (r, c)


def test_sidewalks_flank_roadways():
    zm = _zone_map(seed=5)
    road = zm.grid == int(Zone.ROADWAY)
    sidewalk = zm.grid == int(Zone.SIDEWALK)
    crosswalk = zm.grid == int(Zone.CROSSWALK)
    assert road.any() and sidewalk.any()
    # the band hugging the roadway is sidewalk (crosswalk cells sit inside
    # the road band itself and do not count as its flank)
    grown = np.zeros_like(road)
    grown[1:, :] |= road[:-1, :]
    grown[:-1, :] |= road[1:, :]
    grown[:, 1:] |= road[:, :-1]
    grown[:, :-1] |= road[:, 1:]
    ring = grown & ~road & ~crosswalk
    frac = sidewalk[ring].mean()
    assert frac > 0.9


# -- terrain parameters ---------------------------------------------------------

@pytest.mark.parametrize("kind,split,lo,hi", [
    ("Stair", Split.TRAIN, 0.05, 0.23),
    ("Stair", Split.TEST, 0.10, 0.30),
    ("Slope", Split.TRAIN, 0.00, 0.40),
    ("Slope", Split.TEST, 0.05, 0.80),
    ("Rough", Split.TRAIN, 0.02, 0.10),
    ("Rough", Split.TEST, 0.05, 0.20),
])
def test_terrain_param_ranges(kind, split, lo, hi):
    rng = make_rng(0, "param-test", kind, split.value)
    draws = np.array([sample_terrain_param(kind, split, rng) for _ in range(2000)])
    assert draws.min() >= lo and draws.max() <= hi
    # KS statistic against uniform on [lo, hi]
    u = np.sort((draws - lo) / (hi - lo))
    n = u.size
    ks = np.max(np.maximum(np.arange(1, n + 1) / n - u, u - np.arange(n) / n))
    assert ks < 0.05


def test_flat_param_is_zero():
    rng = make_rng(0)
    assert sample_terrain_param("Flat", Split.TRAIN, rng) == 0.0


# -- WFC ----------------------------------------------------------------------

def enumerate_tilings(n_tiles, allowed, shape, cap=200000):
    """Backtracking oracle: every valid tiling of the lattice (row-major)."""
    rows, cols = shape
    cells = rows * cols
    out = []
    grid = np.zeros((rows, cols), dtype=np.int32)

    def place(i):
        if len(out) > cap:
            raise OverflowError("cap")
        if i == cells:
            out.append(grid.copy())
            return
        r, c = divmod(i, cols)
        for t in range(n_tiles):
            if c > 0 and not allowed[wfc.WFC_E, grid[r, c - 1], t]:
                continue
            if r > 0 and not allowed[wfc.WFC_S, grid[r - 1, c], t]:
                continue
            grid[r, c] = t
            place(i + 1)

    place(0)
    return out


def test_wfc_single_tile_collapse():
    ts = build_tile_set({"Flat": 1.0, "Slope": 0, "Stair": 0, "Rough": 0},
                        Split.TRAIN, seed=1)
    assert len(ts.tiles) == 1  # flat only
    grid = wfc.collapse(1, ts.allowed, ts.weights, (3, 3), seed=5)
    assert (grid == 0).all()


def test_wfc_two_tile_enumeration_membership():
    # flat + one rough tile: fully mutually compatible -> 16 tilings on 2x2
    allowed = np.ones((4, 2, 2), dtype=bool)
    tilings = enumerate_tilings(2, allowed, (2, 2))
    assert len(tilings) == 16
    keys = {t.tobytes() for t in tilings}
    for seed in range(8):
        grid = wfc.collapse(2, allowed, np.array([0.5, 0.5]), (2, 2), seed=seed)
        assert grid.astype(np.int32).tobytes() in keys


def test_wfc_contradiction_raises():
    allowed = np.zeros((4, 2, 2), dtype=bool)
    with pytest.raises(ContradictionAfterRetries):
        wfc.collapse(2, allowed, np.array([0.5, 0.5]), (2, 1), seed=0)


def test_wfc_respects_forced_domains():
    allowed = np.ones((4, 2, 2), dtype=bool)
    domains = np.ones((2, 2, 2), dtype=bool)
    domains[0, 0] = [True, False]
    grid = wfc.collapse(2, allowed, np.array([0.0, 1.0]), (2, 2), seed=3,
                        domains=domains)
    assert grid[0, 0] == 0


def test_terrain_tiles_satisfy_adjacency():
    mix = {"Flat": 0.4, "Slope": 0.2, "Stair": 0.2, "Rough": 0.2}
    zm = _zone_map(seed=9, extent=(12.0, 12.0), task=TaskKind.NAV_STATIC)
    tg = generate_terrain_wfc(zm, mix, seed=4, split=Split.TRAIN)
    ts = build_tile_set(mix, Split.TRAIN, seed=4)
    # every adjacent pair satisfies the engine's own adjacency relation,
    # re-verified here against the profile functions directly
    for r in range(tg.rows):
        for c in range(tg.cols):
            t1 = tg.tiles[tg.assignment[r, c]]
            if c + 1 < tg.cols:
                t2 = tg.tiles[tg.assignment[r, c + 1]]
                gap = profile_gap(tile_edge_profiles(t1)[wfc.WFC_E],
                                  tile_edge_profiles(t2)[wfc.WFC_W])
                tol = max(t1.param if t1.kind.value.startswith("Stair") else 0.0,
                          t2.param if t2.kind.value.startswith("Stair") else 0.0)
                assert gap <= tol + 1e-9
            if r + 1 < tg.rows:
                t2 = tg.tiles[tg.assignment[r + 1, c]]
                gap = profile_gap(tile_edge_profiles(t1)[wfc.WFC_S],
                                  tile_edge_profiles(t2)[wfc.WFC_N])
                tol = max(t1.param if t1.kind.value.startswith("Stair") else 0.0,
                          t2.param if t2.kind.value.startswith("Stair") else 0.0)
                assert gap <= tol + 1e-9


# -- placement ------------------------------------------------------------------

def test_density_zero_places_nothing():
    zm = _zone_map(extent=(10.0, 10.0), task=TaskKind.NAV_STATIC)
    res = place_objects(zm, None, load_catalog(), 0.0, seed=1)
    assert res.instances == [] and not res.overflow


def test_nav_static_train_scene_has_4_objects(cache):
    spec = SceneSpec(seed=11, extent_m=(10.0, 10.0), task_kind=TaskKind.NAV_STATIC,
                     split=Split.TRAIN, object_density=1.0)
    scene = generate_scene(spec)
    assert len(scene.objects) == 4
    assert not scene.placement_overflow


def _polygon_clip_area(subject, clip):
    """Sutherland-Hodgman intersection area of two convex quads (oracle)."""
    def clip_edge(poly, a, b):
        out = []
        n = len(poly)
        for i in range(n):
            p, q = poly[i], poly[(i + 1) % n]
            edge = b - a
            side_p = edge[0] * (p[1] - a[1]) - edge[1] * (p[0] - a[0])
            side_q = edge[0] * (q[1] - a[1]) - edge[1] * (q[0] - a[0])
            if side_p >= 0:
                out.append(p)
            if (side_p >= 0) != (side_q >= 0):
                t = side_p / (side_p - side_q)
                out.append(p + t * (q - p))
        return out

    poly = [np.asarray(p, dtype=np.float64) for p in subject]
    for i in range(len(clip)):
        if not poly:
            return 0.0
        poly = clip_edge(poly, np.asarray(clip[i]), np.asarray(clip[(i + 1) % len(clip)]))
    if len(poly) < 3:
        return 0.0
    arr = np.asarray(poly)
    x, y = arr[:, 0], arr[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def test_placed_footprints_have_zero_overlap_area(cache):
    spec = SceneSpec(seed=5, extent_m=(15.0, 15.0), task_kind=TaskKind.NAV_STATIC,
                     split=Split.TEST, object_density=1.0)
    scene = generate_scene(spec)
    objs = scene.objects
    assert len(objs) >= 2
    for a, b in itertools.combinations(objs, 2):
        area = _polygon_clip_area(a.corners(), b.corners())
        assert area <= 1e-12, (a.category, b.category)
        assert not footprints_overlap(a, b)


def test_objects_inside_allowed_zones(cache):
    spec = SceneSpec(seed=6, extent_m=(12.0, 12.0), task_kind=TaskKind.NAV_STATIC)
    scene = generate_scene(spec)
    catalog = {e.category: e for e in load_catalog()}
    from citywalk.urbangen.placement import footprint_cells

    for inst in scene.objects:
        entry = catalog[inst.category]
        rows, cols = footprint_cells(inst, scene.zones.resolution, scene.zones.grid.shape)
        zones_under = scene.zones.grid[rows, cols]
        assert np.isin(zones_under, [int(z) for z in entry.allowed_zones]).all()


# -- occupancy ------------------------------------------------------------------

def test_rasterize_dimensions(cache):
    spec = SceneSpec(seed=1, extent_m=(10.0, 10.0), task_kind=TaskKind.NAV_CLEAR)
    scene = generate_scene(spec)
    grid = rasterize_occupancy(scene, 0.1)
    assert grid.labels.shape == (100, 100)


def test_object_center_cell_is_obstacle(cache):
    spec = SceneSpec(seed=11, extent_m=(10.0, 10.0), task_kind=TaskKind.NAV_STATIC)
    scene = generate_scene(spec)
    grid = rasterize_occupancy(scene)
    for inst in scene.objects:
        r, c = grid.cell_of(inst.x, inst.y)
        assert grid.labels[r, c] == int(CellLabel.OBSTACLE)


def test_walkable_fraction_matches_zone_map(cache):
    spec = SceneSpec(seed=2, extent_m=(10.0, 10.0), task_kind=TaskKind.NAV_CLEAR)
    scene = generate_scene(spec)
    grid = rasterize_occupancy(scene)
    walkable_zones = np.isin(scene.zones.grid, (int(Zone.SIDEWALK), int(Zone.CROSSWALK),
                                                int(Zone.PLAZA)))
    zone_frac = walkable_zones.mean()
    label_frac = (grid.labels == int(CellLabel.WALKABLE)).mean()
    # same resolution here, so they differ only by object footprints
    assert abs(zone_frac - label_frac) < 0.02


def test_label_set_is_exactly_four_values(cache):
    spec = SceneSpec(seed=2, extent_m=(50.0, 50.0), task_kind=TaskKind.NAV_STATIC)
    scene = generate_scene(spec)
    grid = rasterize_occupancy(scene)
    assert set(np.unique(grid.labels)) <= {0, 1, 2, 3}


# -- scene pipeline --------------------------------------------------------------

def test_generate_scene_deterministic(cache):
    spec = SceneSpec(seed=42, extent_m=(10.0, 10.0), task_kind=TaskKind.NAV_STATIC)
    h1 = scene_hash(generate_scene(spec))
    h2 = scene_hash(generate_scene(spec))
    assert h1 == h2


def test_nav_clear_scene_is_empty(cache):
    spec = SceneSpec(seed=9, extent_m=(10.0, 10.0), task_kind=TaskKind.NAV_CLEAR,
                     pedestrian_count=0)
    scene = generate_scene(spec)
    assert scene.objects == []
    assert scene.spec.pedestrian_count == 0


@pytest.mark.parametrize("side", [10.0, 50.0, 100.0])
def test_generation_smoke_matrix(side):
    spec = SceneSpec(seed=7, extent_m=(side, side), task_kind=TaskKind.NAV_STATIC)
    scene = generate_scene(spec)
    grid = rasterize_occupancy(scene)
    assert grid.labels.shape == (int(side / 0.1), int(side / 0.1))
    assert len(scene.routes) >= 1


def test_scene_json_roundtrip(cache):
    spec = SceneSpec(seed=3, extent_m=(12.0, 12.0), task_kind=TaskKind.NAV_DYNAMIC,
                     pedestrian_count=2,
                     terrain_mix={"Flat": 0.4, "Slope": 0.2, "Stair": 0.2, "Rough": 0.2})
    scene = generate_scene(spec)
    text = scene_to_json(scene)
    again = scene_to_json(scene_from_json(text))
    assert text == again


@given(st.lists(st.integers(min_value=0, max_value=5), min_size=0, max_size=200))
@settings(max_examples=50, deadline=None)
def test_rle_roundtrip(values):
    arr = np.asarray(values, dtype=np.uint8)
    assert (rle_decode(rle_encode(arr)) == arr).all()


def test_pgm_export_roundtrip(tmp_path, cache):
    from citywalk.urbangen import export_occupancy, load_occupancy

    spec = SceneSpec(seed=4, extent_m=(10.0, 10.0), task_kind=TaskKind.NAV_STATIC)
    scene = generate_scene(spec)
    grid = rasterize_occupancy(scene)
    prefix = str(tmp_path / "occ")
    export_occupancy(grid, prefix)
    back = load_occupancy(prefix)
    assert (back.labels == grid.labels).all()
    assert np.allclose(back.elevation, grid.elevation)
    with open(prefix + ".pgm", "rb") as fh:
        assert fh.readline().strip() == b"P5"
