"""Terrain tiles, their adjacency relation, and elevation synthesis.

Tiles expose per-edge elevation profiles; two tiles may neighbor exactly
when the shared-edge profiles are equal, except across stair tiles where
a mismatch up to the step rise is the step itself. Three tile families:

* corner tiles: elevation is bilinear in four corner heights drawn from
  {0, H} with H = grade * tile_size; saddles are excluded. These give
  ramps that can bend and taper, so slopes coexist with flat borders.
* stair tiles: a single step of the sampled rise, stacked into staircases
  by chaining tiles at successive base levels, plus plateau flats.
* rough tiles: a value-noise bump field tapered to zero at the tile
  border, so edges stay at the base elevation.
"""

from dataclasses import dataclass

import numpy as np

from ..rng import child_seed, make_rng
from . import wfc
from .types import FAMILY_OF_KIND, Split, TerrainGrid, TerrainKind, TerrainTile, Zone

TILE_SIZE_M = 2.0
STAIR_LEVELS = 3  # staircases climb up to this many steps
ROUGH_WAVELENGTH_M = 0.5
_TAPER_FRACTION = 0.125  # rough bumps fade to zero over this edge band

# Appendix sampling intervals per terrain family and split.
PARAM_RANGES = {
    ("Stair", Split.TRAIN): (0.05, 0.23),
    ("Stair", Split.TEST): (0.10, 0.30),
    ("Slope", Split.TRAIN): (0.00, 0.40),
    ("Slope", Split.TEST): (0.05, 0.80),
    ("Rough", Split.TRAIN): (0.02, 0.10),
    ("Rough", Split.TEST): (0.05, 0.20),
}

WALKABLE_ZONES = (int(Zone.SIDEWALK), int(Zone.CROSSWALK), int(Zone.PLAZA))


def sample_terrain_param(kind: str, split: Split, rng) -> float:
    """Draw a difficulty parameter for one terrain family.

    Units: Stair = step rise (m), Slope = grade (rise/run),
    Rough = peak bump amplitude (m); Flat has no parameter.
    """
    if kind == "Flat":
        return 0.0
    lo, hi = PARAM_RANGES[(kind, Split(split))]
    return float(rng.uniform(lo, hi))


# -- edge profiles -----------------------------------------------------------
# A profile is ("lin", a, b) or ("step", a, b), parameterized t in [0, 1]
# along the edge in the +col (for N/S edges) or +row (for E/W edges)
# direction. Both families are linear outside t=0.5, so the max difference
# of two profiles is attained on these probe points.
_PROBES = (0.0, 0.499999, 0.500001, 1.0)


def _profile_eval(profile, t):
    tag, a, b = profile
    if tag == "lin":
        return a + (b - a) * t
    return a if t < 0.5 else b


def profile_gap(p1, p2) -> float:
    return max(abs(_profile_eval(p1, t) - _profile_eval(p2, t)) for t in _PROBES)


@dataclass
class TileSet:
    tiles: list
    allowed: np.ndarray  # (4, n, n) bool
    weights: np.ndarray  # (n,)
    flat0: int  # index of the zero-elevation flat tile


def _corner_tile(h00, h10, h01, h11, grade) -> TerrainTile:
    hs = (h00, h10, h01, h11)
    if len(set(hs)) == 1:
        kind, param = TerrainKind.FLAT, 0.0
    else:
        up = (h10 + h11 - h00 - h01) + (h01 + h11 - h00 - h10)
        kind = TerrainKind.SLOPE_UP if up > 0 else TerrainKind.SLOPE_DOWN
        param = grade
    return TerrainTile(
        kind=kind, param=param, base=min(hs),
        shape={"type": "corner", "h": [float(h) for h in hs]},
    )


def _stair_tile(axis: str, low_at_zero: bool, base_level: int, rise: float) -> TerrainTile:
    h_lo = base_level * rise
    h_hi = (base_level + 1) * rise
    a, b = (h_lo, h_hi) if low_at_zero else (h_hi, h_lo)
    kind = TerrainKind.STAIR_UP if low_at_zero else TerrainKind.STAIR_DOWN
    return TerrainTile(
        kind=kind, param=rise, base=h_lo,
        shape={"type": "stair", "axis": axis, "a": float(a), "b": float(b)},
    )


def _rough_tile(base: float, amplitude: float) -> TerrainTile:
    return TerrainTile(
        kind=TerrainKind.ROUGH, param=amplitude, base=base,
        shape={"type": "rough", "base": float(base), "amp": float(amplitude)},
    )


def tile_edge_profiles(tile: TerrainTile) -> dict:
    """Profiles of the four edges keyed by wfc direction."""
    s = tile.shape
    if s["type"] == "corner":
        h00, h10, h01, h11 = s["h"]
        return {
            wfc.WFC_N: ("lin", h00, h10),
            wfc.WFC_S: ("lin", h01, h11),
            wfc.WFC_W: ("lin", h00, h01),
            wfc.WFC_E: ("lin", h10, h11),
        }
    if s["type"] == "stair":
        a, b = s["a"], s["b"]
        if s["axis"] == "u":  # step crosses the col direction
            return {
                wfc.WFC_N: ("step", a, b),
                wfc.WFC_S: ("step", a, b),
                wfc.WFC_W: ("lin", a, a),
                wfc.WFC_E: ("lin", b, b),
            }
        return {
            wfc.WFC_N: ("lin", a, a),
            wfc.WFC_S: ("lin", b, b),
            wfc.WFC_W: ("step", a, b),
            wfc.WFC_E: ("step", a, b),
        }
    base = s["base"]
    flat = ("lin", base, base)
    return {d: flat for d in (wfc.WFC_N, wfc.WFC_E, wfc.WFC_S, wfc.WFC_W)}


def _is_stair(tile: TerrainTile) -> bool:
    return tile.kind in (TerrainKind.STAIR_UP, TerrainKind.STAIR_DOWN)


def tiles_compatible(t1: TerrainTile, t2: TerrainTile, direction: int) -> bool:
    """May t2 sit in `direction` of t1?"""
    p1 = tile_edge_profiles(t1)[direction]
    p2 = tile_edge_profiles(t2)[wfc._FLIP[direction]]
    tol = 1e-9
    if _is_stair(t1):
        tol = max(tol, t1.param)
    if _is_stair(t2):
        tol = max(tol, t2.param)
    return profile_gap(p1, p2) <= tol + 1e-12


def build_tile_set(terrain_mix: dict, split: Split, seed: int,
                   tile_size: float = TILE_SIZE_M) -> TileSet:
    """Sample the scene's tile palette and derive the adjacency relation."""
    rng = make_rng(seed, "tileset")
    tiles = [_corner_tile(0.0, 0.0, 0.0, 0.0, 0.0)]  # flat0 always present
    mix = {k: float(terrain_mix.get(k, 0.0)) for k in ("Flat", "Slope", "Stair", "Rough")}

    if mix["Slope"] > 0:
        grades = sorted({sample_terrain_param("Slope", split, rng) for _ in range(2)})
        for g in grades:
            h = g * tile_size
            if h <= 0:
                continue
            for h00 in (0.0, h):
                for h10 in (0.0, h):
                    for h01 in (0.0, h):
                        for h11 in (0.0, h):
                            if h00 == h10 == h01 == h11 == 0.0:
                                continue  # flat0 already present
                            if h00 == h11 and h10 == h01 and h00 != h10:
                                continue  # saddle
                            tiles.append(_corner_tile(h00, h10, h01, h11, g))
    if mix["Stair"] > 0:
        rise = sample_terrain_param("Stair", split, rng)
        for axis in ("u", "v"):
            for low_at_zero in (True, False):
                for level in range(STAIR_LEVELS):
                    tiles.append(_stair_tile(axis, low_at_zero, level, rise))
        for level in range(1, STAIR_LEVELS + 1):
            h = level * rise
            tiles.append(_corner_tile(h, h, h, h, 0.0))
    if mix["Rough"] > 0:
        amps = sorted({sample_terrain_param("Rough", split, rng) for _ in range(2)})
        for a in amps:
            tiles.append(_rough_tile(0.0, a))

    n = len(tiles)
    allowed = np.zeros((4, n, n), dtype=bool)
    for i in range(n):
        for j in range(n):
            allowed[wfc.WFC_E, i, j] = tiles_compatible(tiles[i], tiles[j], wfc.WFC_E)
            allowed[wfc.WFC_S, i, j] = tiles_compatible(tiles[i], tiles[j], wfc.WFC_S)
    allowed = wfc.symmetrize(allowed)

    # family weight split equally among the family's tiles; zero-weight
    # tiles stay in the domain purely as constraint fillers
    fam_counts = {}
    for t in tiles:
        fam_counts[FAMILY_OF_KIND[t.kind]] = fam_counts.get(FAMILY_OF_KIND[t.kind], 0) + 1
    weights = np.array(
        [mix[FAMILY_OF_KIND[t.kind]] / fam_counts[FAMILY_OF_KIND[t.kind]] for t in tiles]
    )
    return TileSet(tiles=tiles, allowed=allowed, weights=weights, flat0=0)


def generate_terrain_wfc(zone_map, terrain_mix: dict, seed: int,
                         split: Split = Split.TRAIN,
                         tile_size: float = TILE_SIZE_M,
                         max_restarts: int = wfc.DEFAULT_RESTARTS,
                         nonflat_mask=None) -> TerrainGrid:
    """Collapse the walkable area onto the sampled tile set.

    Tiles not fully inside walkable zones (and, when given, not fully
    inside nonflat_mask) are forced to the flat zero-elevation tile,
    which bounds the terrain to the walkable region.
    """
    total = sum(terrain_mix.get(k, 0.0) for k in ("Flat", "Slope", "Stair", "Rough"))
    if abs(total - 1.0) > 1e-9:
        raise ValueError("terrain_mix weights must be normalized")
    ts = build_tile_set(terrain_mix, split, seed, tile_size)
    ny, nx = zone_map.grid.shape
    res = zone_map.resolution
    rows = max(1, int(np.ceil(ny * res / tile_size)))
    cols = max(1, int(np.ceil(nx * res / tile_size)))

    walk = np.isin(zone_map.grid, WALKABLE_ZONES)
    if nonflat_mask is not None:
        walk = walk & nonflat_mask
    n = len(ts.tiles)
    domains = np.ones((rows, cols, n), dtype=bool)
    cells_per_tile = int(round(tile_size / res))
    for r in range(rows):
        for c in range(cols):
            block = walk[
                r * cells_per_tile: (r + 1) * cells_per_tile,
                c * cells_per_tile: (c + 1) * cells_per_tile,
            ]
            inside = block.size == cells_per_tile ** 2 and bool(block.all())
            if not inside:
                domains[r, c, :] = False
                domains[r, c, ts.flat0] = True

    assignment = wfc.collapse(
        n, ts.allowed, ts.weights, (rows, cols),
        child_seed(seed, "terrain"), domains=domains, max_restarts=max_restarts,
    )
    return TerrainGrid(
        tile_size=tile_size, rows=rows, cols=cols, tiles=ts.tiles,
        assignment=assignment, noise_seed=child_seed(seed, "terrain-noise"),
    )


# -- elevation synthesis -----------------------------------------------------

def _hash_noise(ix: np.ndarray, iy: np.ndarray, seed: int) -> np.ndarray:
    """Integer-hash lattice noise in [-1, 1]; pure arithmetic, platform-stable."""
    h = (ix.astype(np.uint64) * np.uint64(0x9E3779B97F4A7C15)
         ^ iy.astype(np.uint64) * np.uint64(0xC2B2AE3D27D4EB4F)
         ^ np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
    h ^= h >> np.uint64(33)
    h *= np.uint64(0xFF51AFD7ED558CCD)
    h ^= h >> np.uint64(33)
    return (h >> np.uint64(11)).astype(np.float64) / float(1 << 53) * 2.0 - 1.0


def _value_noise(x: np.ndarray, y: np.ndarray, seed: int,
                 wavelength: float = ROUGH_WAVELENGTH_M) -> np.ndarray:
    gx = x / wavelength
    gy = y / wavelength
    ix = np.floor(gx).astype(np.int64)
    iy = np.floor(gy).astype(np.int64)
    fx = gx - ix
    fy = gy - iy
    sx = fx * fx * (3.0 - 2.0 * fx)
    sy = fy * fy * (3.0 - 2.0 * fy)
    n00 = _hash_noise(ix, iy, seed)
    n10 = _hash_noise(ix + 1, iy, seed)
    n01 = _hash_noise(ix, iy + 1, seed)
    n11 = _hash_noise(ix + 1, iy + 1, seed)
    top = n00 + (n10 - n00) * sx
    bot = n01 + (n11 - n01) * sx
    return top + (bot - top) * sy


def elevation_at(terrain: TerrainGrid, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Elevation (m) at world coordinates; vectorized."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    T = terrain.tile_size
    tc = np.clip((x / T).astype(np.int64), 0, terrain.cols - 1)
    tr = np.clip((y / T).astype(np.int64), 0, terrain.rows - 1)
    u = np.clip(x / T - tc, 0.0, 1.0)
    v = np.clip(y / T - tr, 0.0, 1.0)
    ids = terrain.assignment[tr, tc]

    n = len(terrain.tiles)
    type_code = np.zeros(n, dtype=np.int8)  # 0 corner, 1 stair-u, 2 stair-v, 3 rough
    p = np.zeros((n, 4), dtype=np.float64)
    for i, t in enumerate(terrain.tiles):
        s = t.shape
        if s["type"] == "corner":
            p[i] = s["h"]
        elif s["type"] == "stair":
            type_code[i] = 1 if s["axis"] == "u" else 2
            p[i, 0], p[i, 1] = s["a"], s["b"]
        else:
            type_code[i] = 3
            p[i, 0], p[i, 1] = s["base"], s["amp"]

    tcode = type_code[ids]
    pp = p[ids]
    elev = ((1 - u) * (1 - v) * pp[..., 0] + u * (1 - v) * pp[..., 1]
            + (1 - u) * v * pp[..., 2] + u * v * pp[..., 3])
    stair_u = tcode == 1
    if stair_u.any():
        elev = np.where(stair_u, np.where(u < 0.5, pp[..., 0], pp[..., 1]), elev)
    stair_v = tcode == 2
    if stair_v.any():
        elev = np.where(stair_v, np.where(v < 0.5, pp[..., 0], pp[..., 1]), elev)
    rough = tcode == 3
    if rough.any():
        taper = (np.clip(np.minimum(u, 1.0 - u) / _TAPER_FRACTION, 0.0, 1.0)
                 * np.clip(np.minimum(v, 1.0 - v) / _TAPER_FRACTION, 0.0, 1.0))
        bump = _value_noise(x, y, terrain.noise_seed)
        elev = np.where(rough, pp[..., 0] + pp[..., 1] * taper * bump, elev)
    return elev
