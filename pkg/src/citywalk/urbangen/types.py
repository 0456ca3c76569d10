"""Domain types for the scene generation pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum

import numpy as np


class TaskKind(str, Enum):
    NAV_CLEAR = "NavClear"
    NAV_STATIC = "NavStatic"
    NAV_DYNAMIC = "NavDynamic"
    TRAVERSE = "Traverse"


class Split(str, Enum):
    TRAIN = "Train"
    TEST = "Test"


class BlockKind(str, Enum):
    STRAIGHT = "Straight"
    CURVE = "Curve"
    ROUNDABOUT = "Roundabout"
    DIVERGING = "Diverging"
    MERGING = "Merging"
    INTERSECTION = "Intersection"
    T_INTERSECTION = "TIntersection"


class Zone(IntEnum):
    SIDEWALK = 0
    CROSSWALK = 1
    PLAZA = 2
    BUILDING = 3
    VEGETATION = 4
    ROADWAY = 5


class TerrainKind(str, Enum):
    FLAT = "Flat"
    SLOPE_UP = "SlopeUp"
    SLOPE_DOWN = "SlopeDown"
    STAIR_UP = "StairUp"
    STAIR_DOWN = "StairDown"
    ROUGH = "Rough"


# Mix weights are specified over these four coarse families.
TERRAIN_FAMILIES = ("Flat", "Slope", "Stair", "Rough")

FAMILY_OF_KIND = {
    TerrainKind.FLAT: "Flat",
    TerrainKind.SLOPE_UP: "Slope",
    TerrainKind.SLOPE_DOWN: "Slope",
    TerrainKind.STAIR_UP: "Stair",
    TerrainKind.STAIR_DOWN: "Stair",
    TerrainKind.ROUGH: "Rough",
}


class CellLabel(IntEnum):
    OBSTACLE = 0
    ROADWAY = 1
    WALKABLE = 2
    NON_WALKABLE_GROUND = 3


# Zones rasterize to occupancy labels; object footprints override to OBSTACLE.
ZONE_TO_LABEL = {
    Zone.SIDEWALK: CellLabel.WALKABLE,
    Zone.CROSSWALK: CellLabel.WALKABLE,
    Zone.PLAZA: CellLabel.WALKABLE,
    Zone.BUILDING: CellLabel.OBSTACLE,
    Zone.VEGETATION: CellLabel.NON_WALKABLE_GROUND,
    Zone.ROADWAY: CellLabel.ROADWAY,
}

BLOCK_SIZE_M = 20.0  # fixed block template edge

EXTENT_MIN_M = 5.0
EXTENT_MAX_M = 1200.0


@dataclass(frozen=True)
class SceneSpec:
    """Full input contract of the generation pipeline: one spec, one scene."""

    seed: int
    extent_m: tuple[float, float] = (10.0, 10.0)  # (width=x, length=y)
    task_kind: TaskKind = TaskKind.NAV_STATIC
    split: Split = Split.TRAIN
    object_density: float = 1.0
    pedestrian_count: int = 0
    terrain_mix: dict = field(
        default_factory=lambda: {"Flat": 0.7, "Slope": 0.1, "Stair": 0.0, "Rough": 0.2}
    )
    grid_resolution_m: float = 0.1

    def __post_init__(self):
        w, l = self.extent_m
        if not (EXTENT_MIN_M <= w <= EXTENT_MAX_M and EXTENT_MIN_M <= l <= EXTENT_MAX_M):
            raise ValueError(f"extent_m components must lie in [{EXTENT_MIN_M}, {EXTENT_MAX_M}]")
        if self.object_density < 0:
            raise ValueError("object_density must be >= 0")
        if self.grid_resolution_m <= 0:
            raise ValueError("grid_resolution_m must be > 0")
        total = sum(self.terrain_mix.get(k, 0.0) for k in TERRAIN_FAMILIES)
        if abs(total - 1.0) > 1e-9:
            raise ValueError("terrain_mix weights must sum to 1")
        for k in self.terrain_mix:
            if k not in TERRAIN_FAMILIES:
                raise ValueError(f"unknown terrain family {k!r}")

    def to_dict(self) -> dict:
        return {
            "seed": int(self.seed),
            "extent_m": [float(self.extent_m[0]), float(self.extent_m[1])],
            "task_kind": self.task_kind.value,
            "split": self.split.value,
            "object_density": float(self.object_density),
            "pedestrian_count": int(self.pedestrian_count),
            "terrain_mix": {k: float(self.terrain_mix.get(k, 0.0)) for k in TERRAIN_FAMILIES},
            "grid_resolution_m": float(self.grid_resolution_m),
        }

    @staticmethod
    def from_dict(d: dict) -> "SceneSpec":
        return SceneSpec(
            seed=int(d["seed"]),
            extent_m=(float(d["extent_m"][0]), float(d["extent_m"][1])),
            task_kind=TaskKind(d["task_kind"]),
            split=Split(d["split"]),
            object_density=float(d["object_density"]),
            pedestrian_count=int(d["pedestrian_count"]),
            terrain_mix=dict(d["terrain_mix"]),
            grid_resolution_m=float(d["grid_resolution_m"]),
        )


# Socket bitmask order for block edges: N, E, S, W.
DIR_N, DIR_E, DIR_S, DIR_W = 0, 1, 2, 3
OPPOSITE_DIR = {DIR_N: DIR_S, DIR_E: DIR_W, DIR_S: DIR_N, DIR_W: DIR_E}

# Base socket pattern per kind at orientation 0, as (N, E, S, W) booleans.
BLOCK_SOCKETS = {
    BlockKind.STRAIGHT: (1, 0, 1, 0),
    BlockKind.CURVE: (1, 1, 0, 0),
    BlockKind.ROUNDABOUT: (1, 1, 1, 1),
    BlockKind.DIVERGING: (1, 1, 0, 1),
    BlockKind.MERGING: (1, 1, 0, 1),
    BlockKind.INTERSECTION: (1, 1, 1, 1),
    BlockKind.T_INTERSECTION: (1, 1, 0, 1),
}


def rotated_sockets(kind: BlockKind, orientation: int) -> tuple:
    """Socket pattern after rotating the template by orientation*90 deg CW."""
    base = BLOCK_SOCKETS[kind]
    o = orientation % 4
    return tuple(base[(i - o) % 4] for i in range(4))


@dataclass
class BlockNode:
    kind: BlockKind
    cell: tuple[int, int]  # (row, col) in the block grid
    orientation: int  # quarter turns clockwise
    sockets: tuple  # (N, E, S, W) booleans after rotation

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "cell": [int(self.cell[0]), int(self.cell[1])],
            "orientation": int(self.orientation),
            "sockets": [int(s) for s in self.sockets],
        }


@dataclass
class BlockGraph:
    rows: int
    cols: int
    nodes: list  # row-major BlockNode list, len == rows*cols
    edges: list  # ((row, col), (row, col)) matched socket pairs
    capped: list  # ((row, col), dir) boundary sockets closed with a cap

    def node_at(self, row: int, col: int) -> BlockNode:
        return self.nodes[row * self.cols + col]

    def to_dict(self) -> dict:
        return {
            "rows": int(self.rows),
            "cols": int(self.cols),
            "nodes": [n.to_dict() for n in self.nodes],
            "edges": [[[int(a[0]), int(a[1])], [int(b[0]), int(b[1])]] for a, b in self.edges],
            "capped": [[[int(c[0]), int(c[1])], int(d)] for c, d in self.capped],
        }

    @staticmethod
    def from_dict(d: dict) -> "BlockGraph":
        nodes = [
            BlockNode(
                kind=BlockKind(n["kind"]),
                cell=(n["cell"][0], n["cell"][1]),
                orientation=n["orientation"],
                sockets=tuple(n["sockets"]),
            )
            for n in d["nodes"]
        ]
        edges = [((a[0], a[1]), (b[0], b[1])) for a, b in d["edges"]]
        capped = [((c[0], c[1]), dd) for c, dd in d["capped"]]
        return BlockGraph(rows=d["rows"], cols=d["cols"], nodes=nodes, edges=edges, capped=capped)


@dataclass
class ZoneMap:
    """Per-cell functional zone over the scene extent."""

    resolution: float
    grid: np.ndarray  # (ny, nx) uint8 of Zone values
    params: dict  # randomized dimension parameters used for the draw

    @property
    def shape(self) -> tuple:
        return self.grid.shape

    def counts(self) -> dict:
        out = {}
        for z in Zone:
            out[z.name] = int(np.count_nonzero(self.grid == int(z)))
        return out


@dataclass
class TerrainTile:
    """One entry of the scene's tile set (shape + difficulty, not position)."""

    kind: TerrainKind
    param: float  # grade for slopes, step rise for stairs, amplitude for rough
    base: float  # reference elevation of the tile's low corner/level
    shape: dict  # kind-specific geometry descriptor

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "param": float(self.param),
            "base": float(self.base),
            "shape": self.shape,
        }

    @staticmethod
    def from_dict(d: dict) -> "TerrainTile":
        return TerrainTile(
            kind=TerrainKind(d["kind"]), param=float(d["param"]),
            base=float(d["base"]), shape=d["shape"],
        )


@dataclass
class TerrainGrid:
    tile_size: float
    rows: int
    cols: int
    tiles: list  # TerrainTile table
    assignment: np.ndarray  # (rows, cols) int32 indices into tiles
    noise_seed: int  # stream for rough-tile bump fields

    def kind_at(self, row: int, col: int) -> TerrainKind:
        return self.tiles[int(self.assignment[row, col])].kind

    def to_dict(self) -> dict:
        from ..jsonio import rle_encode

        return {
            "tile_size": float(self.tile_size),
            "rows": int(self.rows),
            "cols": int(self.cols),
            "tiles": [t.to_dict() for t in self.tiles],
            "assignment_rle": rle_encode(self.assignment.astype(np.int64)),
            "noise_seed": int(self.noise_seed),
        }

    @staticmethod
    def from_dict(d: dict) -> "TerrainGrid":
        from ..jsonio import rle_decode

        assignment = rle_decode(d["assignment_rle"], dtype=np.int64).reshape(
            d["rows"], d["cols"]
        ).astype(np.int32)
        return TerrainGrid(
            tile_size=float(d["tile_size"]),
            rows=int(d["rows"]),
            cols=int(d["cols"]),
            tiles=[TerrainTile.from_dict(t) for t in d["tiles"]],
            assignment=assignment,
            noise_seed=int(d["noise_seed"]),
        )


@dataclass(frozen=True)
class CatalogEntry:
    category: str
    footprint: tuple[float, float]  # (w, l) meters
    height: float
    allowed_zones: tuple  # Zone values

    def to_dict(self) -> dict:
        return {
            "category": self.category,
            "footprint": [float(self.footprint[0]), float(self.footprint[1])],
            "height": float(self.height),
            "allowed_zones": [Zone(z).name for z in self.allowed_zones],
        }

    @staticmethod
    def from_dict(d: dict) -> "CatalogEntry":
        return CatalogEntry(
            category=d["category"],
            footprint=(float(d["footprint"][0]), float(d["footprint"][1])),
            height=float(d["height"]),
            allowed_zones=tuple(Zone[z] for z in d["allowed_zones"]),
        )


@dataclass
class AssetInstance:
    category: str
    x: float
    y: float
    yaw: float
    footprint: tuple[float, float]
    height: float

    def to_dict(self) -> dict:
        return {
            "category": self.category,
            "x": float(self.x),
            "y": float(self.y),
            "yaw": float(self.yaw),
            "footprint": [float(self.footprint[0]), float(self.footprint[1])],
            "height": float(self.height),
        }

    @staticmethod
    def from_dict(d: dict) -> "AssetInstance":
        return AssetInstance(
            category=d["category"], x=float(d["x"]), y=float(d["y"]), yaw=float(d["yaw"]),
            footprint=(float(d["footprint"][0]), float(d["footprint"][1])),
            height=float(d["height"]),
        )

    def corners(self) -> np.ndarray:
        """World-space corner coordinates of the oriented footprint, (4, 2)."""
        hw, hl = self.footprint[0] / 2.0, self.footprint[1] / 2.0
        local = np.array([[-hw, -hl], [hw, -hl], [hw, hl], [-hw, hl]])
        c, s = np.cos(self.yaw), np.sin(self.yaw)
        rot = np.array([[c, -s], [s, c]])
        return local @ rot.T + np.array([self.x, self.y])


@dataclass
class OccupancyGrid:
    resolution: float
    labels: np.ndarray  # (ny, nx) uint8 of CellLabel values
    elevation: np.ndarray  # (ny, nx) float32 meters

    @property
    def shape(self) -> tuple:
        return self.labels.shape

    def cell_of(self, x: float, y: float) -> tuple:
        return int(y / self.resolution), int(x / self.resolution)

    def in_bounds_cell(self, row: int, col: int) -> bool:
        ny, nx = self.labels.shape
        return 0 <= row < ny and 0 <= col < nx


SCHEMA_VERSION = 1


@dataclass
class SceneDescription:
    spec: SceneSpec
    blocks: BlockGraph
    zones: ZoneMap
    terrain: TerrainGrid
    objects: list  # AssetInstance list
    routes: list  # candidate (start_xy, goal_xy) anchor pairs
    schema_version: int = SCHEMA_VERSION
    placement_overflow: bool = False
