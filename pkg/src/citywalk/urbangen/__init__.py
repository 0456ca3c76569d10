"""Procedural urban scene generation pipeline."""

from .blocks import connect_blocks, unmatched_interior_sockets
from .catalog import load_catalog, save_catalog
from .occupancy import export_occupancy, load_occupancy, rasterize_occupancy
from .placement import base_count, place_objects, PlacementResult
from .scene import (
    generate_scene,
    load_scene,
    save_scene,
    scene_from_json,
    scene_hash,
    scene_to_json,
    traverse_segment_mask,
)
from .terrain import (
    build_tile_set,
    elevation_at,
    generate_terrain_wfc,
    sample_terrain_param,
    PARAM_RANGES,
    TILE_SIZE_M,
)
from .types import (
    AssetInstance,
    BlockGraph,
    BlockKind,
    CatalogEntry,
    CellLabel,
    OccupancyGrid,
    SceneDescription,
    SceneSpec,
    Split,
    TaskKind,
    TerrainGrid,
    TerrainKind,
    Zone,
    ZoneMap,
)
from .zones import plan_ground, ZoneParams

__all__ = [
    "AssetInstance", "BlockGraph", "BlockKind", "CatalogEntry", "CellLabel",
    "OccupancyGrid", "PARAM_RANGES", "PlacementResult", "SceneDescription",
    "SceneSpec", "Split", "TILE_SIZE_M", "TaskKind", "TerrainGrid",
    "TerrainKind", "Zone", "ZoneMap", "ZoneParams", "base_count",
    "build_tile_set", "connect_blocks", "elevation_at", "export_occupancy",
    "generate_scene", "generate_terrain_wfc", "load_catalog", "load_occupancy",
    "load_scene", "place_objects", "plan_ground", "rasterize_occupancy",
    "sample_terrain_param", "save_catalog", "save_scene", "scene_from_json",
    "scene_hash", "scene_to_json", "traverse_segment_mask",
    "unmatched_interior_sockets",
]
