"""Occupancy rasterization and binary export.

The occupancy grid is the shared substrate for dynamics, observation, and
metrics: one label and one elevation per cell. Labels derive from zones;
any cell under an object footprint becomes an obstacle.
"""

import json
import os

import numpy as np

from ..jsonio import canonical_dumps
from .placement import footprint_cells
from .terrain import elevation_at
from .types import CellLabel, OccupancyGrid, Zone, ZONE_TO_LABEL

# PGM pixel value per label
PGM_ENCODING = {
    CellLabel.OBSTACLE: 0,
    CellLabel.NON_WALKABLE_GROUND: 85,
    CellLabel.ROADWAY: 170,
    CellLabel.WALKABLE: 255,
}
_PGM_DECODING = {v: k for k, v in PGM_ENCODING.items()}


def rasterize_occupancy(scene, resolution: float | None = None) -> OccupancyGrid:
    """Rasterize a SceneDescription to labels + elevation at cell centers."""
    if resolution is None:
        resolution = scene.spec.grid_resolution_m
    if resolution <= 0:
        raise ValueError("resolution must be > 0")
    w, l = scene.spec.extent_m
    nx = int(np.ceil(w / resolution))
    ny = int(np.ceil(l / resolution))

    zone_res = scene.zones.resolution
    zg = scene.zones.grid
    zy, zx = zg.shape
    rr = np.minimum((np.arange(ny) + 0.5) * resolution / zone_res, zy - 1).astype(np.int64)
    cc = np.minimum((np.arange(nx) + 0.5) * resolution / zone_res, zx - 1).astype(np.int64)
    zones = zg[rr[:, None], cc[None, :]]

    labels = np.empty((ny, nx), dtype=np.uint8)
    for z in Zone:
        labels[zones == int(z)] = int(ZONE_TO_LABEL[z])

    for inst in scene.objects:
        orows, ocols = footprint_cells(inst, resolution, (ny, nx))
        labels[orows, ocols] = int(CellLabel.OBSTACLE)

    xs = (np.arange(nx) + 0.5) * resolution
    ys = (np.arange(ny) + 0.5) * resolution
    gx, gy = np.meshgrid(xs, ys)
    elevation = elevation_at(scene.terrain, gx, gy).astype(np.float32)
    return OccupancyGrid(resolution=float(resolution), labels=labels, elevation=elevation)


def export_occupancy(grid: OccupancyGrid, path_prefix: str):
    """Write <prefix>.pgm, <prefix>.elev.f32, and <prefix>.json sidecar."""
    ny, nx = grid.labels.shape
    lut = np.zeros(256, dtype=np.uint8)
    for label, pix in PGM_ENCODING.items():
        lut[int(label)] = pix
    pixels = lut[grid.labels]
    pgm_path = path_prefix + ".pgm"
    with open(pgm_path, "wb") as fh:
        fh.write(f"P5\n{nx} {ny}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())

    elev_path = path_prefix + ".elev.f32"
    with open(elev_path, "wb") as fh:
        fh.write(grid.elevation.astype("<f4").tobytes())

    sidecar = {
        "resolution": grid.resolution,
        "origin": [0.0, 0.0],
        "elevation_file": os.path.basename(elev_path),
        "width": nx,
        "height": ny,
    }
    with open(path_prefix + ".json", "w", encoding="utf-8") as fh:
        fh.write(canonical_dumps(sidecar))
        fh.write("\n")
    return pgm_path


def load_occupancy(path_prefix: str) -> OccupancyGrid:
    with open(path_prefix + ".json", "r", encoding="utf-8") as fh:
        sidecar = json.load(fh)
    with open(path_prefix + ".pgm", "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"P5":
            raise ValueError("not a binary PGM")
        dims = fh.readline().split()
        nx, ny = int(dims[0]), int(dims[1])
        fh.readline()  # maxval
        pixels = np.frombuffer(fh.read(nx * ny), dtype=np.uint8).reshape(ny, nx)
    labels = np.zeros((ny, nx), dtype=np.uint8)
    for pix, label in _PGM_DECODING.items():
        labels[pixels == pix] = int(label)
    elev_file = os.path.join(os.path.dirname(path_prefix) or ".", sidecar["elevation_file"])
    elevation = np.frombuffer(open(elev_file, "rb").read(), dtype="<f4").reshape(ny, nx)
    return OccupancyGrid(resolution=float(sidecar["resolution"]), labels=labels,
                         elevation=elevation.copy())
