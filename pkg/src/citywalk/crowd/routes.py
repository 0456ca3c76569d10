"""Start/goal route sampling for crowd agents on the occupancy grid."""

from collections import deque

import numpy as np

from ..errors import NoRouteAvailable
from ..urbangen.types import CellLabel
from .types import AgentKind, RADIUS_OF_KIND

_NEIGH8 = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1))


def connected_components(ok: np.ndarray) -> np.ndarray:
    """8-connected component id per passable cell (-1 elsewhere)."""
    ny, nx = ok.shape
    comp = np.full((ny, nx), -1, dtype=np.int32)
    next_id = 0
    for r0, c0 in zip(*np.nonzero(ok)):
        if comp[r0, c0] >= 0:
            continue
        comp[r0, c0] = next_id
        dq = deque([(int(r0), int(c0))])
        while dq:
            r, c = dq.popleft()
            for dr, dc in _NEIGH8:
                rr, cc = r + dr, c + dc
                if 0 <= rr < ny and 0 <= cc < nx and ok[rr, cc] and comp[rr, cc] < 0:
                    comp[rr, cc] = next_id
                    dq.append((rr, cc))
        next_id += 1
    return comp


def sample_routes(occupancy, count: int, seed: int, kind: AgentKind = AgentKind.PEDESTRIAN,
                  region_mask=None, max_radius: float | None = None) -> list:
    """Sample `count` connected (start, goal) pairs on the grid.

    Pedestrian-kind agents route on Walkable cells; vehicle kinds
    (cyclist, scooter) may also use Roadway. Start points keep a pairwise
    separation of at least twice the largest agent radius; connectivity
    follows from start and goal sharing an 8-connected component (the
    geodesic is never shorter than the Euclidean separation).
    Deterministic in seed.
    """
    if count == 0:
        return []
    rng = np.random.Generator(np.random.PCG64(seed))
    res = occupancy.resolution
    labels = occupancy.labels
    if kind == AgentKind.PEDESTRIAN:
        ok = labels == int(CellLabel.WALKABLE)
    else:
        ok = (labels == int(CellLabel.WALKABLE)) | (labels == int(CellLabel.ROADWAY))
    if region_mask is not None:
        ok = ok & region_mask
    rows, cols = np.nonzero(ok)
    if rows.size < count:
        raise NoRouteAvailable(f"only {rows.size} candidate cells for {count} routes")
    comp = connected_components(ok)
    comp_ids = comp[rows, cols]
    xs = (cols + 0.5) * res
    ys = (rows + 0.5) * res

    radius = max_radius if max_radius is not None else RADIUS_OF_KIND[kind]
    min_sep = 2.0 * radius
    routes = []
    starts = []
    order = rng.permutation(rows.size)
    for idx in order:
        if len(routes) >= count:
            break
        sx, sy = float(xs[idx]), float(ys[idx])
        if any((sx - ox) ** 2 + (sy - oy) ** 2 < min_sep ** 2 for ox, oy in starts):
            continue
        same = comp_ids == comp_ids[idx]
        far = (xs - sx) ** 2 + (ys - sy) ** 2 >= min_sep ** 2
        cand = np.flatnonzero(same & far)
        if cand.size == 0:
            continue
        j = int(cand[int(rng.integers(cand.size))])
        routes.append((np.array([sx, sy]), np.array([float(xs[j]), float(ys[j])])))
        starts.append((sx, sy))
    if len(routes) < count:
        raise NoRouteAvailable(
            f"could only sample {len(routes)} of {count} routes with separation {min_sep}")
    return routes
