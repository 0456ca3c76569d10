"""Grid path planning: Dijkstra fields and A* on 8-connected lattices.

Diagonal moves cost sqrt(2) cells and are allowed only when both adjacent
orthogonal cells are passable, so paths never clip corners. Ties in A*
break on (f, h, row, col), making the returned cell sequence fully
deterministic.
"""

import heapq

import numpy as np

_SQRT2 = float(np.sqrt(2.0))
# (dr, dc, step cost in cells)
_MOVES = [
    (-1, 0, 1.0), (1, 0, 1.0), (0, -1, 1.0), (0, 1, 1.0),
    (-1, -1, _SQRT2), (-1, 1, _SQRT2), (1, -1, _SQRT2), (1, 1, _SQRT2),
]


def dijkstra_field(passable: np.ndarray, sources, resolution: float = 1.0) -> np.ndarray:
    """Geodesic distance (m) from the nearest source; inf where unreachable."""
    ny, nx = passable.shape
    dist = np.full((ny, nx), np.inf, dtype=np.float64)
    heap = []
    for (r, c) in sources:
        if 0 <= r < ny and 0 <= c < nx and passable[r, c]:
            dist[r, c] = 0.0
            heap.append((0.0, r, c))
    heapq.heapify(heap)
    while heap:
        d, r, c = heapq.heappop(heap)
        if d > dist[r, c]:
            continue
        for dr, dc, w in _MOVES:
            rr, cc = r + dr, c + dc
            if not (0 <= rr < ny and 0 <= cc < nx) or not passable[rr, cc]:
                continue
            if dr != 0 and dc != 0 and not (passable[r, cc] and passable[rr, c]):
                continue
            nd = d + w
            if nd < dist[rr, cc]:
                dist[rr, cc] = nd
                heapq.heappush(heap, (nd, rr, cc))
    return dist * resolution


def astar_path(passable: np.ndarray, start, goal, resolution: float = 1.0):
    """Shortest 8-connected path as a list of (row, col); None if unreachable."""
    ny, nx = passable.shape
    sr, sc = start
    gr, gc = goal
    if not (passable[sr, sc] and passable[gr, gc]):
        return None

    def h(r, c):
        dr, dc = abs(r - gr), abs(c - gc)
        return _SQRT2 * min(dr, dc) + abs(dr - dc)

    g = np.full((ny, nx), np.inf, dtype=np.float64)
    g[sr, sc] = 0.0
    parent = {}
    h0 = h(sr, sc)
    heap = [(h0, h0, sr, sc)]
    while heap:
        f, _, r, c = heapq.heappop(heap)
        if (r, c) == (gr, gc):
            path = [(r, c)]
            while (r, c) in parent:
                r, c = parent[(r, c)]
                path.append((r, c))
            return path[::-1]
        if f > g[r, c] + h(r, c) + 1e-12:
            continue
        for dr, dc, w in _MOVES:
            rr, cc = r + dr, c + dc
            if not (0 <= rr < ny and 0 <= cc < nx) or not passable[rr, cc]:
                continue
            if dr != 0 and dc != 0 and not (passable[r, cc] and passable[rr, c]):
                continue
            ng = g[r, c] + w
            if ng < g[rr, cc] - 1e-12:
                g[rr, cc] = ng
                parent[(rr, cc)] = (r, c)
                hh = h(rr, cc)
                heapq.heappush(heap, (ng + hh, hh, rr, cc))
    return None


def geodesic_field_sweep(passable: np.ndarray, sources, resolution: float = 1.0,
                         max_iters: int = 64) -> np.ndarray:
    """Exact 8-connected geodesic field by iterated directional sweeps.

    Same metric and corner rule as astar_path/dijkstra_field, but each
    pass is vectorized along rows (blocked cells carry +inf, which stops
    the running-min propagation), so large grids cost milliseconds.
    """
    ny, nx = passable.shape
    big = np.inf
    d = np.full((ny, nx), big)
    for (r, c) in sources:
        if 0 <= r < ny and 0 <= c < nx and passable[r, c]:
            d[r, c] = 0.0
    def _relax_row(row, mask_row):
        # Hillis-Steele doubling: d[i] = min(d[i], d[i -/+ 2^k] + 2^k),
        # a jump allowed only when the spanned interval is wall-free
        out = np.where(mask_row, row, big)
        wallcount = np.cumsum(~mask_row)
        step = 1
        while step < nx:
            free = wallcount[step:] - wallcount[:-step] == 0  # walls in (i-step, i]
            cand = np.full(nx, big)
            cand[step:] = np.where(free, out[:-step] + step, big)
            out = np.minimum(out, np.where(mask_row, cand, big))
            cand = np.full(nx, big)
            cand[:-step] = np.where(free, out[step:] + step, big)
            out = np.minimum(out, np.where(mask_row, cand, big))
            step *= 2
        return out

    def _pull(prev_d, prev_pass, cur_pass):
        # candidates from the neighboring row: straight and both diagonals
        # with the corner rule (both orthogonal cells passable)
        cand = prev_d + 1.0
        diag_l = np.full(nx, big)
        diag_l[1:] = prev_d[:-1] + _SQRT2
        okl = np.zeros(nx, dtype=bool)
        okl[1:] = prev_pass[1:] & cur_pass[:-1]
        diag_l[~okl] = big
        diag_r = np.full(nx, big)
        diag_r[:-1] = prev_d[1:] + _SQRT2
        okr = np.zeros(nx, dtype=bool)
        okr[:-1] = prev_pass[:-1] & cur_pass[1:]
        diag_r[~okr] = big
        return np.minimum(cand, np.minimum(diag_l, diag_r))

    for _ in range(max_iters):
        before = d.copy()
        for r in range(ny):
            if r > 0:
                d[r] = np.minimum(d[r], _pull(d[r - 1], passable[r - 1], passable[r]))
            d[r] = _relax_row(d[r], passable[r])
        for r in range(ny - 2, -1, -1):
            d[r] = np.minimum(d[r], _pull(d[r + 1], passable[r + 1], passable[r]))
            d[r] = _relax_row(d[r], passable[r])
        if np.array_equal(before, d):
            break
    return d * resolution


def descend_field(field: np.ndarray, passable: np.ndarray, start,
                  resolution: float = 1.0, max_steps: int = 64):
    """Greedy shortest-path descent of a geodesic field from start.

    Each move minimizes field[n] + step_cost (the total route length when
    passing through n), ties broken in the fixed move order, which yields
    a deterministic optimal cell sequence on an exact field.
    """
    ny, nx = field.shape
    r, c = start
    if not (0 <= r < ny and 0 <= c < nx) or not np.isfinite(field[r, c]):
        return None
    path = [(r, c)]
    for _ in range(max_steps):
        if field[r, c] <= 0.0:
            break
        best = None
        best_key = np.inf
        for dr, dc, w in _MOVES:
            rr, cc = r + dr, c + dc
            if not (0 <= rr < ny and 0 <= cc < nx) or not passable[rr, cc]:
                continue
            if dr != 0 and dc != 0 and not (passable[r, cc] and passable[rr, c]):
                continue
            key = field[rr, cc] + w * resolution
            if key < best_key - 1e-12:
                best_key = key
                best = (rr, cc)
        # an optimal move keeps field[n] + cost == field[cur] on exact fields
        if best is None or best_key > field[r, c] + 1e-6:
            break
        r, c = best
        path.append((r, c))
    return path


def path_length_m(path, resolution: float) -> float:
    if path is None or len(path) < 2:
        return 0.0
    arr = np.asarray(path, dtype=np.float64)
    return float(np.sqrt(((arr[1:] - arr[:-1]) ** 2).sum(axis=1)).sum() * resolution)
