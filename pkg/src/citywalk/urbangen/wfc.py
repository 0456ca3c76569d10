"""Wave function collapse over an arbitrary finite tile set.

The solver is tile-set agnostic: callers provide boolean adjacency
matrices per direction. Collapse order is minimum remaining options with
ties broken by lowest (row, col); a contradiction restarts the whole
lattice on a reseeded stream, and exhausting the restart budget raises
ContradictionAfterRetries.
"""

import numpy as np

from ..errors import ContradictionAfterRetries
from ..rng import make_rng

# Direction indices into the adjacency tensor: a tile B may sit in that
# direction of tile A iff allowed[d, A, B].
WFC_N, WFC_E, WFC_S, WFC_W = 0, 1, 2, 3
_STEPS = {WFC_N: (-1, 0), WFC_E: (0, 1), WFC_S: (1, 0), WFC_W: (0, -1)}
_FLIP = {WFC_N: WFC_S, WFC_E: WFC_W, WFC_S: WFC_N, WFC_W: WFC_E}

DEFAULT_RESTARTS = 16


def collapse(
    n_tiles: int,
    allowed: np.ndarray,
    weights,
    shape: tuple,
    seed: int,
    domains: np.ndarray | None = None,
    max_restarts: int = DEFAULT_RESTARTS,
) -> np.ndarray:
    """Collapse a (rows, cols) lattice to tile indices.

    allowed: bool array (4, n_tiles, n_tiles) per WFC_N/E/S/W.
    weights: per-tile sampling weights (>= 0, at least one > 0 per domain).
    domains: optional bool (rows, cols, n_tiles) pre-restriction
             (boundary conditions); never mutated.
    """
    rows, cols = shape
    allowed = np.asarray(allowed, dtype=bool)
    weights = np.asarray(weights, dtype=float)
    if domains is None:
        domains = np.ones((rows, cols, n_tiles), dtype=bool)

    for attempt in range(max_restarts):
        rng = make_rng(seed, "wfc", attempt)
        result = _try_collapse(allowed, weights, domains.copy(), rng)
        if result is not None:
            return result
    raise ContradictionAfterRetries(
        f"no valid tiling found in {max_restarts} restarts on {rows}x{cols} lattice"
    )


def _try_collapse(allowed, weights, dom, rng):
    rows, cols, n = dom.shape
    if not _propagate_all(allowed, dom):
        return None
    while True:
        counts = dom.sum(axis=2)
        open_mask = counts > 1
        if not open_mask.any():
            if (counts == 1).all():
                return dom.argmax(axis=2).astype(np.int32)
            return None
        # minimum-entropy cell, ties by lowest (row, col)
        masked = np.where(open_mask, counts, n + 1)
        flat = int(masked.argmin())
        r, c = divmod(flat, cols)
        options = np.flatnonzero(dom[r, c])
        w = weights[options]
        total = w.sum()
        if total <= 0:
            w = np.ones(len(options))
            total = float(len(options))
        pick = options[int(rng.choice(len(options), p=w / total))]
        dom[r, c, :] = False
        dom[r, c, pick] = True
        if not _propagate_from(allowed, dom, [(r, c)]):
            return None


def _propagate_all(allowed, dom):
    rows, cols, _ = dom.shape
    return _propagate_from(allowed, dom, [(r, c) for r in range(rows) for c in range(cols)])


def _propagate_from(allowed, dom, seeds):
    """Arc-consistency sweep from the seed cells; False on a wiped domain."""
    rows, cols, n = dom.shape
    queue = list(seeds)
    in_queue = set(seeds)
    while queue:
        r, c = queue.pop()
        in_queue.discard((r, c))
        here = dom[r, c]
        if not here.any():
            return False
        for d, (dr, dc) in _STEPS.items():
            nr, nc = r + dr, c + dc
            if not (0 <= nr < rows and 0 <= nc < cols):
                continue
            # tiles allowed in the neighbor given some supporter here
            support = allowed[d][here].any(axis=0)
            before = dom[nr, nc]
            after = before & support
            if not after.any():
                return False
            if (after != before).any():
                dom[nr, nc] = after
                if (nr, nc) not in in_queue:
                    queue.append((nr, nc))
                    in_queue.add((nr, nc))
    return True


def is_valid_tiling(grid: np.ndarray, allowed: np.ndarray) -> bool:
    """Check every adjacent pair against the adjacency tensor."""
    rows, cols = grid.shape
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols and not allowed[WFC_E, grid[r, c], grid[r, c + 1]]:
                return False
            if r + 1 < rows and not allowed[WFC_S, grid[r, c], grid[r + 1, c]]:
                return False
    return True


def symmetrize(allowed: np.ndarray) -> np.ndarray:
    """Force the E/W and N/S matrices to describe the same relation."""
    out = allowed.copy()
    out[WFC_W] = out[WFC_E].T
    out[WFC_N] = out[WFC_S].T
    return out
