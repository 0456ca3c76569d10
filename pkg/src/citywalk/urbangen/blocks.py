"""Street block sampling and connection.

Blocks are fixed-size square templates whose road stubs ("sockets") sit at
edge midpoints, so two adjacent blocks connect exactly when both or neither
of the facing edges carry a socket. Sampling walks the grid row-major,
drawing a (kind, orientation) compatible with the already-placed north and
west neighbors; a disconnected road network triggers a restart, and after
bounded retries a known-connected comb layout is used.
"""

from collections import deque

from ..rng import make_rng
from .types import (
    BlockGraph,
    BlockKind,
    BlockNode,
    DIR_E,
    DIR_N,
    DIR_S,
    DIR_W,
    rotated_sockets,
)

_ALL_KINDS = list(BlockKind)
_MAX_RESTARTS = 16

# (kind, orientation) -> socket tuple, precomputed once.
_VARIANTS = [
    (kind, o, rotated_sockets(kind, o)) for kind in _ALL_KINDS for o in range(4)
]


def connect_blocks(seed: int, grid_extent: tuple) -> BlockGraph:
    """Sample a socket-consistent, road-connected block grid."""
    rows, cols = grid_extent
    if rows < 1 or cols < 1:
        raise ValueError("grid_extent components must be >= 1")

    for attempt in range(_MAX_RESTARTS):
        rng = make_rng(seed, "blocks", attempt)
        nodes = _sample_grid(rng, rows, cols)
        graph = _assemble(rows, cols, nodes)
        if _road_connected(graph):
            return graph
    return _assemble(rows, cols, _comb_layout(rows, cols))


def _sample_grid(rng, rows, cols):
    nodes = []
    for r in range(rows):
        for c in range(cols):
            need_n = nodes[(r - 1) * cols + c].sockets[DIR_S] if r > 0 else None
            need_w = nodes[r * cols + c - 1].sockets[DIR_E] if c > 0 else None
            options = [
                (kind, o, socks)
                for kind, o, socks in _VARIANTS
                if (need_n is None or socks[DIR_N] == need_n)
                and (need_w is None or socks[DIR_W] == need_w)
            ]
            kind, o, socks = options[int(rng.integers(len(options)))]
            nodes.append(BlockNode(kind=kind, cell=(r, c), orientation=o, sockets=socks))
    return nodes


def _comb_layout(rows, cols):
    """Connected fallback: a spine of intersections feeding straight columns."""
    nodes = []
    for r in range(rows):
        for c in range(cols):
            if r == 0 and cols > 1:
                kind, o = BlockKind.INTERSECTION, 0
            else:
                kind, o = BlockKind.STRAIGHT, 0
            nodes.append(
                BlockNode(kind=kind, cell=(r, c), orientation=o, sockets=rotated_sockets(kind, o))
            )
    return nodes


def _assemble(rows, cols, nodes) -> BlockGraph:
    edges = []
    capped = []
    for r in range(rows):
        for c in range(cols):
            socks = nodes[r * cols + c].sockets
            if socks[DIR_E]:
                if c + 1 < cols:
                    edges.append(((r, c), (r, c + 1)))
                else:
                    capped.append(((r, c), DIR_E))
            if socks[DIR_S]:
                if r + 1 < rows:
                    edges.append(((r, c), (r + 1, c)))
                else:
                    capped.append(((r, c), DIR_S))
            if socks[DIR_N] and r == 0:
                capped.append(((r, c), DIR_N))
            if socks[DIR_W] and c == 0:
                capped.append(((r, c), DIR_W))
    return BlockGraph(rows=rows, cols=cols, nodes=nodes, edges=edges, capped=capped)


def _road_connected(graph: BlockGraph) -> bool:
    """True when matched sockets link every block into one component."""
    if graph.rows * graph.cols == 1:
        return True
    adj = {}
    for a, b in graph.edges:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    cells = [(r, c) for r in range(graph.rows) for c in range(graph.cols)]
    seen = {cells[0]}
    queue = deque([cells[0]])
    while queue:
        cur = queue.popleft()
        for nxt in adj.get(cur, ()):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return len(seen) == len(cells)


def unmatched_interior_sockets(graph: BlockGraph) -> int:
    """Count interior edge pairs where socket presence disagrees."""
    bad = 0
    for r in range(graph.rows):
        for c in range(graph.cols):
            socks = graph.node_at(r, c).sockets
            if c + 1 < graph.cols and socks[DIR_E] != graph.node_at(r, c + 1).sockets[DIR_W]:
                bad += 1
            if r + 1 < graph.rows and socks[DIR_S] != graph.node_at(r + 1, c).sockets[DIR_N]:
                bad += 1
    return bad
