"""Dual (row) graphs, block components and exact treedepth.

Vertex sets are int bitmasks throughout; treedepth follows the recursion
td(G) = 1 for a single vertex, the max over connected components, and
1 + min over vertex deletions for connected graphs, memoized per subset
of surviving vertices.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import IntMatrix

DEFAULT_TD_LIMIT = 20


class SizeLimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class RowGraph:
    n: int
    adj: tuple  # adj[v] is the bitmask of neighbours of v

    @classmethod
    def from_edges(cls, n: int, edges) -> "RowGraph":
        adj = [0] * n
        for u, v in edges:
            if u == v:
                continue
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return cls(n, tuple(adj))

    def edges(self) -> list:
        return [(u, v) for u in range(self.n) for v in range(u + 1, self.n) if self.adj[u] >> v & 1]

    def adjacent(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def induced(self, vertices) -> "RowGraph":
        vertices = list(vertices)
        index = {v: i for i, v in enumerate(vertices)}
        edges = [(index[u], index[v]) for u, v in self.edges() if u in index and v in index]
        return RowGraph.from_edges(len(vertices), edges)


def dual_graph(a: IntMatrix) -> RowGraph:
    """Rows are adjacent when some column is non-zero in both."""
    adj = [0] * a.k
    for j in range(a.n_cols):
        mask = 0
        for i, r in enumerate(a.rows):
            if r[j]:
                mask |= 1 << i
        m = mask
        while m:
            low = m & -m
            i = low.bit_length() - 1
            adj[i] |= mask & ~low
            m ^= low
    return RowGraph(a.k, tuple(adj))


def _components(adj, mask: int) -> list:
    comps = []
    rest = mask
    while rest:
        start = rest & -rest
        comp = frontier = start
        while frontier:
            low = frontier & -frontier
            frontier ^= low
            new = adj[low.bit_length() - 1] & mask & ~comp
            comp |= new
            frontier |= new
        comps.append(comp)
        rest &= ~comp
    return comps


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class Block:
    rows: tuple
    cols: tuple
    matrix: IntMatrix


@dataclass(frozen=True)
class BlockDecomposition:
    blocks: tuple
    free_cols: tuple  # all-zero columns, outside every block

    def __len__(self):
        return len(self.blocks)


def block_components(a: IntMatrix) -> BlockDecomposition:
    """Finest block-diagonal split: connected components of the dual graph.

    Blocks are ordered by their smallest row; all-zero columns go to
    ``free_cols``. An all-zero row forms a block with an empty column tuple
    whose matrix is a single zero column.
    """
    g = dual_graph(a)
    blocks = []
    for comp in sorted(_components(g.adj, (1 << a.k) - 1), key=lambda c: (c & -c)):
        rows = tuple(_bits(comp))
        cols = tuple(j for j in range(a.n_cols) if any(a.rows[i][j] for i in rows))
        if cols:
            mat = IntMatrix.from_rows([[a.rows[i][j] for j in cols] for i in rows])
        else:
            mat = IntMatrix.zeros(len(rows), 1)
        blocks.append(Block(rows, cols, mat))
    free = tuple(j for j in range(a.n_cols) if not any(r[j] for r in a.rows))
    return BlockDecomposition(tuple(blocks), free)


@dataclass(frozen=True)
class EliminationForest:
    parent: tuple  # parent[v] or None for roots

    @property
    def height(self) -> int:
        depth = {}

        def d(v):
            if v not in depth:
                p = self.parent[v]
                depth[v] = 1 if p is None else d(p) + 1
            return depth[v]

        return max((d(v) for v in range(len(self.parent))), default=0)

    def ancestors(self, v: int) -> set:
        out = set()
        p = self.parent[v]
        while p is not None:
            if p in out:
                raise ValueError("parent map contains a cycle")
            out.add(p)
            p = self.parent[p]
        return out

    def is_valid_for(self, g: RowGraph) -> bool:
        if len(self.parent) != g.n:
            return False
        try:
            anc = [self.ancestors(v) for v in range(g.n)]
        except ValueError:
            return False
        return all(u in anc[v] or v in anc[u] for u, v in g.edges())

    def to_json(self) -> list:
        return [-1 if p is None else p for p in self.parent]


def _path_lower_bound(adj, mask: int) -> int:
    """ceil(log2(L + 1)) for a path with L vertices inside mask.

    The path starts at the far end of a BFS sweep and is extended greedily,
    always stepping to the neighbour with the fewest unvisited neighbours.
    """
    start = (mask & -mask).bit_length() - 1
    seen = frontier = 1 << start
    far = start
    while True:
        nxt = 0
        for v in _bits(frontier):
            nxt |= adj[v]
        nxt &= mask & ~seen
        if not nxt:
            break
        seen |= nxt
        frontier = nxt
        far = (nxt & -nxt).bit_length() - 1
    used = 1 << far
    length = 1
    v = far
    while True:
        options = adj[v] & mask & ~used
        if not options:
            break
        v = min(_bits(options), key=lambda w: (bin(adj[w] & mask & ~used).count("1"), w))
        used |= 1 << v
        length += 1
    return length.bit_length()


def _separator_height(adj, mask: int) -> int:
    """Height of a greedy forest that always removes the vertex leaving the
    smallest largest component; an upper bound on treedepth."""
    worst = 0
    for comp in _components(adj, mask):
        if comp & (comp - 1) == 0:
            worst = max(worst, 1)
            continue
        best_u, best_size = None, None
        for u in _bits(comp):
            size = max(bin(c).count("1") for c in _components(adj, comp & ~(1 << u)))
            if best_size is None or size < best_size:
                best_u, best_size = u, size
        worst = max(worst, 1 + _separator_height(adj, comp & ~(1 << best_u)))
    return worst


def treedepth_exact(g: RowGraph, limit: int = DEFAULT_TD_LIMIT):
    """Exact treedepth and an elimination forest of that height.

    Branch and bound over the deletion recursion: a query with a bound
    returns the exact value when it is below the bound and otherwise some
    lower bound that is at least the bound. Roots are tried in index order
    and replaced only on strict improvement, so among optimal roots of a
    connected piece the lowest vertex index wins.
    """
    if g.n > limit:
        raise SizeLimitExceeded(f"{g.n} vertices exceed the treedepth limit {limit}")
    if g.n == 0:
        return 0, EliminationForest(())
    adj = g.adj
    exact = {}  # connected mask -> (td, root)
    lower = {}  # connected mask -> proven lower bound

    def solve_set(mask: int, bound: int) -> int:
        comps = sorted(_components(adj, mask), key=lambda c: -bin(c).count("1"))
        worst = 0
        for c in comps:
            v = solve_connected(c, bound)
            if v >= bound:
                return v
            worst = max(worst, v)
        return worst

    def solve_connected(mask: int, bound: int) -> int:
        hit = exact.get(mask)
        if hit is not None:
            return hit[0]
        if mask & (mask - 1) == 0:
            exact[mask] = (1, mask.bit_length() - 1)
            return 1
        lb = lower.get(mask)
        if lb is None:
            lb = max(2, _path_lower_bound(adj, mask))
            lower[mask] = lb
        if lb >= bound:
            return lb
        best, root = bound, None
        for u in _bits(mask):
            v = 1 + solve_set(mask & ~(1 << u), best - 1)
            if v < best:
                best, root = v, u
                if best == lb:
                    break
        if root is None:
            lower[mask] = max(lb, bound)
            return lower[mask]
        exact[mask] = (best, root)
        return best

    full = (1 << g.n) - 1
    height = solve_set(full, _separator_height(adj, full) + 1)
    parent = [None] * g.n

    def build(mask: int, above: Optional[int]):
        for comp in _components(adj, mask):
            solve_connected(comp, g.n + 1)
            root = exact[comp][1]
            parent[root] = above
            rest = comp & ~(1 << root)
            if rest:
                build(rest, root)

    build(full, None)
    forest = EliminationForest(tuple(parent))
    assert forest.height == height
    return height, forest


def dual_treedepth(a: IntMatrix, limit: int = DEFAULT_TD_LIMIT):
    g = dual_graph(a)
    height, forest = treedepth_exact(g, limit)
    if not forest.is_valid_for(g):
        raise AssertionError("elimination forest misses an edge of the dual graph")
    return height, forest
