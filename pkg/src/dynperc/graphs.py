"""Finite simple connected graphs with stable vertex and edge indexing.

Vertices are 0..n-1; edges get ids 0..m-1 in a constructor-deterministic
order so that edge-indexed environments are reproducible across runs.
Graphs are immutable after construction and safe to share between workers.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np


class GraphError(ValueError):
    """Invalid graph construction input."""


class LoopEdge(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class Disconnected(GraphError):
    pass


class OutOfRange(GraphError):
    pass


@dataclass(frozen=True)
class Graph:
    """Undirected simple connected graph.

    edges[i] is the unordered pair with edge id i, stored as (min, max).
    adjacency[v] lists (neighbor, edge id) pairs in edge-id order.
    """

    n: int
    edges: tuple
    adjacency: tuple
    degrees: tuple
    transitive: bool = field(default=False, compare=False)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_id(self, u: int, v: int) -> int:
        for w, eid in self.adjacency[u]:
            if w == v:
                return eid
        raise OutOfRange(f"no edge {{{u},{v}}}")

    def neighbor_arrays(self):
        """Flat CSR-style arrays (offsets, neighbors, edge_ids) for kernels."""
        offsets = np.zeros(self.n + 1, dtype=np.int64)
        for v in range(self.n):
            offsets[v + 1] = offsets[v] + self.degrees[v]
        nbrs = np.empty(offsets[-1], dtype=np.int64)
        eids = np.empty(offsets[-1], dtype=np.int64)
        for v in range(self.n):
            for k, (w, e) in enumerate(self.adjacency[v]):
                nbrs[offsets[v] + k] = w
                eids[offsets[v] + k] = e
        return offsets, nbrs, eids


def _assemble(n: int, pairs, transitive: bool = False) -> Graph:
    seen = set()
    edges = []
    for u, v in pairs:
        if not (0 <= u < n and 0 <= v < n):
            raise OutOfRange(f"edge ({u},{v}) outside 0..{n - 1}")
        if u == v:
            raise LoopEdge(f"self-loop at {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise DuplicateEdge(f"duplicate edge {key}")
        seen.add(key)
        edges.append(key)
    adjacency = [[] for _ in range(n)]
    for eid, (u, v) in enumerate(edges):
        adjacency[u].append((v, eid))
        adjacency[v].append((u, eid))
    if not _connected(n, adjacency):
        raise Disconnected("graph is not connected")
    return Graph(
        n=n,
        edges=tuple(edges),
        adjacency=tuple(tuple(a) for a in adjacency),
        degrees=tuple(len(a) for a in adjacency),
        transitive=transitive,
    )


def _connected(n: int, adjacency) -> bool:
    if n == 0:
        return False
    seen = [False] * n
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        v = queue.popleft()
        for w, _ in adjacency[v]:
            if not seen[w]:
                seen[w] = True
                count += 1
                queue.append(w)
    return count == n


def build_from_edges(n: int, pairs) -> Graph:
    """Graph from an explicit edge list; edge ids follow input order."""
    return _assemble(n, list(pairs))


def _index_to_coords(v: int, n: int, d: int):
    coords = []
    for _ in range(d):
        coords.append(v % n)
        v //= n
    return coords


def _coords_to_index(coords, n: int) -> int:
    v = 0
    for c in reversed(coords):
        v = v * n + c
    return v


def build_torus(n: int, d: int) -> Graph:
    """Discrete torus (Z_n)^d, 2d-regular for n >= 3.

    n = 2 would create doubled edges; those collapse to single edges, so the
    result is the hypercube {0,1}^d. Edge ids are lexicographic on endpoint
    pairs.
    """
    if n < 2:
        raise GraphError("torus side length must be >= 2")
    if d < 1:
        raise GraphError("torus dimension must be >= 1")
    size = n**d
    pairs = set()
    for v in range(size):
        coords = _index_to_coords(v, n, d)
        for axis in range(d):
            w_coords = list(coords)
            w_coords[axis] = (w_coords[axis] + 1) % n
            w = _coords_to_index(w_coords, n)
            if w != v:
                pairs.add((min(v, w), max(v, w)))
    return _assemble(size, sorted(pairs), transitive=True)


def build_hypercube(d: int) -> Graph:
    """Hypercube {0,1}^d: 2^d vertices, d * 2^(d-1) edges, d-regular."""
    if d < 1:
        raise GraphError("hypercube dimension must be >= 1")
    pairs = set()
    for v in range(2**d):
        for axis in range(d):
            w = v ^ (1 << axis)
            pairs.add((min(v, w), max(v, w)))
    return _assemble(2**d, sorted(pairs), transitive=True)


def cycle(n: int) -> Graph:
    """Cycle C_n (n >= 3)."""
    if n < 3:
        raise GraphError("cycle needs n >= 3")
    return build_torus(n, 1)


def path(n: int) -> Graph:
    """Path P_n on n vertices."""
    if n < 2:
        raise GraphError("path needs n >= 2")
    return build_from_edges(n, [(i, i + 1) for i in range(n - 1)])


def star(leaves: int) -> Graph:
    """Star K_{1,leaves} with center 0."""
    if leaves < 1:
        raise GraphError("star needs >= 1 leaf")
    return build_from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def complete(n: int) -> Graph:
    """Complete graph K_n."""
    if n < 2:
        raise GraphError("complete graph needs n >= 2")
    g = _assemble(n, [(i, j) for i in range(n) for j in range(i + 1, n)])
    return Graph(g.n, g.edges, g.adjacency, g.degrees, transitive=True)


def stationary_distribution(g: Graph) -> np.ndarray:
    """Degree-biased distribution pi(x) = deg(x) / (2|E|)."""
    deg = np.asarray(g.degrees, dtype=float)
    return deg / (2.0 * g.n_edges)


def bfs_distances(g: Graph, source: int) -> np.ndarray:
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w, _ in g.adjacency[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def diameter(g: Graph) -> int:
    return max(int(bfs_distances(g, v).max()) for v in range(g.n))


def is_vertex_transitive(g: Graph) -> bool:
    """Certified flag, else a heuristic check.

    The heuristic requires degree-regularity and, for every vertex v, an
    automorphism mapping 0 -> v (found by backtracking; exact on the small
    graphs this package targets, but quadratic-exponential in the worst case).
    """
    if g.transitive:
        return True
    if len(set(g.degrees)) != 1:
        return False
    return all(_automorphism_exists(g, 0, v) for v in range(1, g.n))


def _automorphism_exists(g: Graph, a: int, b: int) -> bool:
    mapping = {a: b}
    used = {b}

    neighbor_sets = [frozenset(w for w, _ in g.adjacency[v]) for v in range(g.n)]

    # order vertices by BFS from a so each new vertex has a mapped neighbor
    order = [a]
    seen = {a}
    for v in order:
        for w, _ in g.adjacency[v]:
            if w not in seen:
                seen.add(w)
                order.append(w)

    def backtrack(i):
        if i == g.n:
            return True
        v = order[i]
        anchors = [w for w in neighbor_sets[v] if w in mapping]
        candidates = set(range(g.n)) - used
        for w in anchors:
            candidates &= neighbor_sets[mapping[w]]
        for c in sorted(candidates):
            if g.degrees[c] != g.degrees[v]:
                continue
            mapping[v] = c
            used.add(c)
            if _consistent(g, neighbor_sets, mapping, v) and backtrack(i + 1):
                return True
            del mapping[v]
            used.discard(c)
        return False

    return backtrack(1)


def _consistent(g, neighbor_sets, mapping, v) -> bool:
    for w in neighbor_sets[v]:
        if w in mapping:
            if mapping[w] not in neighbor_sets[mapping[v]]:
                return False
    return True


def read_edge_list(text: str) -> Graph:
    """Parse the edge-list format: first line "n m", then m lines "u v"."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise GraphError("empty edge-list input")
    try:
        n, m = (int(tok) for tok in lines[0].split())
    except ValueError as exc:
        raise GraphError(f"bad header line {lines[0]!r}") from exc
    if len(lines) - 1 != m:
        raise GraphError(f"expected {m} edge lines, got {len(lines) - 1}")
    pairs = []
    for ln in lines[1:]:
        try:
            u, v = (int(tok) for tok in ln.split())
        except ValueError as exc:
            raise GraphError(f"bad edge line {ln!r}") from exc
        pairs.append((u, v))
    return build_from_edges(n, pairs)
