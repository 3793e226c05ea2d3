"""Immutable undirected simple graphs and the generators used by the simulator.

Vertices are dense 0-based indices.  Storage is CSR (``indptr``/``indices``)
with each neighbor row strictly increasing, which gives O(deg) neighbor
iteration and cheap vectorized passes over all directed edges.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import coins


class EdgeListError(ValueError):
    """Malformed edge-list input; carries the 1-based offending line."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class Graph:
    """Undirected simple graph, immutable after construction.

    Safe to share read-only across threads; all arrays are marked
    non-writeable.
    """

    __slots__ = ("n", "m", "indptr", "indices", "_edges", "_masks")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] | np.ndarray,
                 validate: bool = True):
        if n < 1:
            raise ValueError("graph needs at least one vertex")
        e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                       dtype=np.int64)
        if e.size == 0:
            e = e.reshape(0, 2)
        if e.ndim != 2 or e.shape[1] != 2:
            raise ValueError("edges must be pairs")
        if validate and e.size:
            if e.min() < 0 or e.max() >= n:
                raise ValueError("edge endpoint out of range")
            if (e[:, 0] == e[:, 1]).any():
                raise ValueError("self-loops are not allowed")
        lo = np.minimum(e[:, 0], e[:, 1])
        hi = np.maximum(e[:, 0], e[:, 1])
        key = lo * n + hi
        order = np.argsort(key, kind="stable")
        key = key[order]
        if validate and key.size and (np.diff(key) == 0).any():
            raise ValueError("duplicate edge")
        lo, hi = lo[order], hi[order]

        self.n = int(n)
        self.m = int(lo.size)
        # Symmetric by construction: insert both directions, then bucket.
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        counts = np.bincount(src, minlength=n)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        order2 = np.lexsort((dst, src))
        self.indptr = indptr
        self.indices = dst[order2].astype(np.int32)
        self._edges = np.stack([lo, hi], axis=1)
        self._masks = None
        for a in (self.indptr, self.indices, self._edges):
            a.setflags(write=False)

    # -- queries ----------------------------------------------------------

    def degree(self, u: int) -> int:
        return int(self.indptr[u + 1] - self.indptr[u])

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        i = np.searchsorted(row, v)
        return bool(i < row.size and row[i] == v)

    def edges(self) -> np.ndarray:
        """(m, 2) array with u < v per row, lexicographically sorted."""
        return self._edges

    def neighbor_masks(self) -> list[int]:
        """Adjacency as Python-int bitmasks (cached; for subset enumeration)."""
        if self._masks is None:
            masks = [0] * self.n
            for u, v in self._edges:
                masks[u] |= 1 << int(v)
                masks[v] |= 1 << int(u)
            self._masks = masks
        return self._masks

    def check_invariants(self) -> None:
        """Raise AssertionError if any structural invariant is violated."""
        assert self.indptr[0] == 0 and self.indptr[-1] == self.indices.size
        assert self.indices.size == 2 * self.m
        for u in range(self.n):
            row = self.neighbors(u)
            assert (np.diff(row) > 0).all(), "neighbor row not strictly increasing"
            assert not (row == u).any(), "self-loop"
        # symmetry
        for u, v in self._edges:
            assert self.has_edge(int(v), int(u)) and self.has_edge(int(u), int(v))
        assert int(self.degrees.sum()) == 2 * self.m

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


# -- generators ------------------------------------------------------------


def gen_complete(n: int) -> Graph:
    """Complete graph on n >= 1 vertices."""
    if n < 1:
        raise ValueError("invalid size: n must be >= 1")
    if n == 1:
        return Graph(1, [])
    iu = np.triu_indices(n, k=1)
    return Graph(n, np.stack(iu, axis=1), validate=False)


def gen_gnp(n: int, p: float, seed: int) -> Graph:
    """Erdős–Rényi G(n, p), deterministic in (n, p, seed).

    Pairs are visited in lexicographic order (0,1), (0,2), ..., (n-2,n-1)
    with geometric gap-skipping, so generation is O(m) and the output is a
    pure function of the arguments.
    """
    if n < 1:
        raise ValueError("invalid size: n must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if p == 0.0 or n == 1:
        return Graph(n, [])
    if p == 1.0:
        return gen_complete(n)
    total = n * (n - 1) // 2
    lnq = math.log1p(-p)
    edges = []
    j = -1
    draw = 0
    row, row_start = 0, 0  # row u covers pair indices [row_start, row_start + n-1-u)
    while True:
        u01 = coins.unit_float(coins.word(seed, coins.STREAM_GNP, draw, 0))
        draw += 1
        gap = math.log(u01) / lnq
        if gap >= total:  # overshoots every remaining pair (may be inf)
            break
        j += 1 + int(gap)
        if j >= total:
            break
        while j >= row_start + (n - 1 - row):
            row_start += n - 1 - row
            row += 1
        edges.append((row, row + 1 + (j - row_start)))
    return Graph(n, edges, validate=False)


def gen_disjoint_cliques(count: int, size: int) -> Graph:
    """Disjoint union of ``count`` complete graphs on ``size`` vertices."""
    if count < 1 or size < 1:
        raise ValueError("invalid size: count and size must be >= 1")
    edges = []
    for c in range(count):
        base = c * size
        for i in range(size):
            for k in range(i + 1, size):
                edges.append((base + i, base + k))
    return Graph(count * size, edges, validate=False)


def gen_random_tree(n: int, seed: int) -> Graph:
    """Uniform random labeled tree on n vertices, deterministic in seed.

    Sampled by drawing a uniform sequence of length n-2 over the vertices
    and decoding it, which is a bijection onto labeled trees.
    """
    if n < 1:
        raise ValueError("invalid size: n must be >= 1")
    if n == 1:
        return Graph(1, [])
    if n == 2:
        return Graph(2, [(0, 1)])
    seq = [coins.uniform_below(seed, coins.STREAM_TREE, i, n) for i in range(n - 2)]
    deg = [1] * n
    for x in seq:
        deg[x] += 1
    import heapq

    leaves = [u for u in range(n) if deg[u] == 1]
    heapq.heapify(leaves)
    edges = []
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((min(leaf, x), max(leaf, x)))
        deg[x] -= 1
        if deg[x] == 1:
            heapq.heappush(leaves, x)
    u = heapq.heappop(leaves)
    v = heapq.heappop(leaves)
    edges.append((min(u, v), max(u, v)))
    return Graph(n, edges, validate=False)


# -- edge-list text format ---------------------------------------------------
#
# First line "n m"; then m lines "u v" with 0 <= u < v < n, whitespace
# separated decimal, newline terminated, no comments.


def load_edge_list(text: str) -> Graph:
    lines = text.splitlines()
    if not lines:
        raise EdgeListError("missing header", 1)
    head = lines[0].split()
    if len(head) != 2:
        raise EdgeListError("header must be 'n m'", 1)
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise EdgeListError("header must be two integers", 1) from None
    if n < 1 or m < 0:
        raise EdgeListError("header values out of range", 1)
    if len(lines) - 1 < m:
        raise EdgeListError(f"expected {m} edge lines, found {len(lines) - 1}",
                            len(lines) + 1)
    if len(lines) - 1 > m and any(s.strip() for s in lines[m + 1:]):
        raise EdgeListError("trailing content after last edge", m + 2)
    seen = set()
    edges = []
    for i in range(m):
        ln = i + 2
        parts = lines[i + 1].split()
        if len(parts) != 2:
            raise EdgeListError("edge line must be 'u v'", ln)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListError("edge endpoints must be integers", ln) from None
        if u == v:
            raise EdgeListError(f"self-loop at vertex {u}", ln)
        if not (0 <= u < v < n):
            raise EdgeListError(f"edge ({u}, {v}) violates 0 <= u < v < n", ln)
        if (u, v) in seen:
            raise EdgeListError(f"duplicate edge ({u}, {v})", ln)
        seen.add((u, v))
        edges.append((u, v))
    return Graph(n, edges, validate=False)


def dump_edge_list(g: Graph) -> str:
    out = [f"{g.n} {g.m}"]
    for u, v in g.edges():
        out.append(f"{u} {v}")
    return "\n".join(out) + "\n"


# -- structural queries ------------------------------------------------------


def common_neighbors(g: Graph, u: int, v: int) -> int:
    """|N(u) ∩ N(v)| for distinct valid vertices."""
    if u == v:
        raise ValueError("vertices must be distinct")
    if not (0 <= u < g.n and 0 <= v < g.n):
        raise ValueError("vertex out of range")
    return int(np.intersect1d(g.neighbors(u), g.neighbors(v),
                              assume_unique=True).size)


def diameter(g: Graph) -> float:
    """Max shortest-path length over vertex pairs; math.inf if disconnected."""
    best = 0
    for s in range(g.n):
        dist = _bfs(g, s)
        worst = dist.max()
        if worst < 0:
            return math.inf
        best = max(best, int(worst))
    return best


def _bfs(g: Graph, s: int) -> np.ndarray:
    """Distances from s; -1 marks unreachable (encoded as max in caller check)."""
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[s] = 0
    frontier = [s]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            for v in g.neighbors(u):
                v = int(v)
                if dist[v] < 0:
                    dist[v] = d
                    nxt.append(v)
        frontier = nxt
    if (dist < 0).any():
        dist[:] = -1  # signal disconnected via negative max
    return dist


def diameter_at_most_two(g: Graph):
    """(True, None) iff every pair is within distance 2; else (False, (u, v))."""
    masks = g.neighbor_masks()
    full = (1 << g.n) - 1
    for u in range(g.n):
        reach = masks[u] | (1 << u)
        m = masks[u]
        v = 0
        while m:
            if m & 1:
                reach |= masks[v]
            m >>= 1
            v += 1
        if reach != full:
            missing = ~reach & full
            w = (missing & -missing).bit_length() - 1
            return False, (u, w)
    return True, None


def induced_edge_count(g: Graph, members: np.ndarray) -> int:
    """Number of edges inside the vertex set given as a boolean mask."""
    e = g.edges()
    if e.size == 0:
        return 0
    return int((members[e[:, 0]] & members[e[:, 1]]).sum())


def induced_avg_degree(g: Graph, vertices: Sequence[int]) -> Fraction:
    """2|E(S)|/|S| as an exact rational; S must be nonempty."""
    verts = np.asarray(sorted(set(int(v) for v in vertices)), dtype=np.int64)
    if verts.size == 0:
        raise ValueError("vertex set must be nonempty")
    if verts.min() < 0 or verts.max() >= g.n:
        raise ValueError("vertex out of range")
    members = np.zeros(g.n, dtype=bool)
    members[verts] = True
    return Fraction(2 * induced_edge_count(g, members), int(verts.size))


# -- descriptor mini-language ------------------------------------------------
#
# "complete:n=64", "gnp:n=1024,p=0.05[,seed=7]", "cliques:count=8,size=8",
# "tree:n=256[,seed=7]", "file:<path>".  When a family needs a seed and none
# is given, ``default_seed`` is used.


def from_descriptor(desc: str, default_seed: int = 0) -> Graph:
    family, _, rest = desc.partition(":")
    family = family.strip()
    if family == "file":
        if not rest:
            raise ValueError("file descriptor needs a path")
        with open(rest, "r", encoding="utf-8") as fh:
            return load_edge_list(fh.read())
    kv = {}
    if rest:
        for item in rest.split(","):
            k, _, v = item.partition("=")
            if not _:
                raise ValueError(f"malformed descriptor item {item!r}")
            kv[k.strip()] = v.strip()
    try:
        if family == "complete":
            return gen_complete(int(kv["n"]))
        if family == "gnp":
            return gen_gnp(int(kv["n"]), float(kv["p"]),
                           int(kv.get("seed", default_seed)))
        if family == "cliques":
            return gen_disjoint_cliques(int(kv["count"]), int(kv["size"]))
        if family == "tree":
            return gen_random_tree(int(kv["n"]), int(kv.get("seed", default_seed)))
    except KeyError as exc:
        raise ValueError(f"descriptor {desc!r} missing key {exc}") from None
    raise ValueError(f"unknown graph family {family!r}")


def descriptor_token(desc: str) -> str:
    """Comma-free token form of a descriptor, safe for CSV fields."""
    return desc.replace(",", ";").replace(" ", "")
