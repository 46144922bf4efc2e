"""Undirected graphs with self-inclusive neighborhoods.

Adjacency is stored CSR-style (``indptr``/``indices``), symmetric, sorted per
row, with no explicit self-edges. The self term of a neighborhood is added
analytically by consumers, so ``degrees`` returns ``len(adj(i)) + 1``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp


class GraphFormatError(ValueError):
    """Raised when an edge-list file cannot be parsed."""


@dataclass(frozen=True, eq=False)
class Graph:
    n: int
    indptr: np.ndarray
    indices: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def edge_count(self) -> int:
        return int(self.indices.size // 2)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    @property
    def adjacency(self) -> list[list[int]]:
        return [self.neighbors(i).tolist() for i in range(self.n)]

    def adjacency_matrix(self) -> sp.csr_matrix:
        """0/1 adjacency without self-loops (cached)."""
        if "adj" not in self._cache:
            data = np.ones(self.indices.size, dtype=np.float64)
            self._cache["adj"] = sp.csr_matrix(
                (data, self.indices, self.indptr), shape=(self.n, self.n))
        return self._cache["adj"]

    def edges(self) -> np.ndarray:
        """Undirected edges as an (E, 2) array with u < v."""
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        keep = rows < self.indices
        return np.column_stack([rows[keep], self.indices[keep]])

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Return the graph with node ``i`` renamed to ``perm[i]``."""
        perm = np.asarray(perm)
        e = self.edges()
        return from_edges(self.n, perm[e] if e.size else e)


def from_edges(n: int, edges: Iterable[Sequence[int]] | np.ndarray) -> Graph:
    """Build a symmetrized, deduplicated graph; self-edges are dropped."""
    if n < 1:
        raise ValueError("graph must have at least one node")
    e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                   dtype=np.int64).reshape(-1, 2)
    if e.size and (e.min() < 0 or e.max() >= n):
        raise ValueError(f"edge endpoint out of range for n={n}")
    e = e[e[:, 0] != e[:, 1]]
    both = np.concatenate([e, e[:, ::-1]])
    m = sp.csr_matrix((np.ones(len(both), dtype=np.int8), (both[:, 0], both[:, 1])),
                      shape=(n, n))
    m.sum_duplicates()
    m.sort_indices()
    return Graph(n=n, indptr=m.indptr.astype(np.int64),
                 indices=m.indices.astype(np.int64))


def load_edge_list(path: str | Path) -> Graph:
    """Read a whitespace-delimited ``u v`` edge list.

    Lines starting with ``#`` are comments. An optional ``n=<int>`` line fixes
    the node count so trailing isolated nodes survive.
    """
    n_header = None
    pairs = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("n="):
                try:
                    n_header = int(line[2:])
                except ValueError:
                    raise GraphFormatError(f"{path}:{lineno}: bad node-count header {line!r}")
                continue
            tok = line.split()
            if len(tok) != 2:
                raise GraphFormatError(f"{path}:{lineno}: expected two integers, got {line!r}")
            try:
                u, v = int(tok[0]), int(tok[1])
            except ValueError:
                raise GraphFormatError(f"{path}:{lineno}: expected two integers, got {line!r}")
            if u < 0 or v < 0:
                raise GraphFormatError(f"{path}:{lineno}: negative node id")
            pairs.append((u, v))
    n = max((max(p) for p in pairs), default=-1) + 1
    if n_header is not None:
        if n_header < n:
            raise GraphFormatError(f"{path}: header n={n_header} but node id {n - 1} present")
        n = n_header
    if n == 0:
        raise GraphFormatError(f"{path}: empty graph")
    return from_edges(n, pairs)


def save_edge_list(g: Graph, path: str | Path) -> None:
    with open(path, "w") as fh:
        fh.write(f"n={g.n}\n")
        for u, v in g.edges():
            fh.write(f"{u} {v}\n")


def degrees(g: Graph) -> np.ndarray:
    """d_i = |N_i| with i in N_i, so an isolated node has degree 1."""
    return np.diff(g.indptr) + 1


def hop_ball(g: Graph, center: int, k: int) -> np.ndarray:
    """Sorted ids of all nodes within ``k`` BFS hops of ``center``."""
    if not 0 <= center < g.n:
        raise IndexError(f"center {center} out of range for n={g.n}")
    if k < 0:
        raise ValueError("k must be non-negative")
    dist = {center: 0}
    queue = deque([center])
    while queue:
        u = queue.popleft()
        if dist[u] == k:
            continue
        for v in g.neighbors(u):
            v = int(v)
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return np.array(sorted(dist), dtype=np.int64)


def bfs_distances(g: Graph, source: int) -> np.ndarray:
    """Hop distance from ``source``; -1 marks unreachable nodes."""
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in g.neighbors(u):
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(int(v))
    return dist


def node_set(members: Iterable[int], n: int) -> np.ndarray:
    """Validate and canonicalize an attack set / candidate pool."""
    s = np.unique(np.asarray(list(members), dtype=np.int64))
    if s.size and (s[0] < 0 or s[-1] >= n):
        raise IndexError(f"node id out of range for n={n}")
    return s
