"""Slow, straight-line reference implementations used only by the tests.

Nothing here imports the package's algorithms; each oracle works from the
raw edge list so agreement means two independent routes agree.
"""
from __future__ import annotations

import itertools
from collections import deque

import numpy as np


def dense_adjacency(n, edges):
    a = np.zeros((n, n))
    for u, v in edges:
        if u != v:
            a[u, v] = a[v, u] = 1.0
    return a


def dense_transition(n, edges):
    a = dense_adjacency(n, edges) + np.eye(n)
    return a / a.sum(axis=1, keepdims=True)


def dense_power(n, edges, L):
    return np.linalg.matrix_power(dense_transition(n, edges), L)


def all_pairs_paths(n, edges):
    """Distance and shortest-path counts from each source by plain BFS."""
    adj = [set() for _ in range(n)]
    for u, v in edges:
        if u != v:
            adj[u].add(v)
            adj[v].add(u)
    dist = np.full((n, n), -1)
    count = np.zeros((n, n))
    for s in range(n):
        dist[s, s] = 0
        count[s, s] = 1
        q = deque([s])
        while q:
            u = q.popleft()
            for w in sorted(adj[u]):
                if dist[s, w] < 0:
                    dist[s, w] = dist[s, u] + 1
                    q.append(w)
                if dist[s, w] == dist[s, u] + 1:
                    count[s, w] += count[s, u]
    return dist, count


def naive_betweenness(n, edges):
    """Sum over unordered pairs (s, t) of the share of s-t geodesics through v."""
    dist, count = all_pairs_paths(n, edges)
    bc = np.zeros(n)
    for s, t in itertools.combinations(range(n), 2):
        if dist[s, t] < 0:
            continue
        for v in range(n):
            if v in (s, t) or dist[s, v] < 0 or dist[v, t] < 0:
                continue
            if dist[s, v] + dist[v, t] == dist[s, t]:
                bc[v] += count[s, v] * count[v, t] / count[s, t]
    return bc


def k_hop(n, edges, center, k):
    dist, _ = all_pairs_paths(n, edges)
    return {v for v in range(n) if 0 <= dist[center, v] <= k}


def reference_gc_rwcs(n, edges, q, r, m, k, static_scores):
    """Dense, literal version of the greedy corrected column-sum loop.

    Recomputes every column sum from scratch each round. When every pool
    node scores zero it falls back to the highest static score.
    """
    q = np.array(q, dtype=np.int64)
    deg = dense_adjacency(n, edges).sum(axis=1) + 1
    pool = {i for i in range(n) if deg[i] <= m}
    picked = []
    while len(picked) < r and pool:
        sums = q.sum(axis=0)
        best = max(pool, key=lambda i: (sums[i], -i))
        if sums[best] == 0:
            best = max(pool, key=lambda i: (float(f"{static_scores[i]:.12g}"), -i))
        picked.append(best)
        pool -= k_hop(n, edges, best, k)
        for row in range(n):
            if q[row, best] == 1:
                q[row, :] = 0
    return picked


def greedy_max_coverage(covers, candidates, r):
    """Classic greedy: repeatedly take the candidate covering most new items."""
    covered: set = set()
    chosen = []
    cands = set(candidates)
    for _ in range(r):
        if not cands:
            break
        best = max(cands, key=lambda c: (len(covers[c] - covered), -c))
        if not covers[best] - covered:
            break
        chosen.append(best)
        covered |= covers[best]
        cands.discard(best)
    return chosen


def central_difference(f, x, h=1e-6):
    grad = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        old = x[idx]
        x[idx] = old + h
        up = f(x)
        x[idx] = old - h
        down = f(x)
        x[idx] = old
        grad[idx] = (up - down) / (2 * h)
    return grad


def random_edges(rng, n, p):
    return [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]


def random_connected_edges(rng, n, p):
    """A random spanning tree plus Erdos-Renyi extras."""
    edges = {(int(rng.integers(i)), i) for i in range(1, n)}
    edges |= set(random_edges(rng, n, p))
    return sorted(edges)
