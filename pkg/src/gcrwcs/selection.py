"""Attack-set selection under a node budget r and degree cap m.

``select_top_r`` covers every static score (degree, PageRank, betweenness,
random, RWCS); ``gc_rwcs`` is the greedily corrected iterative procedure over
the binarized walk matrix.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .centrality import ScoreVector
from .graph import Graph, degrees, hop_ball
from .walks import BinaryWalkMatrix, rwcs_scores, snap_ties

POOL_EXHAUSTED = "candidate pool exhausted before r picks"
FALLBACK_STATIC = "all adaptive scores reached zero; remaining picks use static RWCS order"


class EmptyPoolError(ValueError):
    pass


@dataclass(frozen=True)
class SelectionConstraints:
    r: int
    m: int
    k: int = 1

    def __post_init__(self):
        if self.r < 1 or self.m < 1 or self.k < 0:
            raise ValueError(f"invalid constraints {self}")


@dataclass
class Selection:
    method: str
    nodes: list[int]
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({"method": self.method, "nodes": self.nodes,
                           "warnings": self.warnings})

    @classmethod
    def from_json(cls, text: str) -> "Selection":
        d = json.loads(text)
        return cls(d["method"], list(d["nodes"]), list(d.get("warnings", [])))


def degree_threshold(g: Graph, percent: float) -> int:
    """Lowest degree among the top ``percent`` % highest-degree nodes."""
    if not 0 < percent <= 100:
        raise ValueError("percent must lie in (0, 100]")
    d = np.sort(degrees(g))[::-1]
    # small slack so 20% of 5 nodes is exactly one node despite float rounding
    top = max(1, math.ceil(percent * g.n / 100.0 - 1e-9))
    return int(d[top - 1])


def candidate_pool(g: Graph, m: int) -> np.ndarray:
    return np.flatnonzero(degrees(g) <= m)


def _rank(values: np.ndarray, ids: np.ndarray) -> np.ndarray:
    """``ids`` ordered by descending value, ascending id on ties."""
    return ids[np.lexsort((ids, -snap_ties(values[ids])))]


def select_top_r(scores: ScoreVector | np.ndarray, g: Graph,
                 c: SelectionConstraints) -> Selection:
    values = np.asarray(getattr(scores, "values", scores), dtype=np.float64)
    tag = getattr(scores, "method_tag", "scores")
    if len(values) != g.n:
        raise ValueError(f"score length {len(values)} != n={g.n}")
    pool = candidate_pool(g, c.m)
    if pool.size == 0:
        raise EmptyPoolError(f"no node has degree <= {c.m}")
    picked = _rank(values, pool)[:c.r]
    warnings = [POOL_EXHAUSTED] if len(picked) < c.r else []
    return Selection(tag, picked.tolist(), warnings)


def gc_rwcs(g: Graph, mb: BinaryWalkMatrix, c: SelectionConstraints) -> Selection:
    """Iterative column-sum selection with row zeroing and k-hop exclusion.

    Each round takes the candidate with the largest column sum of Q, removes
    every candidate within k hops of it, and zeroes each row of Q that has a
    one in the chosen column. Column sums are maintained incrementally.
    """
    if mb.n != g.n:
        raise ValueError("binary walk matrix does not match graph size")
    q = mb.q
    qc = q.tocsc()
    col = np.asarray(q.sum(axis=0)).ravel().astype(np.int64)
    alive = np.ones(g.n, dtype=bool)
    in_pool = degrees(g) <= c.m
    if not in_pool.any():
        raise EmptyPoolError(f"no node has degree <= {c.m}")
    static = None
    picked: list[int] = []
    warnings: list[str] = []
    for _ in range(c.r):
        if not in_pool.any():
            warnings.append(POOL_EXHAUSTED)
            break
        masked = np.where(in_pool, col, -1)
        z = int(np.argmax(masked))
        if masked[z] == 0:
            if static is None:
                static = rwcs_scores(g, max(mb.L, 1))
                warnings.append(FALLBACK_STATIC)
            ids = np.flatnonzero(in_pool)
            z = int(_rank(static, ids)[0])
        picked.append(z)
        in_pool[hop_ball(g, z, c.k)] = False
        rows = qc.indices[qc.indptr[z]:qc.indptr[z + 1]]
        rows = rows[alive[rows]]
        if rows.size:
            alive[rows] = False
            hit = np.concatenate([q.indices[q.indptr[i]:q.indptr[i + 1]] for i in rows])
            col -= np.bincount(hit, minlength=g.n)
    return Selection("gc-rwcs", picked, warnings)
