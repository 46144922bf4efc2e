"""Random-walk transition matrix, L-step powers and column-sum scores."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graph import Graph, degrees

DENSE_CAP = 50_000


class CapacityError(RuntimeError):
    pass


def transition_matrix(g: Graph) -> sp.csr_matrix:
    """Row-stochastic M with M_ij = 1/d_i for j in N_i (self included)."""
    if "M" not in g._cache:
        a = g.adjacency_matrix() + sp.identity(g.n, format="csr")
        d = degrees(g).astype(np.float64)
        m = sp.diags(1.0 / d) @ a
        m = sp.csr_matrix(m)
        m.sort_indices()
        g._cache["M"] = m
    return g._cache["M"]


def rwcs_scores(g: Graph, L: int = 4) -> np.ndarray:
    """Column sums of M^L, i.e. ones^T M^L, via L sparse vector products."""
    if L < 1:
        raise ValueError("L must be >= 1")
    mt = transition_matrix(g).T.tocsr()
    v = np.ones(g.n)
    for _ in range(L):
        v = mt @ v
    return v


def walk_power_rows(g: Graph, rows: np.ndarray, L: int) -> np.ndarray:
    """Dense rows ``rows`` of M^L, shape (len(rows), n)."""
    m = transition_matrix(g)
    block = m[rows].toarray()
    mt = m.T.tocsr()
    for _ in range(L - 1):
        block = (mt @ block.T).T
    return np.ascontiguousarray(block)


def walk_power_dense(g: Graph, L: int, cap: int = DENSE_CAP) -> np.ndarray:
    """Materialize M^L as a dense n x n array."""
    if L < 1:
        raise ValueError("L must be >= 1")
    if g.n > cap:
        raise CapacityError(
            f"n={g.n} exceeds dense cap {cap}; use rwcs_scores or the blocked "
            "binary_walk_matrix instead of a full dense power")
    return walk_power_rows(g, np.arange(g.n), L)


@dataclass(frozen=True)
class BinaryWalkMatrix:
    """Top-l binarization of M^L stored as a sparse 0/1 matrix."""
    q: sp.csr_matrix
    L: int
    l: int

    @property
    def n(self) -> int:
        return self.q.shape[0]

    def row(self, i: int) -> np.ndarray:
        return self.q.indices[self.q.indptr[i]:self.q.indptr[i + 1]]

    def column_sums(self) -> np.ndarray:
        return np.asarray(self.q.sum(axis=0)).ravel()

    def toarray(self) -> np.ndarray:
        return self.q.toarray()


def snap_ties(values: np.ndarray) -> np.ndarray:
    """Round to 12 significant digits so float noise cannot break exact ties."""
    v = np.asarray(values, dtype=np.float64)
    mag = np.floor(np.log10(np.abs(v), out=np.zeros_like(v), where=v != 0))
    scale = 10.0 ** (11 - mag)
    return np.round(v * scale) / scale


def _topl_mask(p: np.ndarray, l: int) -> np.ndarray:
    """Boolean mask of the l largest positive entries per row, low index wins ties."""
    p = snap_ties(p)
    n_rows, n_cols = p.shape
    if l >= n_cols:
        return p > 0
    kth = -np.partition(-p, l - 1, axis=1)[:, l - 1]
    above = p > kth[:, None]
    tied = p == kth[:, None]
    room = l - above.sum(axis=1)
    take_tied = tied & (np.cumsum(tied, axis=1) <= room[:, None])
    return (above | take_tied) & (p > 0)


def binarize_topl(p: np.ndarray, l: int, L: int = 0) -> BinaryWalkMatrix:
    if l < 1:
        raise ValueError("l must be >= 1")
    p = np.atleast_2d(np.asarray(p, dtype=np.float64))
    q = sp.csr_matrix(_topl_mask(p, l).astype(np.int8))
    q.sort_indices()
    return BinaryWalkMatrix(q=q, L=L, l=l)


def binary_walk_matrix(g: Graph, L: int = 4, l: int = 30, block: int = 1024) -> BinaryWalkMatrix:
    """Binarized M^L built in row blocks so only ``block * n`` floats live at once."""
    if L < 1 or l < 1:
        raise ValueError("L and l must be >= 1")
    parts = []
    for start in range(0, g.n, block):
        rows = np.arange(start, min(start + block, g.n))
        parts.append(sp.csr_matrix(_topl_mask(walk_power_rows(g, rows, L), l).astype(np.int8)))
    q = sp.vstack(parts, format="csr")
    q.sort_indices()
    return BinaryWalkMatrix(q=q, L=L, l=l)


def save_scores_csv(scores: np.ndarray, path) -> None:
    with open(path, "w") as fh:
        fh.write("node_id,score\n")
        for i, s in enumerate(scores):
            fh.write(f"{i},{float(s)!r}\n")


def load_scores_csv(path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    out = np.empty(len(data))
    out[data[:, 0].astype(int)] = data[:, 1]
    return out
