"""Constant feature perturbation: top-J sign vector and its application."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Epsilon:
    values: np.ndarray
    j_count: int
    lam: float

    def scaled(self, lam: float) -> "Epsilon":
        """Same support and signs at magnitude ``lam``."""
        return Epsilon(np.sign(self.values) * lam, self.j_count, lam)


def build_epsilon(importance, j_frac: float = 0.02, lam: float = 1.0,
                  j_count: int | None = None) -> Epsilon:
    """lam * sign(importance) on the J largest-|importance| coordinates.

    J = floor(j_frac * D) unless ``j_count`` is given. Zero-importance
    coordinates are skipped, so fewer than J entries may be set.
    """
    imp = np.asarray(importance, dtype=np.float64).ravel()
    if lam <= 0:
        raise ValueError("lam must be positive")
    if not 0 < j_frac <= 1:
        raise ValueError("j_frac must lie in (0, 1]")
    if not np.any(imp):
        raise ValueError("importance vector is all zero; no direction to perturb")
    J = math.floor(j_frac * imp.size + 1e-9) if j_count is None else int(j_count)
    order = np.lexsort((np.arange(imp.size), -np.abs(imp)))
    chosen = [j for j in order if imp[j] != 0][:J]
    eps = np.zeros(imp.size)
    eps[chosen] = lam * np.sign(imp[chosen])
    return Epsilon(eps, len(chosen), float(lam))


def apply_tau(x: np.ndarray, s, e: Epsilon | np.ndarray) -> np.ndarray:
    """Copy of ``x`` with ``eps`` added to every row in ``s``."""
    eps = np.asarray(getattr(e, "values", e), dtype=np.float64)
    if x.shape[1] != eps.size:
        raise ValueError(f"feature width {x.shape[1]} != epsilon length {eps.size}")
    s = np.asarray(list(s) if not isinstance(s, np.ndarray) else s, dtype=np.int64)
    if s.size and (s.min() < 0 or s.max() >= x.shape[0]):
        raise IndexError("attack node out of range")
    out = np.array(x, dtype=np.float64, copy=True)
    out[np.unique(s)] += eps
    return out


def save_vector_csv(v, path) -> None:
    np.savetxt(path, np.asarray(v, dtype=np.float64).reshape(-1, 1), delimiter=",", fmt="%.17g")


def load_vector_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=1).ravel()
