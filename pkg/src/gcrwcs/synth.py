"""Synthetic benchmark: Barabasi-Albert graph, |Gaussian| features, sigmoid labels."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

from .graph import Graph, from_edges


@dataclass(frozen=True)
class SynthSpec:
    n: int = 3000
    attach: int = 2
    d_features: int = 10
    seed: int = 0
    w_scale: float = 1.0
    n_important: int = 2
    important_boost: float = 3.0

    def __post_init__(self):
        if not self.n > self.attach >= 1:
            raise ValueError("need n > attach >= 1")
        if self.d_features < 1:
            raise ValueError("d_features must be >= 1")
        if not 0 <= self.n_important <= self.d_features:
            raise ValueError("n_important must lie in [0, d_features]")


@dataclass
class SynthData:
    graph: Graph
    x: np.ndarray
    y: np.ndarray
    w: np.ndarray
    important: list[int]

    def disclosed_importance(self) -> np.ndarray:
        """Direction an attacker with coarse domain knowledge would push.

        Only the disclosed coordinates are nonzero. The sign pushes the
        majority class toward the minority one: -w when class 1 dominates.
        """
        flip = -1.0 if self.y.mean() >= 0.5 else 1.0
        imp = np.zeros_like(self.w)
        imp[self.important] = flip * self.w[self.important]
        return imp

    def sidecar(self) -> dict:
        return {"w": self.w.tolist(), "important_features": list(self.important)}


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def barabasi_albert(spec: SynthSpec, rng=None) -> Graph:
    """Preferential attachment grown from a complete graph on ``attach`` nodes.

    Each new node links to ``attach`` distinct existing nodes drawn with
    probability proportional to their current (edge) degree.
    """
    rng = _rng(spec.seed if rng is None else rng)
    a = spec.attach
    edges = [(i, j) for i in range(a) for j in range(i + 1, a)]
    # every edge endpoint appears once per incident edge: sampling from this
    # list is degree-proportional
    ends: list[int] = [v for e in edges for v in e]
    for new in range(a, spec.n):
        if ends:
            targets: set[int] = set()
            while len(targets) < a:
                targets.add(ends[rng.integers(len(ends))])
        else:
            targets = set(range(a))
        for t in sorted(targets):
            edges.append((t, new))
            ends.extend((t, new))
    return from_edges(spec.n, edges)


def _draw_weights(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    """Zero-sum label weights with a block of large-magnitude coordinates.

    Every column of X has the same positive mean, so sign((A+I) X w) is
    nearly constant unless sum(w) = 0. The background and the important
    block are centered separately; important signs alternate so the block
    stays large after centering.
    """
    w = rng.normal(0.0, spec.w_scale, spec.d_features)
    w -= w.mean()
    k = spec.n_important
    if k:
        imp = rng.choice(spec.d_features, k, replace=False)
        mags = spec.important_boost * spec.w_scale * (1.0 + 0.5 * np.abs(rng.standard_normal(k)))
        block = mags * np.where(np.arange(k) % 2 == 0, 1.0, -1.0)
        w[imp] += block - block.mean()
    return w


def synth_features_labels(g: Graph, spec: SynthSpec, rng=None, max_tries: int = 10,
                          w: np.ndarray | None = None):
    """Features X = |N(0, I)|, labels y = [sigmoid((A+I) X w) > 0.5].

    Returns (x, y, w, important). ``w`` is redrawn while labels are all one
    class; a caller-fixed ``w`` that yields one class raises immediately.
    """
    rng = _rng(spec.seed + 1 if rng is None else rng)
    x = np.abs(rng.standard_normal((g.n, spec.d_features)))
    ax = g.adjacency_matrix() @ x + x
    for _ in range(max_tries if w is None else 1):
        if w is None:
            ww = _draw_weights(spec, rng)
        else:
            ww = np.asarray(w, dtype=np.float64)
        logits = ax @ ww
        y = (expit(logits) > 0.5).astype(np.int64)
        if 0 < y.sum() < g.n:
            order = np.lexsort((np.arange(ww.size), -np.abs(ww)))
            important = sorted(int(j) for j in order[:spec.n_important])
            return x, y, ww, important
    raise RuntimeError(f"labels collapsed to a single class after {max_tries} draws of w")


def make_synthetic(spec: SynthSpec) -> SynthData:
    ss = np.random.SeedSequence(spec.seed)
    g_rng, f_rng = (np.random.default_rng(s) for s in ss.spawn(2))
    g = barabasi_albert(spec, g_rng)
    x, y, w, important = synth_features_labels(g, spec, f_rng)
    return SynthData(g, x, y, w, important)


def write_synthetic(data: SynthData, spec: SynthSpec, out_dir: str | Path) -> dict:
    from .gcn import save_features_csv, save_labels
    from .graph import save_edge_list
    from .perturb import save_vector_csv

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "graph": out / "edges.txt",
        "features": out / "features.csv",
        "labels": out / "labels.txt",
        "importance": out / "importance.csv",
        "sidecar": out / "synth.json",
    }
    save_edge_list(data.graph, paths["graph"])
    save_features_csv(data.x, paths["features"])
    save_labels(data.y, paths["labels"])
    save_vector_csv(data.disclosed_importance(), paths["importance"])
    side = {"spec": asdict(spec), **data.sidecar()}
    paths["sidecar"].write_text(json.dumps(side, indent=2))
    return {k: str(v) for k, v in paths.items()}
