"""A small numpy GCN: forward, manual backprop, Adam training, attack metrics.

Layer l computes H_l = act(P H_{l-1} W_l) where P is the normalized
self-inclusive propagation matrix (mean: D^-1 (A+I); symmetric:
D^-1/2 (A+I) D^-1/2). Hidden layers use ReLU, the output layer is linear.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .graph import Graph, degrees
from .perturb import Epsilon, apply_tau

WEIGHTS_FORMAT = "gcrwcs-gcn-weights"
WEIGHTS_VERSION = 1


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int, loss: float):
        super().__init__(f"loss became non-finite ({loss}) at epoch {epoch}")
        self.epoch = epoch


@dataclass(frozen=True)
class GcnConfig:
    layers: int = 2
    hidden: int = 32
    normalization: str = "symmetric"
    learning_rate: float = 0.01
    epochs: int = 200
    weight_decay: float = 5e-4
    patience: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.layers < 1 or self.hidden < 1:
            raise ValueError("layers and hidden must be >= 1")
        if self.normalization not in ("mean", "symmetric"):
            raise ValueError(f"unknown normalization {self.normalization!r}")


@dataclass
class SplitSpec:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    seed: int | None = None

    @property
    def n(self) -> int:
        return len(self.train)

    def to_json(self) -> str:
        return json.dumps({
            "seed": self.seed,
            "train": np.flatnonzero(self.train).tolist(),
            "val": np.flatnonzero(self.val).tolist(),
            "test": np.flatnonzero(self.test).tolist(),
            "n": self.n,
        })

    @classmethod
    def from_json(cls, text: str) -> "SplitSpec":
        d = json.loads(text)
        masks = []
        for key in ("train", "val", "test"):
            m = np.zeros(d["n"], dtype=bool)
            m[d[key]] = True
            masks.append(m)
        return cls(*masks, seed=d.get("seed"))


def random_split(n: int, seed, fractions=(0.6, 0.2, 0.2)) -> SplitSpec:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_train = int(round(fractions[0] * n))
    n_val = int(round(fractions[1] * n))
    masks = [np.zeros(n, dtype=bool) for _ in range(3)]
    masks[0][perm[:n_train]] = True
    masks[1][perm[n_train:n_train + n_val]] = True
    masks[2][perm[n_train + n_val:]] = True
    return SplitSpec(*masks, seed=seed if isinstance(seed, int) else None)


@dataclass
class GcnModel:
    weights: list[np.ndarray]
    config: GcnConfig
    trained_on: dict = field(default_factory=dict)

    @property
    def n_classes(self) -> int:
        return self.weights[-1].shape[1]

    def save(self, path: str | Path) -> None:
        payload = {
            "format": WEIGHTS_FORMAT,
            "version": WEIGHTS_VERSION,
            "config": asdict(self.config),
            "trained_on": self.trained_on,
            "weights": [w.tolist() for w in self.weights],
        }
        Path(path).write_text(json.dumps(payload))

    @classmethod
    def load(cls, path: str | Path) -> "GcnModel":
        d = json.loads(Path(path).read_text())
        if d.get("format") != WEIGHTS_FORMAT or d.get("version") != WEIGHTS_VERSION:
            raise ValueError(f"{path}: not a version-{WEIGHTS_VERSION} GCN weight file")
        return cls([np.asarray(w, dtype=np.float64) for w in d["weights"]],
                   GcnConfig(**d["config"]), d.get("trained_on", {}))


def propagation_matrix(g: Graph, normalization: str) -> sp.csr_matrix:
    key = ("P", normalization)
    if key not in g._cache:
        a = g.adjacency_matrix() + sp.identity(g.n, format="csr")
        d = degrees(g).astype(np.float64)
        if normalization == "mean":
            p = sp.diags(1.0 / d) @ a
        elif normalization == "symmetric":
            s = sp.diags(1.0 / np.sqrt(d))
            p = s @ a @ s
        else:
            raise ValueError(f"unknown normalization {normalization!r}")
        g._cache[key] = sp.csr_matrix(p)
    return g._cache[key]


def glorot_init(dims: list[int], rng: np.random.Generator) -> list[np.ndarray]:
    out = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        out.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
    return out


def _forward_cache(weights, p, x):
    """Per-layer propagated inputs and pre-activations needed for backprop."""
    h = x
    cache = []
    for idx, w in enumerate(weights):
        ph = p @ h
        z = ph @ w
        cache.append((ph, z))
        h = np.maximum(z, 0.0) if idx < len(weights) - 1 else z
    return h, cache


def forward(model: GcnModel, g: Graph, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (g.n, model.weights[0].shape[0]):
        raise ValueError(f"features {x.shape} do not match graph n={g.n}, "
                         f"D={model.weights[0].shape[0]}")
    p = propagation_matrix(g, model.config.normalization)
    return _forward_cache(model.weights, p, x)[0]


def _mask(mask, n):
    if mask is None:
        return np.ones(n, dtype=bool)
    mask = np.asarray(mask)
    if mask.dtype != bool:
        m = np.zeros(n, dtype=bool)
        m[mask] = True
        return m
    return mask


def predict(h: np.ndarray) -> np.ndarray:
    # np.argmax returns the first maximum: ties go to the lower class index
    return np.argmax(h, axis=1)


def cw_loss(h, y, mask=None) -> float:
    """Sum over masked nodes of (max logit - true-class logit)."""
    h = np.asarray(h, dtype=np.float64)
    y = np.asarray(y)
    m = _mask(mask, len(y))
    hm, ym = h[m], y[m]
    return float(np.sum(hm.max(axis=1) - hm[np.arange(len(ym)), ym]))


def _log_softmax(h):
    shifted = h - h.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def cross_entropy_loss(h, y, mask=None) -> float:
    """Mean softmax cross-entropy over masked nodes."""
    h = np.asarray(h, dtype=np.float64)
    y = np.asarray(y)
    m = _mask(mask, len(y))
    if not m.any():
        return 0.0
    ls = _log_softmax(h[m])
    return float(-ls[np.arange(m.sum()), y[m]].mean())


def accuracy(h, y, mask=None) -> float:
    y = np.asarray(y)
    m = _mask(mask, len(y))
    if not m.any():
        return float("nan")
    return float(np.mean(predict(h[m]) == y[m]))


def _loss_grad_logits(h, y, mask, kind):
    n, k = h.shape
    m = _mask(mask, n)
    grad = np.zeros_like(h)
    idx = np.flatnonzero(m)
    if kind == "ce":
        if idx.size == 0:
            return 0.0, grad
        ls = _log_softmax(h[idx])
        probs = np.exp(ls)
        probs[np.arange(idx.size), y[idx]] -= 1.0
        grad[idx] = probs / idx.size
        return float(-ls[np.arange(idx.size), y[idx]].mean()), grad
    if kind == "cw":
        top = predict(h[idx])
        grad[idx, top] += 1.0
        grad[idx, y[idx]] -= 1.0
        return cw_loss(h, y, m), grad
    raise ValueError(f"unknown loss kind {kind!r}")


def _backward(weights, p, x, y, mask, kind):
    """Loss, weight gradients and feature gradient by reverse-mode sweep."""
    h, cache = _forward_cache(weights, p, x)
    loss, dz = _loss_grad_logits(h, np.asarray(y), mask, kind)
    grads, dx = _sweep(weights, p, cache, dz)
    return loss, grads, dx


def _sweep(weights, p, cache, dz):
    pt = p.T.tocsr()
    grads = [None] * len(weights)
    for idx in range(len(weights) - 1, -1, -1):
        ph, z = cache[idx]
        if idx < len(weights) - 1:
            dz = dz * (z > 0)
        grads[idx] = ph.T @ dz
        dz = pt @ (dz @ weights[idx].T)
    return grads, dz


def loss_value(model: GcnModel, g: Graph, x, y, loss_kind="ce", mask=None) -> float:
    h = forward(model, g, x)
    return cross_entropy_loss(h, y, mask) if loss_kind == "ce" else cw_loss(h, y, mask)


def feature_gradient(model: GcnModel, g: Graph, x, y, loss_kind="ce", mask=None) -> np.ndarray:
    """d loss / d X, shape (n, D)."""
    p = propagation_matrix(g, model.config.normalization)
    return _backward(model.weights, p, np.asarray(x, dtype=np.float64), y, mask, loss_kind)[2]


def weight_gradients(model: GcnModel, g: Graph, x, y, loss_kind="ce", mask=None):
    p = propagation_matrix(g, model.config.normalization)
    return _backward(model.weights, p, np.asarray(x, dtype=np.float64), y, mask, loss_kind)[1]


def train(g: Graph, x, y, split: SplitSpec, cfg: GcnConfig = GcnConfig(),
          n_classes: int | None = None) -> GcnModel:
    """Full-batch Adam on train-mask cross-entropy with L2 weight decay.

    Early stopping on validation cross-entropy keeps the best weights seen.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    k = int(y.max()) + 1 if n_classes is None else n_classes
    rng = np.random.default_rng(cfg.seed)
    dims = [x.shape[1]] + [cfg.hidden] * (cfg.layers - 1) + [k]
    weights = glorot_init(dims, rng)
    p = propagation_matrix(g, cfg.normalization)
    m1 = [np.zeros_like(w) for w in weights]
    m2 = [np.zeros_like(w) for w in weights]
    b1, b2, tiny = 0.9, 0.999, 1e-8
    best = (np.inf, [w.copy() for w in weights], 0)
    stale = 0
    train_loss = np.nan
    for epoch in range(1, cfg.epochs + 1):
        train_loss, grads, _ = _backward(weights, p, x, y, split.train, "ce")
        if not np.isfinite(train_loss):
            raise TrainingDiverged(epoch, train_loss)
        for i, (w, gw) in enumerate(zip(weights, grads)):
            gw = gw + cfg.weight_decay * w
            m1[i] = b1 * m1[i] + (1 - b1) * gw
            m2[i] = b2 * m2[i] + (1 - b2) * gw * gw
            mhat = m1[i] / (1 - b1 ** epoch)
            vhat = m2[i] / (1 - b2 ** epoch)
            weights[i] = w - cfg.learning_rate * mhat / (np.sqrt(vhat) + tiny)
        h = _forward_cache(weights, p, x)[0]
        val_loss = cross_entropy_loss(h, y, split.val) if split.val.any() else train_loss
        if not np.isfinite(val_loss):
            raise TrainingDiverged(epoch, val_loss)
        if val_loss < best[0]:
            best = (val_loss, [w.copy() for w in weights], epoch)
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    weights = best[1]
    h = _forward_cache(weights, p, x)[0]
    info = {
        "split_seed": split.seed,
        "best_epoch": best[2],
        "final_train_ce": cross_entropy_loss(h, y, split.train),
        "final_val_ce": cross_entropy_loss(h, y, split.val) if split.val.any() else None,
    }
    return GcnModel(weights, cfg, info)


def evaluate_attack(model: GcnModel, g: Graph, x, y, s, e: Epsilon | np.ndarray,
                    mask=None) -> dict:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    h0 = forward(model, g, x)
    h1 = forward(model, g, apply_tau(x, s, e))
    return {
        "loss_clean": cross_entropy_loss(h0, y, mask),
        "loss_attacked": cross_entropy_loss(h1, y, mask),
        "cw_clean": cw_loss(h0, y, mask),
        "cw_attacked": cw_loss(h1, y, mask),
        "acc_clean": accuracy(h0, y, mask),
        "acc_attacked": accuracy(h1, y, mask),
    }


def first_order_delta(model: GcnModel, g: Graph, x, y, i: int, e: Epsilon | np.ndarray,
                      loss_kind="ce", grad: np.ndarray | None = None) -> float:
    """Linearized loss change (grad_{X_i} loss) . eps for perturbing node i."""
    if grad is None:
        grad = feature_gradient(model, g, x, y, loss_kind)
    return float(grad[i] @ np.asarray(getattr(e, "values", e), dtype=np.float64))


def label_averaged_deltas(model: GcnModel, g: Graph, x, y, e: Epsilon | np.ndarray,
                          loss_kind="cw", mask=None) -> np.ndarray:
    """Per-node linearized loss change with every node's output gradient
    replaced by the mean output gradient over ``mask``.

    This averages out which class each node happens to carry, leaving only
    how a perturbation of node i propagates through the network; activation
    patterns stay those of the actual forward pass.
    """
    x = np.asarray(x, dtype=np.float64)
    p = propagation_matrix(g, model.config.normalization)
    h, cache = _forward_cache(model.weights, p, x)
    m = _mask(mask, g.n)
    _, dh = _loss_grad_logits(h, np.asarray(y), m, loss_kind)
    mean_dh = dh[m].mean(axis=0)
    _, dx = _sweep(model.weights, p, cache, np.tile(mean_dh, (g.n, 1)))
    return dx @ np.asarray(getattr(e, "values", e), dtype=np.float64)


def normalize_rows(x) -> np.ndarray:
    """Scale each feature row to sum to one; all-zero rows stay zero."""
    x = np.asarray(x, dtype=np.float64)
    s = x.sum(axis=1, keepdims=True)
    return np.divide(x, s, out=np.zeros_like(x), where=s != 0)


def save_features_csv(x, path) -> None:
    np.savetxt(path, np.asarray(x, dtype=np.float64), delimiter=",", fmt="%.17g")


def load_features_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def save_labels(y, path) -> None:
    np.savetxt(path, np.asarray(y, dtype=np.int64), fmt="%d")


def load_labels(path) -> np.ndarray:
    return np.loadtxt(path, dtype=np.int64, ndmin=1)
