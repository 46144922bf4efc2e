"""Trial loop: split, train, build the perturbation, select, evaluate, aggregate.

Within one trial every strategy sees the same dataset, split, trained model
and perturbation vector; only the attack set differs. Sweeps reuse the
trained model of each trial across all sweep values, so sweep points are
paired by construction.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import centrality
from .gcn import (GcnConfig, evaluate_attack, feature_gradient, load_features_csv,
                  load_labels, normalize_rows, random_split, train)
from .graph import Graph, load_edge_list
from .perturb import build_epsilon, load_vector_csv
from .selection import (Selection, SelectionConstraints, degree_threshold, gc_rwcs,
                        select_top_r)
from .synth import SynthSpec, make_synthetic
from .walks import binary_walk_matrix

STRATEGIES = ("none", "random", "degree", "pagerank", "betweenness", "rwcs", "gc-rwcs")
SWEEPABLE = ("lambda", "j_frac", "L")
CSV_COLUMNS = ("strategy", "mean_acc", "sem_acc", "mean_ce_loss", "mean_cw_loss")


@dataclass
class ExperimentConfig:
    graph: str | None = None
    features: str | None = None
    labels: str | None = None
    importance: str | None = None
    synth: SynthSpec | None = None
    fresh_data: bool = True
    model: GcnConfig = field(default_factory=GcnConfig)
    strategies: tuple[str, ...] = STRATEGIES
    r_frac: float = 0.01
    threshold: float = 10.0
    L: int = 4
    k: int = 1
    l: int = 30
    lam: float = 1.0
    j_frac: float = 0.02
    eps_source: str = "gradient"
    eps_loss: str = "ce"
    trials: int = 40
    seed: int = 0
    eval_on: str = "test"
    feature_norm: str = "row"
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.synth, dict):
            self.synth = SynthSpec(**self.synth)
        if isinstance(self.model, dict):
            self.model = GcnConfig(**self.model)
        self.strategies = tuple(self.strategies)
        bad = set(self.strategies) - set(STRATEGIES)
        if bad:
            raise ValueError(f"unknown strategies {sorted(bad)}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.synth is None and not (self.graph and self.features and self.labels):
            raise ValueError("need either a synth spec or graph/features/labels files")
        if self.eps_source not in ("gradient", "disclosed", "file"):
            raise ValueError(f"unknown eps_source {self.eps_source!r}")
        if self.eps_source == "disclosed" and self.synth is None:
            raise ValueError("disclosed importance exists only for synthetic data")
        if self.eps_source == "file" and not self.importance:
            raise ValueError("eps_source=file needs an importance file")
        if self.feature_norm not in ("row", "none"):
            raise ValueError("feature_norm must be 'row' or 'none'")
        if self.eval_on not in ("test", "all"):
            raise ValueError("eval_on must be 'test' or 'all'")
        if not 0 < self.r_frac <= 1:
            raise ValueError("r_frac must lie in (0, 1]")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["strategies"] = list(self.strategies)
        return d

    def config_hash(self) -> str:
        d = self.to_dict()
        d.pop("workers")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class StrategyResult:
    acc: list[float] = field(default_factory=list)
    ce: list[float] = field(default_factory=list)
    cw: list[float] = field(default_factory=list)
    size: list[int] = field(default_factory=list)

    @property
    def mean_acc(self) -> float:
        return float(np.mean(self.acc))

    @property
    def sem_acc(self) -> float:
        if len(self.acc) < 2:
            return 0.0
        return float(np.std(self.acc, ddof=1) / math.sqrt(len(self.acc)))

    @property
    def mean_ce_loss(self) -> float:
        return float(np.mean(self.ce))

    @property
    def mean_cw_loss(self) -> float:
        return float(np.mean(self.cw))

    def summary(self) -> dict:
        return {"mean_acc": self.mean_acc, "sem_acc": self.sem_acc,
                "mean_ce_loss": self.mean_ce_loss, "mean_cw_loss": self.mean_cw_loss}


@dataclass
class Report:
    config: dict
    config_hash: str
    results: dict[str, StrategyResult]
    sweep_point: dict | None = None

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "config": self.config,
            "sweep_point": self.sweep_point,
            "strategies": {
                name: {**res.summary(), "trials": asdict(res)}
                for name, res in self.results.items()
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        results = {name: StrategyResult(**body["trials"]) for name, body in d["strategies"].items()}
        return cls(d["config"], d["config_hash"], results, d.get("sweep_point"))

    def rows(self) -> list[dict]:
        return [{"strategy": name, **res.summary()} for name, res in self.results.items()]


# ---------------------------------------------------------------- data


@dataclass
class _Data:
    graph: Graph
    x: np.ndarray
    y: np.ndarray
    importance: np.ndarray | None = None


def _features(x, cfg: ExperimentConfig) -> np.ndarray:
    # the perturbation is added to the matrix the model actually consumes
    return normalize_rows(x) if cfg.feature_norm == "row" else x


def _load_files(cfg: ExperimentConfig) -> _Data:
    g = load_edge_list(cfg.graph)
    x = _features(load_features_csv(cfg.features), cfg)
    y = load_labels(cfg.labels)
    if x.shape[0] != g.n or y.shape[0] != g.n:
        raise ValueError(f"graph has {g.n} nodes but features/labels have "
                         f"{x.shape[0]}/{y.shape[0]} rows")
    imp = load_vector_csv(cfg.importance) if cfg.importance else None
    return _Data(g, x, y, imp)


def _synth_data(spec: SynthSpec, cfg: ExperimentConfig) -> _Data:
    d = make_synthetic(spec)
    return _Data(d.graph, _features(d.x, cfg), d.y, d.disclosed_importance())


class _ScoreCache:
    """Graph-only scores, shared by every trial that reuses a graph."""

    def __init__(self, g: Graph):
        self.g = g
        self._store: dict = {}

    def get(self, key, fn):
        if key not in self._store:
            self._store[key] = fn()
        return self._store[key]

    def select(self, strategy: str, c: SelectionConstraints, L: int, l: int,
               rng: np.random.Generator) -> Selection:
        g = self.g
        if strategy == "none":
            return Selection("none", [])
        if strategy == "random":
            return select_top_r(centrality.random_scores(g.n, rng), g, c)
        if strategy == "gc-rwcs":
            mb = self.get(("mtilde", L, l), lambda: binary_walk_matrix(g, L, l))
            return gc_rwcs(g, mb, c)
        makers = {
            "degree": lambda: centrality.degree_scores(g),
            "pagerank": lambda: centrality.pagerank_scores(g),
            "betweenness": lambda: centrality.betweenness_scores(g),
            "rwcs": lambda: centrality.rwcs_vector(g, L),
        }
        key = (strategy, L) if strategy == "rwcs" else (strategy,)
        return select_top_r(self.get(key, makers[strategy]), g, c)


# ---------------------------------------------------------------- trials


def _trial_seeds(seed: int, trials: int):
    return np.random.SeedSequence(seed).spawn(trials)


def _run_trial(cfg: ExperimentConfig, trial: int, variants: list[dict],
               shared: _Data | None = None, cache: _ScoreCache | None = None) -> list[dict]:
    ss = _trial_seeds(cfg.seed, cfg.trials)[trial]
    data_ss, split_ss, model_ss, rand_ss = ss.spawn(4)
    if shared is None:
        spec = replace(cfg.synth, seed=int(data_ss.generate_state(1)[0]))
        data = _synth_data(spec, cfg)
        cache = _ScoreCache(data.graph)
    else:
        data = shared
    g = data.graph
    split = random_split(g.n, np.random.default_rng(split_ss))
    mcfg = replace(cfg.model, seed=int(model_ss.generate_state(1)[0]))
    model = train(g, data.x, data.y, split, mcfg)

    m = degree_threshold(g, cfg.threshold)
    r = math.ceil(cfg.r_frac * g.n - 1e-9)
    if cfg.eps_source == "gradient":
        importance = feature_gradient(model, g, data.x, data.y, cfg.eps_loss).sum(axis=0)
    else:
        if data.importance is None:
            raise ValueError("no importance vector available for this dataset")
        importance = data.importance
    mask = split.test if cfg.eval_on == "test" else None

    out = []
    for v in variants:
        lam = v.get("lambda", cfg.lam)
        j_frac = v.get("j_frac", cfg.j_frac)
        L = int(v.get("L", cfg.L))
        eps = build_epsilon(importance, j_frac, 1.0).scaled(lam)
        c = SelectionConstraints(r=r, m=m, k=cfg.k)
        rng = np.random.default_rng(rand_ss)
        rows = {}
        for strategy in cfg.strategies:
            sel = cache.select(strategy, c, L, cfg.l, rng)
            ev = evaluate_attack(model, g, data.x, data.y, sel.nodes, eps, mask)
            n_eval = int(mask.sum()) if mask is not None else g.n
            rows[strategy] = (100.0 * ev["acc_attacked"], ev["loss_attacked"],
                              ev["cw_attacked"] / n_eval, len(sel.nodes))
        out.append(rows)
    return out


class TrialFailed(RuntimeError):
    pass


def _guarded(cfg, trial, variants, shared=None, cache=None):
    try:
        return _run_trial(cfg, trial, variants, shared, cache)
    except Exception as exc:
        raise TrialFailed(f"trial {trial} (master seed {cfg.seed}) failed: {exc}") from exc


def _trial_job(args):
    cfg, trial, variants = args
    return _guarded(cfg, trial, variants)


def _run_all(cfg: ExperimentConfig, variants: list[dict]) -> list[list[dict]]:
    """Per-trial result rows, ordered by trial index."""
    if cfg.synth is not None and cfg.fresh_data:
        jobs = [(cfg, t, variants) for t in range(cfg.trials)]
        if cfg.workers > 1:
            with ProcessPoolExecutor(cfg.workers) as pool:
                return list(pool.map(_trial_job, jobs))
        return [_trial_job(j) for j in jobs]
    shared = _synth_data(cfg.synth, cfg) if cfg.synth is not None else _load_files(cfg)
    cache = _ScoreCache(shared.graph)
    return [_guarded(cfg, t, variants, shared, cache) for t in range(cfg.trials)]


def _collect(cfg: ExperimentConfig, per_trial: list[list[dict]], idx: int,
             point: dict | None) -> Report:
    results = {s: StrategyResult() for s in cfg.strategies}
    for rows in per_trial:
        for s, (acc, ce, cw, size) in rows[idx].items():
            res = results[s]
            res.acc.append(acc)
            res.ce.append(ce)
            res.cw.append(cw)
            res.size.append(size)
    return Report(cfg.to_dict(), cfg.config_hash(), results, point)


def run_experiment(cfg: ExperimentConfig) -> Report:
    return _collect(cfg, _run_all(cfg, [{}]), 0, None)


def sweep(cfg: ExperimentConfig, parameter: str, values) -> list[Report]:
    if parameter not in SWEEPABLE:
        raise ValueError(f"cannot sweep {parameter!r}; choose from {SWEEPABLE}")
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    variants = [{parameter: v} for v in values]
    per_trial = _run_all(cfg, variants)
    return [_collect(cfg, per_trial, i, {"parameter": parameter, "value": v})
            for i, v in enumerate(values)]


# ---------------------------------------------------------------- output


def emit_report(report: Report, path: str | Path, fmt: str = "json") -> None:
    path = Path(path)
    if fmt == "json":
        path.write_text(json.dumps(report.to_dict(), indent=2))
    elif fmt == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            w.writeheader()
            for row in report.rows():
                w.writerow(row)
    else:
        raise ValueError(f"unknown format {fmt!r}")


def emit_sweep(reports: list[Report], path: str | Path, fmt: str = "csv") -> None:
    path = Path(path)
    if fmt == "json":
        path.write_text(json.dumps([r.to_dict() for r in reports], indent=2))
        return
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=("parameter", "value") + CSV_COLUMNS)
        w.writeheader()
        for rep in reports:
            for row in rep.rows():
                w.writerow({**rep.sweep_point, **row})


def load_report(path: str | Path) -> Report:
    return Report.from_dict(json.loads(Path(path).read_text()))
