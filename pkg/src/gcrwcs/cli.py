"""Command-line entry point: ``gcrwcs <subcommand> ...``.

Exit codes: 0 success, 1 invalid input or arguments, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import centrality, theory
from .experiment import (STRATEGIES, SWEEPABLE, ExperimentConfig, emit_report, emit_sweep,
                         run_experiment, sweep)
from .gcn import (GcnConfig, GcnModel, SplitSpec, evaluate_attack, feature_gradient,
                  load_features_csv, load_labels, normalize_rows, random_split, train)
from .graph import GraphFormatError, load_edge_list
from .perturb import build_epsilon, load_vector_csv, save_vector_csv
from .selection import (Selection, SelectionConstraints, degree_threshold, gc_rwcs,
                        select_top_r)
from .synth import SynthSpec, make_synthetic, write_synthetic
from .walks import binary_walk_matrix, rwcs_scores, save_scores_csv

log = logging.getLogger("gcrwcs")


class UsageError(ValueError):
    pass


def _add_data(p, required=True):
    p.add_argument("--graph", required=required, help="edge-list file")
    p.add_argument("--features", required=required, help="n x D feature CSV")
    p.add_argument("--labels", required=required, help="one integer label per line")


def _add_model(p):
    p.add_argument("--feature-norm", choices=("row", "none"), default="row",
                   help="feature preprocessing before training and attack")
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--hidden", type=int, default=32)
    p.add_argument("--normalization", choices=("symmetric", "mean"), default="symmetric")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--weight-decay", type=float, default=5e-4)
    p.add_argument("--patience", type=int, default=20)


def _add_selection(p):
    p.add_argument("--L", type=int, default=4, help="random-walk steps")
    p.add_argument("--k", type=int, default=1, help="GC-RWCS exclusion hops")
    p.add_argument("--topl", type=int, default=30, help="entries kept per row of the binarized walk matrix")
    p.add_argument("--r-frac", type=float, default=0.01)
    p.add_argument("--r", type=int, default=None, help="absolute budget (overrides --r-frac)")
    p.add_argument("--threshold", type=float, default=10.0, help="degree-cap percentile")


def _add_perturb(p):
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--j-frac", type=float, default=0.02)
    p.add_argument("--importance", default=None, help="CSV of D importance values")


def _model_cfg(a, seed) -> GcnConfig:
    return GcnConfig(layers=a.layers, hidden=a.hidden, normalization=a.normalization,
                     learning_rate=a.lr, epochs=a.epochs, weight_decay=a.weight_decay,
                     patience=a.patience, seed=seed)


def _synth_spec(a) -> SynthSpec:
    return SynthSpec(n=a.n, attach=a.attach, d_features=a.d_features, seed=a.seed,
                     w_scale=a.w_scale)


def _write(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        print(text)


def cmd_synth(a):
    spec = _synth_spec(a)
    paths = write_synthetic(make_synthetic(spec), spec, a.out)
    print(json.dumps(paths, indent=2))


def _load_xy(a):
    x = load_features_csv(a.features)
    return (normalize_rows(x) if a.feature_norm == "row" else x), load_labels(a.labels)


def cmd_train(a):
    g = load_edge_list(a.graph)
    x, y = _load_xy(a)
    split = (SplitSpec.from_json(Path(a.split).read_text()) if a.split
             else random_split(g.n, a.seed))
    model = train(g, x, y, split, _model_cfg(a, a.seed))
    model.save(a.out)
    if a.split_out:
        Path(a.split_out).write_text(split.to_json())
    print(json.dumps(model.trained_on))


def _scores(method, g, a):
    if method == "degree":
        return centrality.degree_scores(g)
    if method == "pagerank":
        return centrality.pagerank_scores(g)
    if method == "betweenness":
        return centrality.betweenness_scores(g)
    if method == "random":
        return centrality.random_scores(g.n, a.seed)
    if method == "rwcs":
        return centrality.rwcs_vector(g, a.L)
    raise UsageError(f"no static scores for {method!r}")


def _select(method, g, a) -> Selection:
    m = degree_threshold(g, a.threshold)
    r = a.r if a.r is not None else max(1, int(np.ceil(a.r_frac * g.n - 1e-9)))
    c = SelectionConstraints(r=r, m=m, k=a.k)
    if method == "gc-rwcs":
        return gc_rwcs(g, binary_walk_matrix(g, a.L, a.topl), c)
    if method == "none":
        return Selection("none", [])
    return select_top_r(_scores(method, g, a), g, c)


def cmd_select(a):
    g = load_edge_list(a.graph)
    if a.scores_out:
        if a.method in ("gc-rwcs", "none"):
            raise UsageError("--scores-out needs a static-score method")
        save_scores_csv(_scores(a.method, g, a).values, a.scores_out)
    _write(_select(a.method, g, a).to_json(), a.out)


def cmd_attack(a):
    g = load_edge_list(a.graph)
    x, y = _load_xy(a)
    model = GcnModel.load(a.model)
    split = SplitSpec.from_json(Path(a.split).read_text()) if a.split else None
    if a.selection:
        sel = Selection.from_json(Path(a.selection).read_text())
    else:
        sel = _select(a.method, g, a)
    importance = (load_vector_csv(a.importance) if a.importance
                  else feature_gradient(model, g, x, y, "ce").sum(axis=0))
    eps = build_epsilon(importance, a.j_frac, 1.0).scaled(a.lam)
    if a.eps_out:
        save_vector_csv(eps.values, a.eps_out)
    mask = split.test if (split is not None and not a.all_nodes) else None
    result = evaluate_attack(model, g, x, y, sel.nodes, eps, mask)
    _write(json.dumps({"method": sel.method, "nodes": sel.nodes,
                       "warnings": sel.warnings, **result}, indent=2), a.out)


def _experiment_cfg(a) -> ExperimentConfig:
    synth = None
    if a.synth:
        synth = SynthSpec(n=a.n, attach=a.attach, d_features=a.d_features, seed=a.seed,
                          w_scale=a.w_scale)
    return ExperimentConfig(
        graph=a.graph, features=a.features, labels=a.labels, importance=a.importance,
        synth=synth, fresh_data=not a.fixed_data, model=_model_cfg(a, 0),
        strategies=tuple(a.method), r_frac=a.r_frac, threshold=a.threshold, L=a.L, k=a.k,
        l=a.topl, lam=a.lam, j_frac=a.j_frac, eps_source=a.eps_source, trials=a.trials,
        seed=a.seed, eval_on="all" if a.all_nodes else "test", feature_norm=a.feature_norm,
        workers=a.workers)


def cmd_experiment(a):
    report = run_experiment(_experiment_cfg(a))
    if a.out:
        emit_report(report, a.out, a.format)
    for row in report.rows():
        print(f"{row['strategy']:<12} acc {row['mean_acc']:6.2f} +- {row['sem_acc']:.2f}  "
              f"ce {row['mean_ce_loss']:.4f}  cw {row['mean_cw_loss']:.4f}")


def cmd_sweep(a):
    values = [float(v) for v in a.values.split(",")]
    if a.parameter == "L":
        values = [int(v) for v in values]
    reports = sweep(_experiment_cfg(a), a.parameter, values)
    if a.out:
        emit_sweep(reports, a.out, a.format)
    for rep in reports:
        for row in rep.rows():
            print(f"{a.parameter}={rep.sweep_point['value']:<6} {row['strategy']:<12} "
                  f"acc {row['mean_acc']:6.2f} +- {row['sem_acc']:.2f}  ce {row['mean_ce_loss']:.4f}")


def cmd_oracle(a):
    """Run the set-function suites on random families and report pass/fail."""
    rng = np.random.default_rng(a.seed)
    unique_ok = cond_ok = 0
    for _ in range(a.families):
        ground = int(rng.integers(1, 11))
        gens = [frozenset(np.flatnonzero(rng.random(ground) < 0.4).tolist())
                for _ in range(int(rng.integers(1, 5)))]
        fam = theory.upward_closure(gens, ground)
        b = theory.basic_vulnerable_set(fam)
        shuffled = theory.SetFamily(ground, tuple(rng.permutation(np.array(fam.sets, dtype=object))))
        unique_ok += theory.basic_vulnerable_set(shuffled) == b
        cond_ok += all(theory.basic_set_conditions(fam, b))
    identity_ok = identity_total = 0
    for _ in range(a.families // 10 or 1):
        n = int(rng.integers(1, 6))
        bs = []
        for j in range(n):
            kind = rng.integers(3)
            if kind == 0:
                bs.append(None)
            elif kind == 1:
                bs.append(theory.SetFamily(n, ()))
            else:
                picks = np.flatnonzero(rng.random(n) < 0.5).tolist() or [j]
                bs.append(theory.SetFamily(n, tuple(frozenset({i}) for i in picks)))
        for s in theory.powerset(range(n)):
            identity_total += 1
            identity_ok += theory.coverage_identity_check(bs, s)["equal"]
    report = {
        "basic_set_unique": {"passed": unique_ok, "total": a.families},
        "basic_set_conditions": {"passed": cond_ok, "total": a.families},
        "coverage_identity": {"passed": identity_ok, "total": identity_total},
    }
    report["ok"] = all(v["passed"] == v["total"] for v in report.values())
    _write(json.dumps(report, indent=2), a.out)
    return 0 if report["ok"] else 2


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gcrwcs", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("synth", help="generate a Barabasi-Albert synthetic dataset")
    p.add_argument("--n", type=int, default=3000)
    p.add_argument("--attach", type=int, default=2)
    p.add_argument("--d-features", type=int, default=10)
    p.add_argument("--w-scale", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a GCN and save its weights")
    _add_data(p)
    _add_model(p)
    p.add_argument("--split", help="split JSON to reuse")
    p.add_argument("--split-out", help="write the split used")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("select", help="choose an attack set")
    p.add_argument("--graph", required=True)
    p.add_argument("--method", choices=STRATEGIES, default="gc-rwcs")
    _add_selection(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scores-out", help="also write node_id,score CSV")
    p.add_argument("--out")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("attack", help="perturb a selected set and evaluate a trained model")
    _add_data(p)
    p.add_argument("--model", required=True)
    p.add_argument("--split")
    p.add_argument("--selection", help="selection JSON from `select`")
    p.add_argument("--feature-norm", choices=("row", "none"), default="row",
                   help="must match the preprocessing used at training time")
    p.add_argument("--method", choices=STRATEGIES, default="gc-rwcs")
    _add_selection(p)
    _add_perturb(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps-out")
    p.add_argument("--all-nodes", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_attack)

    for name, fn in (("experiment", cmd_experiment), ("sweep", cmd_sweep)):
        p = sub.add_parser(name, help="full multi-trial protocol" if name == "experiment"
                           else "repeat the protocol over one parameter")
        _add_data(p, required=False)
        p.add_argument("--synth", action="store_true", help="use generated BA datasets")
        p.add_argument("--fixed-data", action="store_true",
                       help="reuse one synthetic dataset for all trials")
        p.add_argument("--n", type=int, default=3000)
        p.add_argument("--attach", type=int, default=2)
        p.add_argument("--d-features", type=int, default=10)
        p.add_argument("--w-scale", type=float, default=1.0)
        _add_model(p)
        _add_selection(p)
        _add_perturb(p)
        p.add_argument("--method", nargs="+", choices=STRATEGIES, default=list(STRATEGIES))
        p.add_argument("--eps-source", choices=("gradient", "disclosed", "file"), default="gradient")
        p.add_argument("--trials", type=int, default=40)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--all-nodes", action="store_true")
        p.add_argument("--out")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        if name == "sweep":
            p.add_argument("--parameter", choices=SWEEPABLE, required=True)
            p.add_argument("--values", required=True, help="comma-separated")
        p.set_defaults(func=fn)

    p = sub.add_parser("oracle", help="run the set-function oracle suites")
    p.add_argument("--families", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return a.func(a) or 0
    except (UsageError, GraphFormatError, ValueError, IndexError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        log.exception("run failed")
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
