"""Accuracy as more feature coordinates are perturbed (gradient-ranked).

With D = 10 the fractions 0.1..0.5 perturb J = 1..5 coordinates.
"""
import argparse
from pathlib import Path

from gcrwcs.experiment import ExperimentConfig, emit_sweep, sweep
from gcrwcs.synth import SynthSpec


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--values", default="0.1,0.2,0.3,0.4,0.5")
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/sweep_feature_count.csv")
    a = ap.parse_args()

    cfg = ExperimentConfig(synth=SynthSpec(), eps_source="gradient",
                           strategies=("none", "random", "rwcs", "gc-rwcs"),
                           trials=a.trials, seed=a.seed, workers=a.workers)
    reps = sweep(cfg, "j_frac", [float(v) for v in a.values.split(",")])
    Path(a.out).parent.mkdir(parents=True, exist_ok=True)
    emit_sweep(reps, a.out)
    for rep in reps:
        accs = "  ".join(f"{s}={r.mean_acc:.2f}" for s, r in rep.results.items())
        print(f"j_frac={rep.sweep_point['value']:<4} {accs}")


if __name__ == "__main__":
    main()
