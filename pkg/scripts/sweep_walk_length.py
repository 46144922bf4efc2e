"""GC-RWCS and RWCS accuracy for walk lengths L = 3..7 with paired trials."""
import argparse
from pathlib import Path

from gcrwcs.experiment import ExperimentConfig, emit_sweep, sweep
from gcrwcs.synth import SynthSpec


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threshold", type=float, default=10.0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/sweep_walk_length.csv")
    a = ap.parse_args()

    cfg = ExperimentConfig(synth=SynthSpec(), eps_source="disclosed", j_frac=0.2,
                           threshold=a.threshold, strategies=("none", "rwcs", "gc-rwcs"),
                           trials=a.trials, seed=a.seed, workers=a.workers)
    reps = sweep(cfg, "L", [3, 4, 5, 6, 7])
    Path(a.out).parent.mkdir(parents=True, exist_ok=True)
    emit_sweep(reps, a.out)
    for rep in reps:
        res = rep.results
        print(f"L={rep.sweep_point['value']}  rwcs {res['rwcs'].mean_acc:.2f}  "
              f"gc-rwcs {res['gc-rwcs'].mean_acc:.2f} +- {res['gc-rwcs'].sem_acc:.2f}")


if __name__ == "__main__":
    main()
