"""Train QNN-P once, then sweep all six noise channels over p in [0, 1] under both placements.

Writes sweep_<placement>.csv and .svg into --out and prints an accuracy grid.
"""
import argparse
from pathlib import Path

from qnoise.config import DatasetSection, ExperimentConfig, TrainSection
from qnoise.noise import NoiseModel, NoisePlacement
from qnoise.pipeline import SWEEP_HEADER, noise_sweep, run_experiment, write_csv
from qnoise.surrogate import RODD_FEATURES, RODD_LABEL
from qnoise.svg import write_chart

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--data", default=str(ROOT / "data/rodd_surrogate.csv"))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--epochs", type=int, default=200)
    ap.add_argument("--step", type=float, default=0.1)
    ap.add_argument("--out", default=str(ROOT / "runs/sweep"))
    args = ap.parse_args()

    cfg = ExperimentConfig(DatasetSection(args.data, RODD_FEATURES, RODD_LABEL), train=TrainSection(epochs=args.epochs, seed=args.seed))
    record, trained, prep = run_experiment(cfg)
    print(f"noiseless test accuracy {record.metrics['accuracy']:.4f}")
    grid = [round(i * args.step, 10) for i in range(int(round(1 / args.step)) + 1)]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for placement in NoisePlacement:
        rows = noise_sweep(trained, prep.x_test, prep.y_test, list(NoiseModel), grid, placement)
        write_csv(out / f"sweep_{placement.value}.csv", SWEEP_HEADER, [[getattr(r, k) for k in SWEEP_HEADER] for r in rows])
        series = {}
        for r in rows:
            series.setdefault(r.noise_model, ([], []))
            series[r.noise_model][0].append(r.p)
            series[r.noise_model][1].append(r.accuracy)
        write_chart(out / f"sweep_{placement.value}.svg", series, title=f"QNN-P accuracy ({placement.value})",
                    xlabel="noise parameter p", ylabel="accuracy", ylim=(0, 1))
        print(f"\n{placement.value}")
        print("p".ljust(20) + " ".join(f"{p:5.2f}" for p in grid))
        for name, (_, accs) in series.items():
            print(name.ljust(20) + " ".join(f"{a:5.2f}" for a in accs))


if __name__ == "__main__":
    main()
