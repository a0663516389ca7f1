"""Train QNN-P, QNN-Q and QNN-H over several seeds on both datasets and tabulate test metrics.

Uses the CSVs in data/ (see make_surrogate_data.py) unless --rodd / --gpsd
point at other files with the same columns. Prints per-seed accuracies and
a median table per dataset; every run is also written under --out so that
``qnoise report`` can tabulate it.
"""
import argparse
import json
import statistics
from pathlib import Path

from qnoise.config import DatasetSection, ExperimentConfig, ModelSection, TrainSection
from qnoise.pipeline import format_table, metrics_json, report_rows, run_experiment, write_history
from qnoise.surrogate import GPSD_FEATURES, GPSD_LABEL, RODD_FEATURES, RODD_LABEL

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--rodd", default=str(ROOT / "data/rodd_surrogate.csv"))
    ap.add_argument("--gpsd", default=str(ROOT / "data/gpsd_surrogate.csv"))
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--epochs", type=int, default=200)
    ap.add_argument("--out", default=str(ROOT / "runs/tables"))
    args = ap.parse_args()

    datasets = {
        "RODD": DatasetSection(args.rodd, RODD_FEATURES, RODD_LABEL),
        "GPSD": DatasetSection(args.gpsd, GPSD_FEATURES, GPSD_LABEL, (("normal", 0), ("*", 1))),
    }
    for name, section in datasets.items():
        print(f"== {name} ==")
        medians = {}
        for kind in ("QNN-P", "QNN-Q", "QNN-H"):
            accs = []
            for seed in range(args.seeds):
                cfg = ExperimentConfig(
                    section, ModelSection(kind, 4 if kind == "QNN-P" else 2), TrainSection(epochs=args.epochs, seed=seed)
                )
                record, trained, _ = run_experiment(cfg)
                run = Path(args.out) / name.lower() / f"{kind}-seed{seed}"
                run.mkdir(parents=True, exist_ok=True)
                (run / "record.json").write_text(record.to_json())
                (run / "metrics.json").write_text(metrics_json(record.metrics))
                (run / "params.json").write_text(json.dumps(trained.to_json(), indent=2) + "\n")
                write_history(run / "history.csv", record.history)
                accs.append(record.metrics["accuracy"])
                print(f"  {kind} seed {seed}: accuracy {accs[-1]:.4f}  ({record.runtime_seconds:.1f}s)")
            medians[kind] = statistics.median(accs)
        print("  medians: " + ", ".join(f"{k} {v:.4f}" for k, v in medians.items()))
        print(format_table(report_rows(Path(args.out) / name.lower())))


if __name__ == "__main__":
    main()
