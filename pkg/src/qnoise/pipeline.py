"""Experiment workflows: prepare data, train an architecture, sweep noise, persist results."""
from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, ModelKind
from .data import Dataset, PrepConfig, PreparedData, load_csv, prepare
from .embeddings import entangle_pairs
from .errors import ConfigError, StateError
from .hybrid import HybridModel, encode_angles, hybrid_forward, hybrid_train, make_hybrid
from .noise import NoiseModel, NoisePlacement, make_channel
from .train import LossKind, Metrics, QnnModel, TrainConfig, TrainHistory, classify, predict, qnn_p, qnn_q, train

HISTORY_HEADER = ("epoch", "loss", "train_accuracy")
SWEEP_HEADER = ("noise_model", "p", "placement", "accuracy", "precision", "recall", "f1")
REPORT_HEADER = ("run", "model", "dataset", "precision", "recall", "f1", "accuracy", "runtime_s", "status")


def fmt(v) -> str:
    """Decimal text that parses back to the same float (17 significant digits)."""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


# --- config -> objects --------------------------------------------------


def n_components(cfg: ExperimentConfig) -> int:
    # the hybrid's dense layer sees every (rotated) input column
    if cfg.model.kind is ModelKind.QNN_H:
        return len(cfg.dataset.features)
    return cfg.model.qubits


def prep_config(cfg: ExperimentConfig) -> PrepConfig:
    d = cfg.dataset
    return PrepConfig(n_components(cfg), d.per_class, d.test_fraction, cfg.train.seed, d.reduction, d.pad)


def loss_for(kind: ModelKind) -> LossKind:
    return LossKind.MSE if kind is ModelKind.QNN_P else LossKind.BCE_WITH_LOGITS


def train_config(cfg: ExperimentConfig) -> TrainConfig:
    t = cfg.train
    return TrainConfig(t.learning_rate, t.epochs, t.beta1, t.beta2, t.eps, t.seed, loss_for(cfg.model.kind))


def build_qnn(cfg: ExperimentConfig) -> QnnModel:
    m = cfg.model
    pairs = entangle_pairs(m.topology, m.qubits)
    if m.kind is ModelKind.QNN_P:
        return qnn_p(m.qubits, m.layers, pairs)
    return qnn_q(m.qubits, m.feature_reps, m.layers, pairs)


def load_dataset(cfg: ExperimentConfig) -> Dataset:
    d = cfg.dataset
    label_map = dict(d.label_map) if d.label_map else None
    return load_csv(d.path, d.features, d.label, label_map, d.decimal)


# --- trained models -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class Trained:
    """A trained QNN (``qnn`` + ``params``) or hybrid (``hybrid``)."""

    kind: ModelKind
    qnn: QnnModel | None = None
    params: np.ndarray | None = None
    hybrid: HybridModel | None = None

    def scores(self, x, noise=None) -> np.ndarray:
        """Real-valued outputs thresholded at 0: <Z> for QNN-P, logits otherwise."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.hybrid is None:
            return np.asarray(predict(self.qnn, self.params, x, noise))
        if noise is None:
            return np.asarray(hybrid_forward(self.hybrid, x)[0])
        h = self.hybrid
        a, _ = encode_angles(x @ h.w1.T + h.b1, h.activation)
        return h.w2 * np.asarray(predict(h.quantum, h.qparams, a, noise)) + h.b2

    def evaluate(self, x, y, noise=None) -> Metrics:
        return Metrics.from_labels(y, classify(self.scores(x, noise)))

    def to_json(self) -> dict:
        vec = self.params if self.hybrid is None else self.hybrid.vector()
        out = {"model": self.kind.value, "params": [float(v) for v in vec]}
        if self.hybrid is not None:
            out["n_features"] = self.hybrid.n_features
        return out

    @classmethod
    def from_json(cls, cfg: ExperimentConfig, blob: dict) -> "Trained":
        kind = ModelKind(blob["model"])
        if kind is not cfg.model.kind:
            raise ConfigError(f"params were trained for {kind.value}, config asks for {cfg.model.kind.value}")
        vec = np.asarray(blob["params"], dtype=float)
        qnn = build_qnn(cfg)
        if kind is not ModelKind.QNN_H:
            if vec.shape != (qnn.n_params,):
                raise ConfigError(f"params file holds {vec.size} values, model needs {qnn.n_params}")
            return cls(kind, qnn, vec)
        shell = make_hybrid(int(blob["n_features"]), 0, cfg.model.activation, qnn)
        if vec.shape != shell.vector().shape:
            raise ConfigError(f"params file holds {vec.size} values, model needs {shell.vector().size}")
        return cls(kind, hybrid=shell.with_vector(vec))


def fit(cfg: ExperimentConfig, prep: PreparedData) -> tuple[Trained, TrainHistory]:
    tc = train_config(cfg)
    if cfg.model.kind is ModelKind.QNN_H:
        model = make_hybrid(prep.x_train.shape[1], cfg.train.seed, cfg.model.activation, build_qnn(cfg))
        model, history = hybrid_train(model, prep.x_train, prep.y_train, tc)
        return Trained(ModelKind.QNN_H, hybrid=model), history
    qnn = build_qnn(cfg)
    params, history = train(qnn, prep.x_train, prep.y_train, tc)
    return Trained(cfg.model.kind, qnn, params), history


# --- run records --------------------------------------------------------


@dataclass
class RunRecord:
    config: dict
    history: dict = field(default_factory=lambda: {"loss": [], "accuracy": []})
    metrics: dict = field(default_factory=dict)
    runtime_seconds: float = 0.0
    seed: int = 0
    version: str = __version__

    def to_json(self) -> str:
        return json.dumps(
            {
                "config": self.config,
                "history": self.history,
                "metrics": self.metrics,
                "runtime_seconds": self.runtime_seconds,
                "seed": self.seed,
                "version": self.version,
            },
            indent=2,
            sort_keys=True,
        ) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        d = json.loads(text)
        return cls(d["config"], d["history"], d["metrics"], d["runtime_seconds"], d["seed"], d["version"])


def run_experiment(cfg: ExperimentConfig, dataset: Dataset | None = None):
    """Prepare, train and test one configuration. Returns ``(record, trained, prep)``."""
    dataset = load_dataset(cfg) if dataset is None else dataset
    prep = prepare(dataset, prep_config(cfg))
    start = time.perf_counter()
    trained, history = fit(cfg, prep)
    runtime = time.perf_counter() - start
    metrics = trained.evaluate(prep.x_test, prep.y_test)
    record = RunRecord(
        config=cfg.snapshot(),
        history={"loss": list(history.loss), "accuracy": list(history.accuracy)},
        metrics=metrics.to_dict(),
        runtime_seconds=runtime,
        seed=cfg.train.seed,
    )
    return record, trained, prep


# --- noise sweep --------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    noise_model: str
    p: float
    placement: str
    accuracy: float
    precision: float
    recall: float
    f1: float

    def cells(self) -> list[str]:
        return [fmt(getattr(self, k)) for k in SWEEP_HEADER]


def thread_count(default: int | None = None) -> int:
    raw = os.environ.get("QNOISE_THREADS")
    if raw is None or raw.strip() == "":
        return default or min(8, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"QNOISE_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"QNOISE_THREADS must be a positive integer, got {raw!r}")
    return n


def noise_sweep(trained: Trained, x, y, models, grid, placement=NoisePlacement.AFTER_EACH_GATE, threads: int | None = None):
    """Test metrics under every (noise model, p) pair, reusing the trained parameters."""
    placement = NoisePlacement(placement)
    jobs = [(NoiseModel(m), float(p)) for m in models for p in grid]

    def one(job):
        model, p = job
        met = trained.evaluate(x, y, (make_channel(model, p), placement))
        return SweepRow(model.value, p, placement.value, met.accuracy, met.precision, met.recall, met.f1)

    n = thread_count() if threads is None else threads
    if n == 1:
        return [one(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(one, jobs))


# --- files --------------------------------------------------------------


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def write_history(path, history) -> Path:
    loss = history["loss"] if isinstance(history, dict) else history.loss
    acc = history["accuracy"] if isinstance(history, dict) else history.accuracy
    return write_csv(path, HISTORY_HEADER, [(i + 1, l, a) for i, (l, a) in enumerate(zip(loss, acc))])


def read_history(path) -> dict:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return {"loss": [float(r["loss"]) for r in rows], "accuracy": [float(r["train_accuracy"]) for r in rows]}


def metrics_json(metrics: Metrics | dict) -> str:
    d = metrics.to_dict() if isinstance(metrics, Metrics) else metrics
    return json.dumps(d, indent=2, sort_keys=True) + "\n"


def write_malformed(path, dataset: Dataset) -> Path:
    return write_csv(path, ("line", "reason"), dataset.malformed)


def read_sweep(path) -> list[SweepRow]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return [
            SweepRow(r["noise_model"], float(r["p"]), r["placement"], *(float(r[k]) for k in SWEEP_HEADER[3:]))
            for r in csv.DictReader(fh)
        ]


def load_trained(cfg: ExperimentConfig, out_dir) -> Trained:
    path = Path(out_dir) / "params.json"
    if not path.is_file():
        raise StateError(f"no trained parameters at {path}; run 'train' first")
    return Trained.from_json(cfg, json.loads(path.read_text(encoding="utf-8")))


def report_rows(directory) -> list[dict]:
    """One row per run directory under ``directory`` (itself included)."""
    directory = Path(directory)
    candidates = [directory] + sorted(p for p in directory.iterdir() if p.is_dir()) if directory.is_dir() else []
    rows = []
    for run in candidates:
        files = {n: run / n for n in ("record.json", "metrics.json", "params.json")}
        if not any(f.is_file() for f in files.values()):
            continue
        row = {k: "" for k in REPORT_HEADER}
        row["run"] = run.name
        row["status"] = "ok"
        if files["record.json"].is_file():
            rec = RunRecord.from_json(files["record.json"].read_text(encoding="utf-8"))
            row["model"] = rec.config["model"]["kind"]
            row["dataset"] = Path(rec.config["dataset"]["path"]).name
            row["runtime_s"] = rec.runtime_seconds
        elif files["params.json"].is_file():
            row["model"] = json.loads(files["params.json"].read_text(encoding="utf-8")).get("model", "")
        if files["metrics.json"].is_file():
            met = json.loads(files["metrics.json"].read_text(encoding="utf-8"))
            for k in ("precision", "recall", "f1", "accuracy"):
                row[k] = met[k]
        else:
            row["status"] = "MISSING metrics.json"
        rows.append(row)
    return rows


def format_table(rows: list[dict]) -> str:
    def cell(v):
        if isinstance(v, float):
            return f"{v:.4f}" if abs(v) < 1e3 else f"{v:.1f}"
        return str(v)

    header = list(REPORT_HEADER)
    body = [[cell(r[k]) for k in header] for r in rows]
    widths = [max(len(h), *(len(b[i]) for b in body)) for i, h in enumerate(header)]
    line = lambda cells: "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    sep = "  ".join("-" * w for w in widths)
    return "\n".join([line(header), sep] + [line(b) for b in body]) + "\n"
