"""CSV ingestion and preprocessing: scaling, balancing, PCA, splitting."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import DomainError, EmptyDataError, ImbalanceError, SchemaError

OTHERWISE = "*"


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    column_names: tuple[str, ...]
    # (line number, reason) for every row dropped at load time
    malformed: tuple[tuple[int, str], ...] = field(default=())

    def __post_init__(self):
        if len(self.features) != len(self.labels):
            raise ValueError("feature and label row counts differ")
        if not np.isin(self.labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")

    def __len__(self):
        return len(self.labels)

    @property
    def dropped(self) -> int:
        return len(self.malformed)

    def take(self, idx) -> "Dataset":
        return replace(self, features=self.features[idx], labels=self.labels[idx])


def _parse_float(text: str, decimal: str) -> float:
    text = text.strip()
    if decimal != ".":
        text = text.replace(".", "").replace(decimal, ".")
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("non-finite")
    return value


def map_label(raw: str, label_map: dict | None) -> int:
    raw = raw.strip()
    if label_map is None:
        value = int(float(raw))
        if value not in (0, 1):
            raise ValueError(f"label {raw!r} not 0/1")
        return value
    if raw in label_map:
        return int(label_map[raw])
    if raw.lower() in label_map:
        return int(label_map[raw.lower()])
    if OTHERWISE in label_map:
        return int(label_map[OTHERWISE])
    raise ValueError(f"label {raw!r} not in label map")


def load_csv(path, feature_columns, label_column, label_map=None, decimal=".") -> Dataset:
    """Read a headed, comma-delimited UTF-8 CSV.

    Rows with a missing or unparseable feature or label are dropped and
    reported in ``Dataset.malformed``. ``label_map`` maps raw label text to
    0/1; the key ``"*"`` catches every unlisted value (e.g. ``{"normal": 0,
    "*": 1}`` for normal-vs-attack).
    """
    path = Path(path)
    feats, labels, bad = [], [], []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in [*feature_columns, label_column] if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {missing}")
        for row in reader:
            line = reader.line_num
            try:
                values = []
                for c in feature_columns:
                    cell = row[c]
                    if cell is None or not cell.strip():
                        raise ValueError(f"blank {c}")
                    values.append(_parse_float(cell, decimal))
                raw_label = row[label_column]
                if raw_label is None or not raw_label.strip():
                    raise ValueError(f"blank {label_column}")
                label = map_label(raw_label, label_map)
            except ValueError as exc:
                bad.append((line, str(exc)))
                continue
            feats.append(values)
            labels.append(label)
    if not feats:
        raise EmptyDataError(f"{path}: no usable rows ({len(bad)} dropped)")
    return Dataset(np.array(feats, dtype=float), np.array(labels, dtype=int), tuple(feature_columns), tuple(bad))


# --- standard scaling ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class ScalerParams:
    mean: np.ndarray
    std: np.ndarray

    @property
    def degenerate(self) -> np.ndarray:
        return self.std == 0


def fit_scaler(features) -> ScalerParams:
    """Column mean and population (1/N) standard deviation."""
    x = np.asarray(features, dtype=float)
    if x.size == 0:
        raise DomainError("cannot fit a scaler on no data")
    return ScalerParams(x.mean(axis=0), x.std(axis=0))


def apply_scaler(params: ScalerParams, features) -> np.ndarray:
    x = np.asarray(features, dtype=float)
    safe = np.where(params.degenerate, 1.0, params.std)
    return np.where(params.degenerate, 0.0, (x - params.mean) / safe)


def invert_scaler(params: ScalerParams, scaled) -> np.ndarray:
    return np.asarray(scaled) * params.std + params.mean


# --- class balancing / splitting ------------------------------------------


def balance_classes(dataset: Dataset, per_class: int, seed: int) -> Dataset:
    rng = np.random.default_rng(seed)
    chosen = []
    for cls in (0, 1):
        idx = np.flatnonzero(dataset.labels == cls)
        if len(idx) < per_class:
            counts = {c: int(np.sum(dataset.labels == c)) for c in (0, 1)}
            raise ImbalanceError(f"need {per_class} rows per class, have {counts}")
        chosen.append(rng.choice(idx, per_class, replace=False))
    idx = np.concatenate(chosen)
    return dataset.take(idx[rng.permutation(len(idx))])


def train_test_split(dataset: Dataset, test_fraction: float, seed: int):
    """Stratified split; per-class test counts use largest-remainder rounding."""
    if not 0 < test_fraction < 1:
        raise DomainError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    n_test = math.floor(test_fraction * len(dataset) + 0.5)
    by_class = [np.flatnonzero(dataset.labels == c) for c in (0, 1)]
    quotas = [test_fraction * len(idx) for idx in by_class]
    counts = [math.floor(q) for q in quotas]
    order = sorted(range(2), key=lambda c: -(quotas[c] - counts[c]))
    for c in order[: max(0, n_test - sum(counts))]:
        counts[c] += 1
    train_idx, test_idx = [], []
    for idx, k in zip(by_class, counts):
        perm = rng.permutation(idx)
        test_idx.append(perm[:k])
        train_idx.append(perm[k:])
    train_idx = np.concatenate(train_idx)
    test_idx = np.concatenate(test_idx)
    return (
        dataset.take(train_idx[rng.permutation(len(train_idx))]),
        dataset.take(test_idx[rng.permutation(len(test_idx))]),
    )


# --- PCA ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PcaParams:
    mean: np.ndarray
    components: np.ndarray  # (k, d), orthonormal rows
    explained_variance: np.ndarray


def fit_pca(features, k: int) -> PcaParams:
    x = np.asarray(features, dtype=float)
    d = x.shape[1]
    if not 1 <= k <= d:
        raise DomainError(f"k must lie in [1, {d}], got {k}")
    mean = x.mean(axis=0)
    cov = np.cov(x - mean, rowvar=False, bias=True).reshape(d, d)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1][:k]
    comps = evecs[:, order].T
    # sign convention: largest-magnitude entry of each component is positive
    pivots = comps[np.arange(k), np.argmax(np.abs(comps), axis=1)]
    comps = comps * np.where(pivots < 0, -1.0, 1.0)[:, None]
    return PcaParams(mean, comps, np.clip(evals[order], 0.0, None))


def apply_pca(params: PcaParams, features) -> np.ndarray:
    return (np.asarray(features, dtype=float) - params.mean) @ params.components.T


def invert_pca(params: PcaParams, projected) -> np.ndarray:
    return params.mean + np.asarray(projected) @ params.components


# --- angle range ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AngleRange:
    low: np.ndarray
    high: np.ndarray


def fit_angle_range(features) -> AngleRange:
    x = np.asarray(features, dtype=float)
    return AngleRange(x.min(axis=0), x.max(axis=0))


def apply_angle_range(rng: AngleRange, features) -> np.ndarray:
    """Min-max map onto [0, pi]; constant columns go to pi/2, outliers are clipped."""
    x = np.asarray(features, dtype=float)
    span = rng.high - rng.low
    flat = span == 0
    scaled = np.pi * (x - rng.low) / np.where(flat, 1.0, span)
    return np.where(flat, np.pi / 2, np.clip(scaled, 0.0, np.pi))


def rescale_to_angle(features, reference=None) -> np.ndarray:
    """Scale ``features`` into [0, pi] using the min/max of ``reference`` (default: itself)."""
    ref = features if reference is None else reference
    return apply_angle_range(fit_angle_range(ref), features)


# --- full pipeline --------------------------------------------------------


@dataclass(frozen=True)
class PrepConfig:
    n_components: int
    per_class: int = 150
    test_fraction: float = 0.2
    seed: int = 0
    reduction: str = "pca"  # or "select": keep the first n_components columns
    pad: str = "tile"  # fill spare qubits by repeating columns ("tile") or with zero angles ("zero")


@dataclass(frozen=True, eq=False)
class PreparedData:
    x_train: np.ndarray
    y_train: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray
    scaler: ScalerParams
    pca: PcaParams | None
    angles: AngleRange


def prepare(dataset: Dataset, cfg: PrepConfig) -> PreparedData:
    """Balance, split, then fit scaler / reduction / angle range on the train split.

    When fewer columns than ``n_components`` exist, the spare encoding slots
    are filled per ``cfg.pad``: ``"tile"`` repeats the available columns
    cyclically, ``"zero"`` uses zero angles (identity encoding).
    """
    balanced = balance_classes(dataset, cfg.per_class, cfg.seed)
    train, test = train_test_split(balanced, cfg.test_fraction, cfg.seed)
    scaler = fit_scaler(train.features)
    xtr = apply_scaler(scaler, train.features)
    xte = apply_scaler(scaler, test.features)
    k = min(cfg.n_components, xtr.shape[1])
    pca = None
    if cfg.reduction == "pca":
        pca = fit_pca(xtr, k)
        xtr, xte = apply_pca(pca, xtr), apply_pca(pca, xte)
    elif cfg.reduction == "select":
        xtr, xte = xtr[:, :k], xte[:, :k]
    else:
        raise DomainError(f"unknown reduction {cfg.reduction!r}")
    angles = fit_angle_range(xtr)
    xtr, xte = apply_angle_range(angles, xtr), apply_angle_range(angles, xte)
    if k < cfg.n_components:
        xtr, xte = _pad(xtr, cfg.n_components, cfg.pad), _pad(xte, cfg.n_components, cfg.pad)
    return PreparedData(xtr, train.labels, xte, test.labels, scaler, pca, angles)


def _pad(x, width: int, how: str) -> np.ndarray:
    if how == "tile":
        return x[:, np.arange(width) % x.shape[1]]
    if how == "zero":
        return np.hstack([x, np.zeros((len(x), width - x.shape[1]))])
    raise DomainError(f"unknown padding {how!r}")
