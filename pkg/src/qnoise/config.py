"""Experiment configuration: a sectioned key-value file parsed with configparser.

Example::

    [dataset]
    path = rodd.csv
    features = Temperature, Humidity, Light, CO2, HumidityRatio
    label = Occupancy

    [model]
    kind = QNN-P
    qubits = 4
    layers = 3

    [train]
    epochs = 100
    seed = 0

    [noise]
    models = bit_flip, depolarizing
    grid_step = 0.1
    placement = after-each-gate

    [output]
    dir = runs/rodd-qnnp

Relative paths resolve against the config file's directory.
"""
from __future__ import annotations

import configparser
import enum
import math
import re
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigError
from .hybrid import Activation
from .noise import NoiseModel, NoisePlacement

SECTIONS = ("dataset", "model", "train", "noise", "output")


class ModelKind(str, enum.Enum):
    QNN_P = "QNN-P"
    QNN_Q = "QNN-Q"
    QNN_H = "QNN-H"


@dataclass(frozen=True)
class DatasetSection:
    path: str
    features: tuple[str, ...]
    label: str
    label_map: tuple[tuple[str, int], ...] = ()
    decimal: str = "."
    per_class: int = 150
    test_fraction: float = 0.2
    reduction: str = "pca"
    pad: str = "tile"

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "label_map", tuple((str(k), int(v)) for k, v in self.label_map))


@dataclass(frozen=True)
class ModelSection:
    kind: ModelKind = ModelKind.QNN_P
    qubits: int = 4
    layers: int = 3  # QNN-P: RY/RX layers; QNN-Q and QNN-H: RealAmplitudes reps
    feature_reps: int = 2  # ZFeatureMap reps (QNN-Q, QNN-H)
    topology: str = "linear"
    activation: Activation = Activation.TANH  # QNN-H only

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        object.__setattr__(self, "activation", Activation(self.activation))


@dataclass(frozen=True)
class TrainSection:
    learning_rate: float = 0.05
    epochs: int = 100
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0


@dataclass(frozen=True)
class NoiseSection:
    models: tuple[NoiseModel, ...] = tuple(NoiseModel)
    grid_step: float = 0.1
    placement: NoisePlacement = NoisePlacement.AFTER_EACH_GATE

    def __post_init__(self):
        object.__setattr__(self, "models", tuple(NoiseModel(m) for m in self.models))
        object.__setattr__(self, "placement", NoisePlacement(self.placement))

    @property
    def grid(self) -> tuple[float, ...]:
        return noise_grid(self.grid_step)


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetSection
    model: ModelSection = field(default_factory=ModelSection)
    train: TrainSection = field(default_factory=TrainSection)
    noise: NoiseSection = field(default_factory=NoiseSection)
    output: str = "runs/default"

    def with_overrides(self, seed=None, out=None, placement=None, grid_step=None) -> "ExperimentConfig":
        """Apply command-line overrides (``None`` leaves a key untouched)."""
        cfg = self
        if seed is not None:
            cfg = replace(cfg, train=replace(cfg.train, seed=int(seed)))
        if out is not None:
            cfg = replace(cfg, output=str(out))
        if placement is not None:
            cfg = replace(cfg, noise=replace(cfg.noise, placement=NoisePlacement(placement)))
        if grid_step is not None:
            _check_step(grid_step, None)
            cfg = replace(cfg, noise=replace(cfg.noise, grid_step=float(grid_step)))
        return cfg

    def snapshot(self) -> dict:
        """Plain JSON-able view of every setting."""
        out = {
            "dataset": asdict(self.dataset),
            "model": asdict(self.model),
            "train": asdict(self.train),
            "noise": asdict(self.noise),
            "output": self.output,
        }
        out["dataset"]["features"] = list(self.dataset.features)
        out["dataset"]["label_map"] = [list(kv) for kv in self.dataset.label_map]
        out["model"]["kind"] = self.model.kind.value
        out["model"]["activation"] = self.model.activation.value
        out["noise"]["models"] = [m.value for m in self.noise.models]
        out["noise"]["placement"] = self.noise.placement.value
        return out

    @classmethod
    def from_snapshot(cls, snap: dict) -> "ExperimentConfig":
        d = dict(snap["dataset"])
        d["features"] = tuple(d["features"])
        d["label_map"] = tuple((str(k), int(v)) for k, v in d["label_map"])
        m = dict(snap["model"])
        m["kind"] = ModelKind(m["kind"])
        m["activation"] = Activation(m["activation"])
        n = dict(snap["noise"])
        n["models"] = tuple(NoiseModel(x) for x in n["models"])
        n["placement"] = NoisePlacement(n["placement"])
        return cls(DatasetSection(**d), ModelSection(**m), TrainSection(**snap["train"]), NoiseSection(**n), snap["output"])


def noise_grid(step: float) -> tuple[float, ...]:
    """0, step, 2*step, ... up to 1 inclusive (1 is appended if step does not divide it)."""
    _check_step(step, None)
    k = int(math.floor(1 / step + 1e-9))
    grid = [round(i * step, 12) for i in range(k + 1)]
    if grid[-1] < 1 - 1e-9:
        grid.append(1.0)
    return tuple(grid)


def _check_step(step, line):
    if not (isinstance(step, (int, float)) and 0 < step <= 1):
        raise ConfigError(f"grid_step must lie in (0, 1], got {step!r}", line)


# --- parsing ------------------------------------------------------------


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    """(section, key) -> 1-based line number, for error messages."""
    lines, section = {}, None
    for i, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip().lower()
            lines[(section, "")] = i
            continue
        m = re.match(r"([^=:#;\s][^=:]*?)\s*[=:]", s)
        if m and section is not None and not raw[:1].isspace():
            lines.setdefault((section, m.group(1).strip().lower()), i)
    return lines


class _Reader:
    def __init__(self, parser, lines):
        self.parser = parser
        self.lines = lines
        self.used: set[tuple[str, str]] = set()

    def line(self, section, key=""):
        return self.lines.get((section, key), self.lines.get((section, "")))

    def get(self, section, key, conv, default=None, required=False):
        self.used.add((section, key))
        if not self.parser.has_option(section, key):
            if required:
                raise ConfigError(f"missing required key [{section}] {key}", self.line(section))
            return default
        raw = self.parser.get(section, key).strip()
        try:
            return conv(raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}", self.line(section, key)) from None

    def fail(self, section, key, message):
        raise ConfigError(f"[{section}] {key}: {message}", self.line(section, key))


def _csv_list(raw: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in raw.split(",") if x.strip())


def _label_map(raw: str) -> tuple[tuple[str, int], ...]:
    out = []
    for item in _csv_list(raw):
        key, sep, val = item.rpartition(":")
        if not sep:
            raise ValueError("label_map entries look like 'raw:label'")
        v = int(val)
        if v not in (0, 1):
            raise ValueError("mapped labels must be 0 or 1")
        out.append((key.strip(), v))
    return tuple(out)


def parse_config(text: str, base_dir: Path | str = ".", check_files: bool = True) -> ExperimentConfig:
    """Parse and validate config text. Errors carry the offending line number."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str.lower
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(f"malformed config: {exc.message.splitlines()[0]}", line) from None
    lines = _key_lines(text)
    unknown = [s for s in parser.sections() if s not in SECTIONS]
    if unknown:
        raise ConfigError(f"unknown section [{unknown[0]}]", lines.get((unknown[0], "")))
    if not parser.has_section("dataset"):
        raise ConfigError("missing [dataset] section")
    r = _Reader(parser, lines)
    base = Path(base_dir)

    # dataset
    path = r.get("dataset", "path", str, required=True)
    resolved = Path(path) if Path(path).is_absolute() else base / path
    if check_files and not resolved.is_file():
        r.fail("dataset", "path", f"file not found: {resolved}")
    features = r.get("dataset", "features", _csv_list, required=True)
    if not features:
        r.fail("dataset", "features", "at least one feature column is needed")
    dataset = DatasetSection(
        path=str(resolved),
        features=features,
        label=r.get("dataset", "label", str, required=True),
        label_map=r.get("dataset", "label_map", _label_map, ()),
        decimal=r.get("dataset", "decimal", str, "."),
        per_class=r.get("dataset", "per_class", int, 150),
        test_fraction=r.get("dataset", "test_fraction", float, 0.2),
        reduction=r.get("dataset", "reduction", str.lower, "pca"),
        pad=r.get("dataset", "pad", str.lower, "tile"),
    )
    if dataset.decimal not in (".", ","):
        r.fail("dataset", "decimal", "must be '.' or ','")
    if dataset.per_class < 1:
        r.fail("dataset", "per_class", "must be >= 1")
    if not 0 < dataset.test_fraction < 1:
        r.fail("dataset", "test_fraction", "must lie in (0, 1)")
    if dataset.reduction not in ("pca", "select"):
        r.fail("dataset", "reduction", "must be 'pca' or 'select'")
    if dataset.pad not in ("tile", "zero"):
        r.fail("dataset", "pad", "must be 'tile' or 'zero'")

    # model
    kind = r.get("model", "kind", lambda s: ModelKind(s.upper()), ModelKind.QNN_P)
    default_qubits = 4 if kind is ModelKind.QNN_P else 2
    model = ModelSection(
        kind=kind,
        qubits=r.get("model", "qubits", int, default_qubits),
        layers=r.get("model", "layers", int, 3),
        feature_reps=r.get("model", "feature_reps", int, 2),
        topology=r.get("model", "topology", str.lower, "linear"),
        activation=r.get("model", "activation", lambda s: Activation(s.lower()), Activation.TANH),
    )
    if not 1 <= model.qubits <= 16:
        r.fail("model", "qubits", "must lie in [1, 16]")
    if model.layers < 1:
        r.fail("model", "layers", "must be >= 1")
    if model.feature_reps < 1:
        r.fail("model", "feature_reps", "must be >= 1")
    if model.topology not in ("linear", "full"):
        r.fail("model", "topology", "must be 'linear' or 'full'")

    # train
    train = TrainSection(
        learning_rate=r.get("train", "learning_rate", float, 0.05),
        epochs=r.get("train", "epochs", int, 100),
        beta1=r.get("train", "beta1", float, 0.9),
        beta2=r.get("train", "beta2", float, 0.999),
        eps=r.get("train", "eps", float, 1e-8),
        seed=r.get("train", "seed", int, 0),
    )
    if not train.learning_rate > 0:
        r.fail("train", "learning_rate", "must be > 0")
    if train.epochs < 0:
        r.fail("train", "epochs", "must be >= 0")
    if not 0 <= train.beta1 < 1:
        r.fail("train", "beta1", "must lie in [0, 1)")
    if not 0 < train.beta2 < 1:
        r.fail("train", "beta2", "must lie in (0, 1)")
    if not train.eps > 0:
        r.fail("train", "eps", "must be > 0")

    # noise
    models = r.get("noise", "models", lambda s: tuple(NoiseModel(m.lower()) for m in _csv_list(s)), tuple(NoiseModel))
    if not models:
        r.fail("noise", "models", "at least one noise model is needed")
    step = r.get("noise", "grid_step", float, 0.1)
    if not 0 < step <= 1:
        r.fail("noise", "grid_step", "must lie in (0, 1]")
    noise = NoiseSection(
        models=models,
        grid_step=step,
        placement=r.get("noise", "placement", lambda s: NoisePlacement(s.lower()), NoisePlacement.AFTER_EACH_GATE),
    )

    out = r.get("output", "dir", str, "runs/default")
    out_path = Path(out) if Path(out).is_absolute() else base / out

    for section in parser.sections():
        for key in parser.options(section):
            if (section, key) not in r.used:
                raise ConfigError(f"unknown key [{section}] {key}", r.line(section, key))
    return ExperimentConfig(dataset, model, train, noise, str(out_path))


def load_config(path, check_files: bool = True) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(encoding="utf-8"), path.parent, check_files)


def render_config(cfg: ExperimentConfig) -> str:
    """Config text that parses back to ``cfg`` (paths are written absolute)."""
    snap = cfg.snapshot()
    d = snap["dataset"]
    parts = [
        "[dataset]",
        f"path = {d['path']}",
        f"features = {', '.join(d['features'])}",
        f"label = {d['label']}",
    ]
    if d["label_map"]:
        parts.append("label_map = " + ", ".join(f"{k}:{v}" for k, v in d["label_map"]))
    for key in ("decimal", "per_class", "test_fraction", "reduction", "pad"):
        parts.append(f"{key} = {d[key]!r}" if isinstance(d[key], float) else f"{key} = {d[key]}")
    parts.append("")
    parts.append("[model]")
    parts += [f"{f.name} = {snap['model'][f.name]}" for f in fields(ModelSection)]
    parts.append("")
    parts.append("[train]")
    parts += [f"{f.name} = {snap['train'][f.name]!r}" for f in fields(TrainSection)]
    parts.append("")
    parts.append("[noise]")
    parts.append("models = " + ", ".join(snap["noise"]["models"]))
    parts.append(f"grid_step = {snap['noise']['grid_step']!r}")
    parts.append(f"placement = {snap['noise']['placement']}")
    parts.append("")
    parts.append("[output]")
    parts.append(f"dir = {snap['output']}")
    return "\n".join(parts) + "\n"
