"""QNN assembly, losses, parameter-shift gradients, Adam and metrics."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .ansatze import AnsatzKind, AnsatzSpec
from .embeddings import EmbeddingKind, EmbeddingSpec
from .errors import ArityError, ConfigError, DomainError
from .noise import KrausChannel, NoisePlacement, expect_z_density, run_circuit_density
from .sim import Circuit, expect_z, run_circuit

SHIFT = math.pi / 2
# |<Z> - threshold| below this counts as a tie and is classified positive
TIE_TOL = 1e-12


class OutputConvention(str, enum.Enum):
    PLUS_MINUS_ONE = "plus_minus_one"
    LOGIT = "logit"


class LossKind(str, enum.Enum):
    MSE = "mse"
    BCE_WITH_LOGITS = "bce_with_logits"


@dataclass(frozen=True)
class QnnModel:
    embedding: EmbeddingSpec
    ansatz: AnsatzSpec
    measured_qubit: int = 0
    output: OutputConvention = OutputConvention.PLUS_MINUS_ONE

    def __post_init__(self):
        object.__setattr__(self, "output", OutputConvention(self.output))
        if self.embedding.n_qubits != self.ansatz.n_qubits:
            raise ArityError("embedding and ansatz qubit counts differ")
        if not 0 <= self.measured_qubit < self.n_qubits:
            raise IndexError(f"measured qubit {self.measured_qubit} out of range")

    @property
    def n_qubits(self) -> int:
        return self.ansatz.n_qubits

    @property
    def n_params(self) -> int:
        return self.ansatz.n_params

    @property
    def loss_kind(self) -> LossKind:
        if self.output is OutputConvention.LOGIT:
            return LossKind.BCE_WITH_LOGITS
        return LossKind.MSE

    def circuit(self, x) -> Circuit:
        return self.embedding.build(x) + self.ansatz.build()


def qnn_p(n_qubits: int = 4, layers: int = 3, pairs=None) -> QnnModel:
    """Angle embedding + layered RY/RX network, MSE on +-1 labels."""
    return QnnModel(
        EmbeddingSpec(EmbeddingKind.ANGLE, n_qubits),
        AnsatzSpec(AnsatzKind.LAYERED_RY_RX, n_qubits, layers, pairs),
        output=OutputConvention.PLUS_MINUS_ONE,
    )


def qnn_q(n_qubits: int = 2, feature_reps: int = 2, ansatz_reps: int = 3, pairs=None) -> QnnModel:
    """ZFeatureMap + RealAmplitudes, raw <Z0> used as a BCE logit."""
    return QnnModel(
        EmbeddingSpec(EmbeddingKind.Z_FEATURE, n_qubits, feature_reps),
        AnsatzSpec(AnsatzKind.REAL_AMPLITUDES, n_qubits, ansatz_reps, pairs),
        output=OutputConvention.LOGIT,
    )


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    epochs: int = 100
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    loss: LossKind = LossKind.MSE

    def __post_init__(self):
        object.__setattr__(self, "loss", LossKind(self.loss))
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")
        if not (0 <= self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ConfigError("beta1 must lie in [0, 1) and beta2 in (0, 1)")
        if not self.eps > 0:
            raise ConfigError("eps must be > 0")


@dataclass(frozen=True, eq=False)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n: int) -> "AdamState":
        return cls(np.zeros(n), np.zeros(n), 0)


@dataclass
class Metrics:
    precision: float
    recall: float
    f1: float
    accuracy: float
    tp: int
    fp: int
    tn: int
    fn: int

    @classmethod
    def from_confusion(cls, tp: int, fp: int, tn: int, fn: int) -> "Metrics":
        total = tp + fp + tn + fn
        if total == 0:
            raise DomainError("no samples to score")
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        return cls(precision, recall, f1, (tp + tn) / total, int(tp), int(fp), int(tn), int(fn))

    @classmethod
    def from_labels(cls, y_true, y_pred) -> "Metrics":
        y_true = np.asarray(y_true).astype(bool)
        y_pred = np.asarray(y_pred).astype(bool)
        if y_true.shape != y_pred.shape:
            raise ArityError("label and prediction lengths differ")
        return cls.from_confusion(
            int(np.sum(y_pred & y_true)),
            int(np.sum(y_pred & ~y_true)),
            int(np.sum(~y_pred & ~y_true)),
            int(np.sum(~y_pred & y_true)),
        )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainHistory:
    loss: list[float] = field(default_factory=list)
    accuracy: list[float] = field(default_factory=list)


# --- forward ------------------------------------------------------------


def _check_params(model: QnnModel, params) -> np.ndarray:
    params = np.asarray(params, dtype=float)
    if params.shape != (model.n_params,):
        raise ArityError(f"expected {model.n_params} parameters, got shape {params.shape}")
    return params


def _check_features(model: QnnModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim not in (1, 2) or x.shape[-1] != model.embedding.n_qubits:
        raise ArityError(f"expected {model.embedding.n_qubits} features, got shape {x.shape}")
    return x


def predict(model: QnnModel, params, x, noise: tuple[KrausChannel, NoisePlacement] | None = None):
    """<Z> on the measured qubit for one sample ``(n,)`` or a batch ``(B, n)``.

    With ``noise=(channel, placement)`` the circuit is evolved as a density matrix.
    """
    params = _check_params(model, params)
    x = _check_features(model, x)
    circuit = model.circuit(x)
    if noise is None:
        z = expect_z(run_circuit(circuit, params), model.measured_qubit)
    else:
        channel, placement = noise
        rho = run_circuit_density(circuit, params, channel, placement)
        z = expect_z_density(rho, model.measured_qubit)
    return float(z) if x.ndim == 1 else np.asarray(z, dtype=float)


def shifted_expectations(model: QnnModel, params, X, input_grad: bool = False):
    """Batched forward pass plus parameter-shift derivatives.

    Returns ``(z, dz_dparams, dz_dx)`` with shapes ``(B,)``, ``(P, B)`` and
    ``(B, F)`` (``None`` unless ``input_grad``). All shifted circuits run in a
    single batched simulation: row 0 is unshifted, rows ``1..P`` shift slot
    ``j`` by +pi/2, rows ``P+1..2P`` by -pi/2, and with ``input_grad`` the
    remaining rows shift each feature-dependent encoding gate.
    """
    params = _check_params(model, params)
    X = _check_features(model, np.atleast_2d(X))
    n_p = model.n_params
    emb = model.embedding.build(X)
    enc = [i for i, g in enumerate(emb.gates) if g.angle_grad] if input_grad else []
    k = 1 + 2 * n_p + 2 * len(enc)

    shifted_params = np.repeat(params[None, :], k, axis=0)
    idx = np.arange(n_p)
    shifted_params[1 + idx, idx] += SHIFT
    shifted_params[1 + n_p + idx, idx] -= SHIFT

    gates = list(emb.gates)
    if enc:
        base = 1 + 2 * n_p
        for e, gi in enumerate(enc):
            offset = np.zeros((k, 1))
            offset[base + 2 * e] = SHIFT
            offset[base + 2 * e + 1] = -SHIFT
            g = gates[gi]
            gates[gi] = g.with_angle(np.asarray(g.angle)[None, :] + offset)
    circuit = Circuit(model.n_qubits, gates) + model.ansatz.build()
    z = expect_z(run_circuit(circuit, shifted_params[:, None, :]), model.measured_qubit)
    z = np.broadcast_to(z, (k, X.shape[0]))

    dparams = (z[1 : 1 + n_p] - z[1 + n_p : 1 + 2 * n_p]) / 2
    dx = None
    if input_grad:
        dx = np.zeros(X.shape)
        base = 1 + 2 * n_p
        for e, gi in enumerate(enc):
            d_angle = (z[base + 2 * e] - z[base + 2 * e + 1]) / 2
            for feature, coeff in emb.gates[gi].angle_grad:
                dx[:, feature] += d_angle * coeff
    return np.array(z[0]), dparams, dx


# --- losses -------------------------------------------------------------


def _pair(preds, labels):
    preds = np.asarray(preds, dtype=float).ravel()
    labels = np.asarray(labels, dtype=float).ravel()
    if preds.size == 0:
        raise DomainError("loss of an empty batch")
    if preds.shape != labels.shape:
        raise ArityError("prediction and label lengths differ")
    return preds, labels


def mse_loss(preds, labels) -> float:
    preds, labels = _pair(preds, labels)
    return float(np.mean((preds - labels) ** 2))


def bce_logits_loss(logits, labels) -> float:
    z, y = _pair(logits, labels)
    return float(np.mean(np.maximum(z, 0) - z * y + np.log1p(np.exp(-np.abs(z)))))


def sigmoid(z):
    z = np.asarray(z, dtype=float)
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1 / (1 + e), e / (1 + e))


def loss_value(kind: LossKind, preds, targets) -> float:
    return mse_loss(preds, targets) if LossKind(kind) is LossKind.MSE else bce_logits_loss(preds, targets)


def loss_derivative(kind: LossKind, preds, targets) -> np.ndarray:
    """dL/dpred_i for the batch-mean loss."""
    preds, targets = _pair(preds, targets)
    n = preds.size
    if LossKind(kind) is LossKind.MSE:
        return 2 * (preds - targets) / n
    return (sigmoid(preds) - targets) / n


def targets_for(kind: LossKind, labels01) -> np.ndarray:
    """Map {0, 1} class labels onto the loss's target convention."""
    y = np.asarray(labels01, dtype=float)
    return 2 * y - 1 if LossKind(kind) is LossKind.MSE else y


def param_shift_grad(model: QnnModel, params, batch, loss_kind: LossKind | None = None) -> np.ndarray:
    """Gradient of the batch loss; ``batch = (X, targets)`` in the loss's convention."""
    X, targets = batch
    if len(X) == 0:
        raise DomainError("empty batch")
    kind = model.loss_kind if loss_kind is None else LossKind(loss_kind)
    z, dz, _ = shifted_expectations(model, params, X)
    return dz @ loss_derivative(kind, z, targets)


# --- optimizer ----------------------------------------------------------


def adam_step(params, grads, state: AdamState, config: TrainConfig):
    params = np.asarray(params, dtype=float)
    grads = np.asarray(grads, dtype=float)
    if params.shape != grads.shape or state.m.shape != params.shape:
        raise ArityError("params, grads and Adam state must have equal length")
    t = state.t + 1
    m = config.beta1 * state.m + (1 - config.beta1) * grads
    v = config.beta2 * state.v + (1 - config.beta2) * grads * grads
    m_hat = m / (1 - config.beta1**t)
    v_hat = v / (1 - config.beta2**t)
    new = params - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.eps)
    return new, AdamState(m, v, t)


def init_params(n: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).uniform(-np.pi, np.pi, n)


def classify(preds, threshold: float = 0.0) -> np.ndarray:
    """1 where pred >= threshold; exact ties (within TIE_TOL) go to the positive class."""
    return (np.asarray(preds) > threshold - TIE_TOL).astype(int)


def train(model: QnnModel, X, y, config: TrainConfig, params0=None):
    """Full-batch Adam on ``(X, y)`` with ``y`` in {0, 1}.

    The loss/accuracy recorded for an epoch are those at the parameters the
    epoch's gradient was taken at.
    """
    X = _check_features(model, np.atleast_2d(X))
    y = np.asarray(y)
    if len(X) == 0:
        raise DomainError("empty training set")
    if len(X) != len(y):
        raise ArityError("feature and label counts differ")
    kind = config.loss
    targets = targets_for(kind, y)
    params = init_params(model.n_params, config.seed) if params0 is None else np.array(params0, dtype=float)
    state = AdamState.zeros(model.n_params)
    history = TrainHistory()
    for _ in range(config.epochs):
        z, dz, _ = shifted_expectations(model, params, X)
        grad = dz @ loss_derivative(kind, z, targets)
        history.loss.append(loss_value(kind, z, targets))
        history.accuracy.append(float(np.mean(classify(z) == y)))
        params, state = adam_step(params, grad, state, config)
    return params, history


def evaluate(model: QnnModel, params, X, y, threshold: float = 0.0, noise=None) -> Metrics:
    if len(X) == 0:
        raise DomainError("empty test set")
    preds = predict(model, params, np.atleast_2d(X), noise)
    return Metrics.from_labels(y, classify(preds, threshold))
