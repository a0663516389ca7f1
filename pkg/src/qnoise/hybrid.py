"""Dense input layer -> 2-qubit QNN -> scalar affine output, trained end to end."""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import ArityError, StateError
from .train import (
    AdamState,
    LossKind,
    QnnModel,
    TrainConfig,
    TrainHistory,
    adam_step,
    bce_logits_loss,
    classify,
    predict,
    qnn_q,
    shifted_expectations,
    sigmoid,
)


class Activation(str, enum.Enum):
    IDENTITY = "identity"
    TANH = "tanh"
    RELU = "relu"
    SIGMOID = "sigmoid"


def encode_angles(z, activation: Activation):
    """Activation followed by the map into rotation angles; returns ``(a, da/dz)``.

    Bounded activations are stretched onto [0, pi]; unbounded ones pass through.
    """
    if activation is Activation.TANH:
        h = np.tanh(z)
        return (h + 1) * np.pi / 2, (1 - h * h) * np.pi / 2
    if activation is Activation.SIGMOID:
        s = sigmoid(z)
        return s * np.pi, np.pi * s * (1 - s)
    if activation is Activation.RELU:
        return np.maximum(z, 0.0), (z > 0).astype(float)
    return np.array(z, dtype=float), np.ones_like(z, dtype=float)


@dataclass(frozen=True, eq=False)
class HybridModel:
    w1: np.ndarray  # (n_hidden, n_features)
    b1: np.ndarray  # (n_hidden,)
    quantum: QnnModel
    qparams: np.ndarray
    w2: float
    b2: float
    activation: Activation = Activation.TANH

    def __post_init__(self):
        object.__setattr__(self, "activation", Activation(self.activation))
        w1 = np.atleast_2d(np.asarray(self.w1, dtype=float))
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "b1", np.asarray(self.b1, dtype=float).reshape(-1))
        object.__setattr__(self, "qparams", np.asarray(self.qparams, dtype=float).reshape(-1))
        object.__setattr__(self, "w2", float(self.w2))
        object.__setattr__(self, "b2", float(self.b2))
        if self.b1.shape != (w1.shape[0],):
            raise ArityError("input-layer weight and bias shapes disagree")
        if w1.shape[0] != self.quantum.embedding.n_qubits:
            raise ArityError("input layer width must equal the quantum embedding arity")
        if self.qparams.shape != (self.quantum.n_params,):
            raise ArityError("quantum parameter count mismatch")

    @property
    def n_features(self) -> int:
        return self.w1.shape[1]

    def vector(self) -> np.ndarray:
        """All trainable values, ordered (w1, b1, qparams, w2, b2)."""
        return np.concatenate([self.w1.ravel(), self.b1, self.qparams, [self.w2, self.b2]])

    def with_vector(self, theta) -> "HybridModel":
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.vector().size,):
            raise ArityError(f"expected {self.vector().size} values, got shape {theta.shape}")
        n1 = self.w1.size
        h = self.b1.size
        nq = self.qparams.size
        return replace(
            self,
            w1=theta[:n1].reshape(self.w1.shape),
            b1=theta[n1 : n1 + h],
            qparams=theta[n1 + h : n1 + h + nq],
            w2=theta[-2],
            b2=theta[-1],
        )


def make_hybrid(n_features: int, seed: int = 0, activation=Activation.TANH, quantum: QnnModel | None = None) -> HybridModel:
    """Fresh model; classical weights use the fan-in uniform rule, quantum ones uniform(-pi, pi)."""
    quantum = qnn_q() if quantum is None else quantum
    rng = np.random.default_rng(seed)
    n_hidden = quantum.embedding.n_qubits
    bound = 1 / np.sqrt(n_features)
    return HybridModel(
        w1=rng.uniform(-bound, bound, (n_hidden, n_features)),
        b1=rng.uniform(-bound, bound, n_hidden),
        quantum=quantum,
        qparams=rng.uniform(-np.pi, np.pi, quantum.n_params),
        w2=rng.uniform(-1, 1),
        b2=rng.uniform(-1, 1),
        activation=activation,
    )


def hybrid_forward(model: HybridModel, x):
    """Logit(s) for one sample or a batch, plus the cache needed by backward."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != model.n_features or x.ndim not in (1, 2):
        raise ArityError(f"expected {model.n_features} features, got shape {x.shape}")
    xb = np.atleast_2d(x)
    pre = xb @ model.w1.T + model.b1
    a, da_dpre = encode_angles(pre, model.activation)
    q = predict(model.quantum, model.qparams, a)
    logit = model.w2 * q + model.b2
    cache = {"x": xb, "pre": pre, "a": a, "da_dpre": da_dpre, "q": q}
    return (float(logit[0]) if x.ndim == 1 else logit), cache


def hybrid_backward(model: HybridModel, cache, labels) -> dict:
    """Gradients of the batch-mean BCE loss for every parameter group.

    Quantum-parameter and encoding-angle derivatives come from the
    parameter-shift rule at the cached angles.
    """
    if not cache or "a" not in cache:
        raise StateError("hybrid_backward needs the cache from hybrid_forward")
    y = np.atleast_1d(np.asarray(labels, dtype=float))
    x, a = cache["x"], cache["a"]
    if y.shape != (x.shape[0],):
        raise ArityError("label count does not match cached batch")
    q, dq_dtheta, dq_da = shifted_expectations(model.quantum, model.qparams, a, input_grad=True)
    logit = model.w2 * q + model.b2
    dlogit = (sigmoid(logit) - y) / y.size
    dq = dlogit * model.w2
    dpre = (dq[:, None] * dq_da) * cache["da_dpre"]
    return {
        "w1": dpre.T @ x,
        "b1": dpre.sum(axis=0),
        "qparams": dq_dtheta @ dq,
        "w2": float(dlogit @ q),
        "b2": float(dlogit.sum()),
    }


def flatten_grads(grads: dict) -> np.ndarray:
    return np.concatenate([grads["w1"].ravel(), grads["b1"], grads["qparams"], [grads["w2"], grads["b2"]]])


def hybrid_loss(model: HybridModel, X, y) -> float:
    logits, _ = hybrid_forward(model, np.atleast_2d(X))
    return bce_logits_loss(logits, y)


def hybrid_predict_labels(model: HybridModel, X) -> np.ndarray:
    logits, _ = hybrid_forward(model, np.atleast_2d(X))
    return classify(logits)


def hybrid_train(model: HybridModel, X, y, config: TrainConfig):
    """Full-batch Adam over the concatenated classical + quantum parameters."""
    if LossKind(config.loss) is not LossKind.BCE_WITH_LOGITS:
        raise ValueError("the hybrid model is trained with BCE-with-logits")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y)
    if len(X) != len(y):
        raise ArityError("feature and label counts differ")
    theta = model.vector()
    state = AdamState.zeros(theta.size)
    history = TrainHistory()
    for _ in range(config.epochs):
        logits, cache = hybrid_forward(model, X)
        history.loss.append(bce_logits_loss(logits, y))
        history.accuracy.append(float(np.mean(classify(logits) == y)))
        grad = flatten_grads(hybrid_backward(model, cache, y))
        theta, state = adam_step(theta, grad, state, config)
        model = model.with_vector(theta)
    return model, history
