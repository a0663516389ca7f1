import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qnoise.ansatze import AnsatzSpec
from qnoise.embeddings import EmbeddingSpec
from qnoise.errors import ArityError, ConfigError, DomainError
from qnoise.train import (
    AdamState,
    LossKind,
    Metrics,
    OutputConvention,
    QnnModel,
    TrainConfig,
    adam_step,
    bce_logits_loss,
    classify,
    evaluate,
    init_params,
    loss_value,
    mse_loss,
    param_shift_grad,
    predict,
    qnn_p,
    qnn_q,
    targets_for,
    train,
)


def central_diff(f, x, h=1e-5):
    out = np.zeros_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        out[j] = (f(x + e) - f(x - e)) / (2 * h)
    return out


def toy_set(n=20, seed=0):
    """Two classes split by u0 + u1 = pi with |u0 + u1 - pi| >= 1.0 for u in [0, pi]^2.

    Returned features are u / 2: P(2x) encodings are pi-periodic in x, so the
    toy set lives in [0, pi/2]^2 where that encoding is one-to-one.
    """
    rng = np.random.default_rng(seed)
    pts, labels = [], []
    while len(pts) < n:
        u = rng.uniform(0, np.pi, 2)
        s = u.sum() - np.pi
        if abs(s) >= 1.0:
            pts.append(u / 2)
            labels.append(int(s > 0))
    return np.array(pts), np.array(labels)


# --- predict ------------------------------------------------------------


def test_predict_examples(rng):
    m = qnn_p()
    assert predict(m, np.zeros(24), np.zeros(4)) == pytest.approx(1.0, abs=1e-15)
    assert predict(m, np.zeros(24), [np.pi, 0, 0, 0]) == pytest.approx(-1.0, abs=1e-15)
    vals = predict(m, rng.uniform(-5, 5, 24), rng.uniform(-5, 5, (50, 4)))
    assert np.all(np.abs(vals) <= 1 + 1e-12)


def test_predict_arity():
    m = qnn_p()
    with pytest.raises(ArityError):
        predict(m, np.zeros(23), np.zeros(4))
    with pytest.raises(ArityError):
        predict(m, np.zeros(24), np.zeros(3))


def test_predict_deterministic(rng):
    m = qnn_q()
    p = rng.uniform(-3, 3, m.n_params)
    x = rng.uniform(0, 3, (5, 2))
    assert np.array_equal(predict(m, p, x), predict(m, p, x))


def test_model_rejects_mismatched_widths():
    with pytest.raises(ArityError):
        QnnModel(EmbeddingSpec("angle", 3), AnsatzSpec("real_amplitudes", 2))
    with pytest.raises(IndexError):
        QnnModel(EmbeddingSpec("angle", 2), AnsatzSpec("real_amplitudes", 2), measured_qubit=2)


# --- losses ---------------------------------------------------------------


def test_mse_examples():
    assert mse_loss([1, -1], [1, -1]) == 0.0
    assert mse_loss([1], [-1]) == 4.0
    assert mse_loss([0.5, -0.5], [1, -1]) == pytest.approx(0.25)
    with pytest.raises(DomainError):
        mse_loss([], [])


def test_bce_examples():
    assert bce_logits_loss([0.0], [1]) == pytest.approx(math.log(2))
    assert bce_logits_loss([50.0], [1]) < 1e-20
    assert bce_logits_loss([1.7], [1]) == bce_logits_loss([-1.7], [0])
    with pytest.raises(DomainError):
        bce_logits_loss([], [])


@settings(max_examples=100, deadline=None)
@given(z=st.floats(-12, 12), y=st.sampled_from([0.0, 1.0]))
def test_bce_matches_naive_form(z, y):
    s = 1 / (1 + math.exp(-z))
    naive = -(y * math.log(s) + (1 - y) * math.log(1 - s))
    assert bce_logits_loss([z], [y]) == pytest.approx(naive, rel=1e-9, abs=1e-12)


def test_targets_for():
    np.testing.assert_array_equal(targets_for("mse", [0, 1]), [-1, 1])
    np.testing.assert_array_equal(targets_for("bce_with_logits", [0, 1]), [0, 1])


# --- parameter shift ------------------------------------------------------


def test_shift_rule_on_cosine():
    # one RY slot after a zero-angle embedding: <Z> = cos(theta)
    m = QnnModel(EmbeddingSpec("angle", 1), AnsatzSpec("real_amplitudes", 1, 1))
    x = np.zeros((1, 1))
    for theta in np.linspace(-3, 3, 13):
        # MSE with target 0 and N = 1: dL/d<Z> = 2<Z>, so divide it out
        g = param_shift_grad(m, [theta], (x, [0.0]), "mse")
        z = math.cos(theta)
        if abs(z) > 1e-6:
            assert g[0] / (2 * z) == pytest.approx(-math.sin(theta), abs=1e-12)


def test_zero_gradient_at_fit():
    m = qnn_p(2, 1)
    params = np.zeros(4)
    x = np.array([[0.0, 0.0], [np.pi, 0.0]])
    targets = predict(m, params, x)
    g = param_shift_grad(m, params, (x, targets), "mse")
    assert np.max(np.abs(g)) < 1e-10


def _random_instance(rng):
    emb = ["angle", "z_feature", "zz_feature"][rng.integers(3)]
    ans = ["real_amplitudes", "efficient_su2", "layered_ry_rx"][rng.integers(3)]
    n = int(rng.integers(1, 5))
    model = QnnModel(
        EmbeddingSpec(emb, n, int(rng.integers(1, 3))),
        AnsatzSpec(ans, n, int(rng.integers(1, 4))),
        measured_qubit=int(rng.integers(n)),
    )
    params = rng.uniform(-np.pi, np.pi, model.n_params)
    x = rng.uniform(0, np.pi, (int(rng.integers(1, 8)), n))
    return model, params, x


@pytest.mark.parametrize("seed", range(20))
def test_param_shift_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    model, params, x = _random_instance(rng)
    kind = [LossKind.MSE, LossKind.BCE_WITH_LOGITS][seed % 2]
    targets = targets_for(kind, rng.integers(0, 2, len(x)))
    g = param_shift_grad(model, params, (x, targets), kind)
    fd = central_diff(lambda p: loss_value(kind, predict(model, p, x), targets), params)
    assert np.all(np.abs(g - fd) <= 1e-4 * np.abs(fd) + 1e-7)


# --- Adam -----------------------------------------------------------------


def test_adam_zero_gradient_fixed_point(rng):
    p = rng.normal(size=5)
    new, state = adam_step(p, np.zeros(5), AdamState.zeros(5), TrainConfig())
    np.testing.assert_array_equal(new, p)
    assert state.t == 1


def test_adam_first_step_is_signed_lr(rng):
    cfg = TrainConfig(learning_rate=0.01)
    g = rng.normal(size=6) * 3
    new, state = adam_step(np.zeros(6), g, AdamState.zeros(6), cfg)
    np.testing.assert_allclose(new, -cfg.learning_rate * g / (np.abs(g) + cfg.eps), rtol=1e-12)
    np.testing.assert_allclose(new, -cfg.learning_rate * np.sign(g), rtol=1e-6)


def test_adam_without_momentum(rng):
    cfg = TrainConfig(beta1=0.0)
    state = AdamState.zeros(3)
    for _ in range(3):
        g = rng.normal(size=3)
        _, state = adam_step(np.zeros(3), g, state, cfg)
        np.testing.assert_array_equal(state.m, g)


def test_adam_matches_reference_loop(rng):
    """Hand-unrolled moment recursions with bias correction."""
    cfg = TrainConfig(learning_rate=0.1, beta1=0.8, beta2=0.95, eps=1e-6)
    p = rng.normal(size=2)
    ref = p.copy()
    m = np.zeros(2)
    v = np.zeros(2)
    state = AdamState.zeros(2)
    for t in range(1, 6):
        g = rng.normal(size=2)
        p, state = adam_step(p, g, state, cfg)
        m = cfg.beta1 * m + (1 - cfg.beta1) * g
        v = cfg.beta2 * v + (1 - cfg.beta2) * g**2
        ref = ref - cfg.learning_rate * (m / (1 - cfg.beta1**t)) / (np.sqrt(v / (1 - cfg.beta2**t)) + cfg.eps)
    np.testing.assert_allclose(p, ref, rtol=1e-13)


def test_adam_length_mismatch():
    with pytest.raises(ArityError):
        adam_step(np.zeros(3), np.zeros(2), AdamState.zeros(3), TrainConfig())


@pytest.mark.parametrize("kw", [{"learning_rate": 0}, {"beta1": 1.0}, {"beta2": 0}, {"eps": 0}, {"epochs": -1}])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        TrainConfig(**kw)


# --- metrics --------------------------------------------------------------


def test_metrics_examples():
    m = Metrics.from_labels([0, 1, 1, 0], [0, 1, 1, 0])
    assert (m.precision, m.recall, m.f1, m.accuracy) == (1.0, 1.0, 1.0, 1.0)

    m = Metrics.from_labels([0, 1] * 5, [1] * 10)
    assert (m.precision, m.recall, m.accuracy) == (0.5, 1.0, 0.5)
    assert m.f1 == pytest.approx(2 / 3)

    m = Metrics.from_confusion(40, 10, 35, 15)
    assert m.precision == pytest.approx(0.8)
    assert m.recall == pytest.approx(40 / 55)
    assert m.f1 == pytest.approx(2 * 0.8 * (40 / 55) / (0.8 + 40 / 55))
    assert round(m.recall, 3) == 0.727 and round(m.f1, 3) == 0.762
    assert m.accuracy == 0.75


def test_metrics_zero_division():
    m = Metrics.from_labels([1, 1], [0, 0])
    assert m.precision == 0.0 and m.recall == 0.0 and m.f1 == 0.0


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
def test_metric_identities(tp, fp, tn, fn):
    if tp + fp + tn + fn == 0:
        return
    m = Metrics.from_confusion(tp, fp, tn, fn)
    assert m.accuracy == pytest.approx((tp + tn) / (tp + fp + tn + fn))
    if m.precision + m.recall:
        assert m.f1 == pytest.approx(2 * m.precision * m.recall / (m.precision + m.recall))
    for v in (m.precision, m.recall, m.f1, m.accuracy):
        assert 0 <= v <= 1


def test_classify_ties_go_positive():
    np.testing.assert_array_equal(classify([0.0, 1e-17, -1e-17, -0.1, 0.2]), [1, 1, 1, 0, 1])


def test_evaluate_empty():
    with pytest.raises(DomainError):
        evaluate(qnn_q(), np.zeros(6), np.zeros((0, 2)), np.zeros(0))


# --- training -------------------------------------------------------------


def test_zero_epochs_returns_init():
    x, y = toy_set()
    params, hist = train(qnn_q(), x, y, TrainConfig(epochs=0, seed=3, loss="bce_with_logits"))
    np.testing.assert_array_equal(params, init_params(6, 3))
    assert hist.loss == [] and hist.accuracy == []


def test_init_params_range():
    p = init_params(1000, 0)
    assert p.min() >= -np.pi and p.max() <= np.pi


@pytest.mark.parametrize("seed", [0, 1])
def test_toy_set_learned_qnn_q_shape(seed):
    x, y = toy_set()
    cfg = TrainConfig(epochs=100, seed=seed, learning_rate=0.05, loss="bce_with_logits")
    model = qnn_q()
    params, hist = train(model, x, y, cfg)
    assert len(hist.loss) == len(hist.accuracy) == 100
    assert hist.accuracy[-1] >= 0.9
    assert evaluate(model, params, x, y).accuracy >= 0.9
    assert hist.loss[-1] < hist.loss[0]


def test_training_reproducible():
    x, y = toy_set()
    cfg = TrainConfig(epochs=15, seed=7)
    a = train(qnn_p(2, 2), x, y, cfg)
    b = train(qnn_p(2, 2), x, y, cfg)
    assert np.array_equal(a[0], b[0]) and a[1].loss == b[1].loss
