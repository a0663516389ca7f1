import numpy as np
import pytest

from qnoise.errors import CPTPViolationError, DomainError, NumericalIntegrityError
from qnoise.noise import (
    DensityMatrix,
    KrausChannel,
    NoiseModel,
    NoisePlacement,
    apply_channel,
    expect_z_density,
    make_channel,
    run_circuit_density,
)
from qnoise.sim import Circuit, Gate, StateVector, run_circuit
from qnoise.train import classify, predict, qnn_p

from conftest import random_circuit, random_density, random_pure_state
from oracle import X, embed_1q

GRID = np.round(np.linspace(0, 1, 11), 10)
MODELS = list(NoiseModel)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)


def dm(rho):
    return DensityMatrix(int(np.log2(len(rho))), np.asarray(rho, dtype=complex))


def kraus_oracle(rho, ops, qubit, n):
    """Sum of kron-expanded E rho E^dag."""
    out = np.zeros_like(rho)
    for e in ops:
        full = embed_1q(e, qubit, n)
        out += full @ rho @ full.conj().T
    return out


@pytest.mark.parametrize("model", MODELS)
@pytest.mark.parametrize("p", GRID)
def test_completeness(model, p):
    ch = make_channel(model, p)
    total = sum(e.conj().T @ e for e in ch.operators)
    assert np.max(np.abs(total - np.eye(2))) < 1e-12


@pytest.mark.parametrize("p", [-0.1, 1.0001, np.nan])
def test_parameter_domain(p):
    with pytest.raises(DomainError):
        make_channel("bit_flip", p)


def test_bit_flip_zero_is_identity(rng):
    ch = make_channel("bit_flip", 0.0)
    np.testing.assert_allclose(ch.operators[1], 0)
    rho = random_density(rng, 2)
    np.testing.assert_allclose(apply_channel(dm(rho), ch, 0).elements, rho, atol=1e-15)


def test_depolarizing_weights():
    eta = 0.3
    ch = make_channel("depolarizing", eta)
    assert len(ch.operators) == 4
    weights = [np.trace(e.conj().T @ e).real / 2 for e in ch.operators]
    np.testing.assert_allclose(weights, [1 - eta, eta / 3, eta / 3, eta / 3], atol=1e-15)


def test_amplitude_damping_standard_form():
    for beta in (0, 0.25, 0.5, 1):
        e0, e1 = make_channel("amplitude_damping", beta).operators
        np.testing.assert_allclose(e0, [[1, 0], [0, np.sqrt(1 - beta)]])
        np.testing.assert_allclose(e1, [[0, np.sqrt(beta)], [0, 0]])
        np.testing.assert_allclose(e0.conj().T @ e0 + e1.conj().T @ e1, np.eye(2), atol=1e-15)


def test_bit_flip_half_on_ground_state():
    out = apply_channel(DensityMatrix.zero(1), make_channel("bit_flip", 0.5), 0)
    np.testing.assert_allclose(out.elements, np.diag([0.5, 0.5]), atol=1e-15)


def test_phase_damping_on_plus_state():
    lam = 0.36
    plus = np.full((2, 2), 0.5, dtype=complex)
    out = apply_channel(dm(plus), make_channel("phase_damping", lam), 0).elements
    np.testing.assert_allclose(np.diag(out), [0.5, 0.5], atol=1e-15)
    np.testing.assert_allclose(out[0, 1], 0.5 * np.sqrt(1 - lam), atol=1e-15)


def test_incomplete_channel_rejected():
    bad = KrausChannel(NoiseModel.BIT_FLIP, 0.2, (np.eye(2), 0.5 * X))
    with pytest.raises(CPTPViolationError):
        apply_channel(DensityMatrix.zero(1), bad, 0)
    with pytest.raises(IndexError):
        apply_channel(DensityMatrix.zero(1), make_channel("bit_flip", 0.1), 1)


@pytest.mark.parametrize("model", MODELS)
def test_apply_channel_matches_kron_oracle(model, rng):
    for _ in range(10):
        n = int(rng.integers(1, 4))
        q = int(rng.integers(n))
        ch = make_channel(model, rng.random())
        rho = random_density(rng, 2**n)
        out = apply_channel(dm(rho), ch, q).elements
        assert np.max(np.abs(out - kraus_oracle(rho, ch.operators, q, n))) < 1e-12


@pytest.mark.parametrize("model", MODELS)
def test_cptp_invariants_random_states(model, rng):
    for _ in range(30):
        n = int(rng.integers(1, 4))
        if rng.random() < 0.5:
            rho = random_density(rng, 2**n)
        else:
            psi = random_pure_state(rng, 2**n)
            rho = np.outer(psi, psi.conj())
        out = apply_channel(dm(rho), make_channel(model, rng.random()), int(rng.integers(n))).elements
        assert abs(np.trace(out) - 1) < 1e-12
        assert np.max(np.abs(out - out.conj().T)) < 1e-12
        assert np.linalg.eigvalsh(out).min() >= -1e-10


def _z_law(model, p, z):
    return {
        NoiseModel.BIT_FLIP: (1 - 2 * p) * z,
        NoiseModel.BIT_PHASE_FLIP: (1 - 2 * p) * z,
        NoiseModel.PHASE_FLIP: z,
        NoiseModel.PHASE_DAMPING: z,
        NoiseModel.DEPOLARIZING: (1 - 4 * p / 3) * z,
        NoiseModel.AMPLITUDE_DAMPING: (1 - p) * z + p,
    }[model]


@pytest.mark.parametrize("model", MODELS)
def test_z_scaling_laws(model, rng):
    for _ in range(100):
        rho = random_density(rng, 2)
        p = rng.random()
        z0 = expect_z_density(dm(rho), 0)
        z1 = expect_z_density(apply_channel(dm(rho), make_channel(model, p), 0), 0)
        assert abs(z1 - _z_law(model, p, z0)) < 1e-10


def test_depolarizing_z_trace_algebra(rng):
    # tr(Z zeta) with X rho X, Y rho Y, Z rho Z expanded by hand
    rho = random_density(rng, 2)
    eta = 0.45
    zeta = (1 - eta) * rho + eta / 3 * (X @ rho @ X + Y @ rho @ Y + Z @ rho @ Z)
    z_direct = np.trace(Z @ zeta).real
    z_chan = expect_z_density(apply_channel(dm(rho), make_channel("depolarizing", eta), 0), 0)
    assert abs(z_direct - z_chan) < 1e-14
    assert abs(z_direct - (1 - 4 * eta / 3) * np.trace(Z @ rho).real) < 1e-14


def test_depolarizing_purity_non_increasing(rng):
    for _ in range(20):
        psi = random_pure_state(rng, 2)
        rho = dm(np.outer(psi, psi.conj()))
        purities = [apply_channel(rho, make_channel("depolarizing", p), 0).purity() for p in np.linspace(0, 0.75, 16)]
        assert np.all(np.diff(purities) <= 1e-12)


def test_expect_z_density_examples():
    assert abs(expect_z_density(dm(np.eye(2) / 2), 0)) < 1e-15
    assert expect_z_density(DensityMatrix.zero(1), 0) == 1.0
    with pytest.raises(NumericalIntegrityError):
        expect_z_density(dm(np.diag([0.5 + 1e-6j, 0.5])), 0)


@pytest.mark.parametrize("seed", range(50))
def test_density_p0_matches_statevector(seed):
    rng = np.random.default_rng(500 + seed)
    n = int(rng.integers(1, 5))
    c = random_circuit(rng, n, int(rng.integers(0, 31)))
    psi = run_circuit(c).amplitudes
    ref = np.outer(psi, psi.conj())
    plain = run_circuit_density(c).elements
    model = MODELS[seed % len(MODELS)]
    placement = list(NoisePlacement)[seed % 2]
    noisy0 = run_circuit_density(c, (), make_channel(model, 0.0), placement).elements
    assert np.max(np.abs(plain - ref)) < 1e-10
    assert np.max(np.abs(noisy0 - ref)) < 1e-10


def test_bell_fully_depolarized():
    bell = Circuit(2, [Gate("H", (0,)), Gate("CNOT", (0, 1))])
    rho = run_circuit_density(bell, (), make_channel("depolarizing", 1.0), "end-of-circuit")
    assert abs(expect_z_density(rho, 0)) < 1e-12


def test_after_each_gate_matches_manual_insertion(rng):
    c = random_circuit(rng, 3, 12)
    ch = make_channel("amplitude_damping", 0.2)
    rho = DensityMatrix.zero(3)
    from qnoise.noise import apply_gate_density

    for g in c.gates:
        rho = DensityMatrix(3, apply_gate_density(rho.elements, g, 3))
        for q in g.qubits:
            rho = apply_channel(rho, ch, q)
    out = run_circuit_density(c, (), ch, "after-each-gate").elements
    assert np.max(np.abs(out - rho.elements)) < 1e-13


def test_qnn_p_bit_flip_end_of_circuit_scaling(rng):
    model = qnn_p()
    params = rng.uniform(-np.pi, np.pi, model.n_params)
    x = rng.uniform(0, np.pi, (8, 4))
    clean = predict(model, params, x)
    for eta in (0.1, 0.3, 0.7):
        noisy = predict(model, params, x, (make_channel("bit_flip", eta), NoisePlacement.END_OF_CIRCUIT))
        np.testing.assert_allclose(noisy, (1 - 2 * eta) * clean, atol=1e-10)


def test_bit_flip_sign_decisions(rng):
    model = qnn_p()
    params = rng.uniform(-np.pi, np.pi, model.n_params)
    x = rng.uniform(0, np.pi, (40, 4))
    clean = classify(predict(model, params, x))
    for eta in (0.1, 0.3, 0.49, 0.51, 0.8, 1.0):
        noisy = classify(predict(model, params, x, (make_channel("bit_flip", eta), "end-of-circuit")))
        if eta < 0.5:
            np.testing.assert_array_equal(noisy, clean)
        else:
            np.testing.assert_array_equal(noisy, 1 - clean)


def test_batched_density_matches_single(rng):
    model = qnn_p()
    params = rng.uniform(-np.pi, np.pi, model.n_params)
    x = rng.uniform(0, np.pi, (3, 4))
    noise = (make_channel("phase_damping", 0.4), NoisePlacement.AFTER_EACH_GATE)
    batch = predict(model, params, x, noise)
    singles = [predict(model, params, xi, noise) for xi in x]
    np.testing.assert_allclose(batch, singles, atol=1e-14)
