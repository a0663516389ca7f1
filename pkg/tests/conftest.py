import numpy as np
import pytest

from qnoise.sim import Circuit, Gate, PARAMETERIZED

SINGLE_KINDS = ["H", "X", "Y", "Z", "P", "RX", "RY", "RZ"]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_circuit(rng, n_qubits, depth):
    """Random gates with bound angles (no trainable slots)."""
    gates = []
    for _ in range(depth):
        if n_qubits > 1 and rng.random() < 0.3:
            c, t = rng.choice(n_qubits, 2, replace=False)
            gates.append(Gate("CNOT", (c, t)))
        else:
            kind = SINGLE_KINDS[rng.integers(len(SINGLE_KINDS))]
            angle = rng.uniform(-2 * np.pi, 2 * np.pi) if kind in PARAMETERIZED else None
            gates.append(Gate(kind, (rng.integers(n_qubits),), angle))
    return Circuit(n_qubits, gates)


def random_pure_state(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density(rng, dim):
    """Random full-rank-ish mixed state (Ginibre)."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho)
