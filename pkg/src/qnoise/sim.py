"""Dense statevector simulation of small qubit registers.

Qubit 0 is the most significant bit of a basis-state index, so on three
qubits ``|q0 q1 q2> = |1 0 0>`` is amplitude index 4. :func:`bit_of` is the
one place that convention is written down; everything else in the package
goes through it or through :func:`local_view`.

All state arrays may carry leading batch axes. Gate angles may be numpy
arrays as well and broadcast against those batch axes, which is how a whole
dataset (and a whole set of parameter-shifted copies) is simulated in one
pass.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .errors import ArityError, InvalidGateError

MAX_QUBITS = 16

PARAMETERIZED = frozenset({"P", "RX", "RY", "RZ"})
FIXED = frozenset({"H", "X", "Y", "Z", "CNOT"})
GATE_KINDS = PARAMETERIZED | FIXED

Angle = Union[float, np.ndarray]

_SQRT1_2 = 1.0 / np.sqrt(2.0)
_FIXED_MATRICES = {
    "H": np.array([[_SQRT1_2, _SQRT1_2], [_SQRT1_2, -_SQRT1_2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
}


def bit_of(index, qubit: int, n_qubits: int):
    """Value of ``qubit``'s bit in basis index ``index`` (qubit 0 = MSB)."""
    return (index >> (n_qubits - 1 - qubit)) & 1


def basis_index(bits: Sequence[int]) -> int:
    """Inverse of :func:`bit_of`: ``bits[q]`` is the value of qubit ``q``."""
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


@dataclass(frozen=True, eq=False)
class Gate:
    """One gate application.

    A parameterized gate with ``angle=None`` is a trainable slot; it is bound
    positionally by :func:`run_circuit`. ``angle_grad`` optionally records the
    derivative of the angle with respect to input features as
    ``((feature_index, d_angle/d_feature), ...)`` so encoding gates can be
    differentiated through.
    """

    kind: str
    qubits: tuple[int, ...]
    angle: Angle | None = None
    angle_grad: tuple = ()

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise InvalidGateError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        arity = 2 if self.kind == "CNOT" else 1
        if len(self.qubits) != arity:
            raise InvalidGateError(f"{self.kind} acts on {arity} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != arity:
            raise InvalidGateError(f"repeated qubit in {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise IndexError(f"negative qubit index in {self.qubits}")
        if self.kind in FIXED and self.angle is not None:
            raise InvalidGateError(f"{self.kind} takes no angle")

    @property
    def trainable(self) -> bool:
        return self.kind in PARAMETERIZED and self.angle is None

    def with_angle(self, angle: Angle) -> "Gate":
        return Gate(self.kind, self.qubits, angle, self.angle_grad)


@dataclass(frozen=True, eq=False)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.qubits) >= self.n_qubits:
                raise IndexError(f"gate {g.kind}{g.qubits} out of range for {self.n_qubits} qubits")

    @property
    def parameter_slots(self) -> tuple[int, ...]:
        """Gate indices of the trainable angles, in binding order."""
        return tuple(i for i, g in enumerate(self.gates) if g.trainable)

    @property
    def n_params(self) -> int:
        return len(self.parameter_slots)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise ArityError(f"cannot compose {self.n_qubits}- and {other.n_qubits}-qubit circuits")
        return Circuit(self.n_qubits, self.gates + other.gates)

    def bind(self, params) -> "Circuit":
        """Fill every trainable slot; ``params[..., j]`` binds slot ``j``."""
        params = np.asarray(params, dtype=float)
        if params.shape[-1:] != (self.n_params,):
            raise ArityError(f"expected {self.n_params} parameters, got shape {params.shape}")
        gates = list(self.gates)
        for j, gi in enumerate(self.parameter_slots):
            value = params[..., j]
            gates[gi] = gates[gi].with_angle(value if value.ndim else float(value))
        return Circuit(self.n_qubits, gates)


@dataclass(frozen=True, eq=False)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape[-1] != 1 << self.n_qubits:
            raise ValueError("amplitude length must be 2**n_qubits")

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    def norm(self):
        return np.sqrt(np.sum(np.abs(self.amplitudes) ** 2, axis=-1))


def gate_matrix(gate: Gate) -> np.ndarray:
    """Matrix of ``gate``; shape ``angle.shape + (2, 2)`` for array angles."""
    kind = gate.kind
    if kind in FIXED:
        return _FIXED_MATRICES[kind].copy()
    if gate.angle is None:
        raise InvalidGateError(f"{kind} gate has no bound angle")
    t = np.asarray(gate.angle, dtype=float)
    c = np.cos(t / 2)
    s = np.sin(t / 2)
    zero = np.zeros_like(t)
    one = np.ones_like(t)
    if kind == "RY":
        rows = [[c, -s], [s, c]]
    elif kind == "RX":
        rows = [[c, -1j * s], [-1j * s, c]]
    elif kind == "RZ":
        rows = [[np.exp(-0.5j * t), zero], [zero, np.exp(0.5j * t)]]
    else:  # P
        rows = [[one, zero], [zero, np.exp(1j * t)]]
    m = np.empty(t.shape + (2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            m[..., i, j] = rows[i][j]
    return m


def local_view(vecs: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """Reshape ``(..., 2**n)`` to ``(..., 2**qubit, 2, 2**(n-qubit-1))`` exposing ``qubit``."""
    return vecs.reshape(vecs.shape[:-1] + (1 << qubit, 2, 1 << (n_qubits - qubit - 1)))


def apply_1q(vecs: np.ndarray, u: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """Apply a 2x2 ``u`` to ``qubit`` of every vector along the last axis.

    ``u`` may be batched; its leading shape broadcasts against ``vecs.shape[:-1]``.
    """
    v = local_view(vecs, qubit, n_qubits)
    a0 = v[..., 0, :]
    a1 = v[..., 1, :]
    u = np.asarray(u)[..., None, None]
    out0 = u[..., 0, 0, :, :] * a0 + u[..., 0, 1, :, :] * a1
    out1 = u[..., 1, 0, :, :] * a0 + u[..., 1, 1, :, :] * a1
    out = np.stack([out0, out1], axis=-2)
    return out.reshape(out.shape[:-3] + (1 << n_qubits,))


@lru_cache(maxsize=None)
def cnot_permutation(control: int, target: int, n_qubits: int) -> np.ndarray:
    idx = np.arange(1 << n_qubits)
    flip = bit_of(idx, control, n_qubits) << (n_qubits - 1 - target)
    return idx ^ flip


def _check_targets(gate: Gate, n_qubits: int):
    if max(gate.qubits) >= n_qubits:
        raise IndexError(f"gate {gate.kind}{gate.qubits} out of range for {n_qubits} qubits")


def apply_gate_array(amps: np.ndarray, gate: Gate, n_qubits: int) -> np.ndarray:
    _check_targets(gate, n_qubits)
    if gate.kind == "CNOT":
        return amps[..., cnot_permutation(*gate.qubits, n_qubits)]
    return apply_1q(amps, gate_matrix(gate), gate.qubits[0], n_qubits)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    return StateVector(state.n_qubits, apply_gate_array(state.amplitudes, gate, state.n_qubits))


def run_circuit(circuit: Circuit, params=()) -> StateVector:
    """Evolve ``|0...0>`` through ``circuit`` with trainable slots bound to ``params``.

    ``params`` has shape ``(..., n_params)``; extra leading axes, together with
    any array-valued fixed angles, become batch axes of the returned state.
    """
    params = np.asarray(params, dtype=float)
    if params.shape[-1:] != (circuit.n_params,):
        raise ArityError(f"expected {circuit.n_params} parameters, got shape {params.shape}")
    bound = circuit.bind(params)
    amps = StateVector.zero(circuit.n_qubits).amplitudes
    for gate in bound.gates:
        amps = apply_gate_array(amps, gate, circuit.n_qubits)
    return StateVector(circuit.n_qubits, amps)


@lru_cache(maxsize=None)
def z_signs(qubit: int, n_qubits: int) -> np.ndarray:
    """+1 where ``qubit`` is 0, -1 where it is 1, over all basis indices."""
    return 1.0 - 2.0 * bit_of(np.arange(1 << n_qubits), qubit, n_qubits)


def expect_z(state: StateVector, qubit: int = 0):
    if not 0 <= qubit < state.n_qubits:
        raise IndexError(f"qubit {qubit} out of range for {state.n_qubits} qubits")
    probs = np.abs(state.amplitudes) ** 2
    return probs @ z_signs(qubit, state.n_qubits)
