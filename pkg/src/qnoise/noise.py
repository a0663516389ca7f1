"""Single-qubit Kraus noise and density-matrix circuit evolution."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import CPTPViolationError, DomainError, NumericalIntegrityError
from .sim import (
    Circuit,
    Gate,
    StateVector,
    apply_1q,
    cnot_permutation,
    gate_matrix,
    z_signs,
)
from .errors import ArityError

COMPLETENESS_TOL = 1e-12


class NoiseModel(str, enum.Enum):
    BIT_FLIP = "bit_flip"
    PHASE_FLIP = "phase_flip"
    BIT_PHASE_FLIP = "bit_phase_flip"
    DEPOLARIZING = "depolarizing"
    PHASE_DAMPING = "phase_damping"
    AMPLITUDE_DAMPING = "amplitude_damping"


class NoisePlacement(str, enum.Enum):
    AFTER_EACH_GATE = "after-each-gate"
    END_OF_CIRCUIT = "end-of-circuit"


_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_P0 = np.array([[1, 0], [0, 0]], dtype=complex)  # |0><0|
_P1 = np.array([[0, 0], [0, 1]], dtype=complex)  # |1><1|
_LOWER = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|


@dataclass(frozen=True, eq=False)
class KrausChannel:
    model: NoiseModel
    parameter: float
    operators: tuple[np.ndarray, ...]

    def completeness_error(self) -> float:
        total = sum(e.conj().T @ e for e in self.operators)
        return float(np.max(np.abs(total - _I)))


def make_channel(model, p: float) -> KrausChannel:
    model = NoiseModel(model)
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"noise parameter must lie in [0, 1], got {p}")
    keep = np.sqrt(1.0 - p)
    flip = np.sqrt(p)
    if model is NoiseModel.BIT_FLIP:
        ops = (keep * _I, flip * _X)
    elif model is NoiseModel.PHASE_FLIP:
        ops = (keep * _I, flip * _Z)
    elif model is NoiseModel.BIT_PHASE_FLIP:
        ops = (keep * _I, flip * _Y)
    elif model is NoiseModel.DEPOLARIZING:
        w = np.sqrt(p / 3.0)
        ops = (keep * _I, w * _X, w * _Y, w * _Z)
    elif model is NoiseModel.PHASE_DAMPING:
        ops = (_P0 + keep * _P1, flip * _P1)
    else:
        # E0 keeps the |0><0| term so that sum E^dag E = I.
        ops = (_P0 + keep * _P1, flip * _LOWER)
    return KrausChannel(model, p, ops)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    n_qubits: int
    elements: np.ndarray

    @classmethod
    def zero(cls, n_qubits: int) -> "DensityMatrix":
        d = 1 << n_qubits
        rho = np.zeros((d, d), dtype=complex)
        rho[0, 0] = 1.0
        return cls(n_qubits, rho)

    @classmethod
    def from_state(cls, state: StateVector) -> "DensityMatrix":
        a = state.amplitudes
        return cls(state.n_qubits, a[..., :, None] * a[..., None, :].conj())

    def trace(self):
        return np.trace(self.elements, axis1=-2, axis2=-1)

    def purity(self):
        return np.real(np.einsum("...ij,...ji->...", self.elements, self.elements))


def conjugate_1q(rho: np.ndarray, u: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """``u rho u^dag`` with ``u`` acting on one qubit; ``u`` may be batched."""
    u = np.asarray(u)[..., None, :, :]
    # acting along the last axis maps M -> M u^T, so conj(u) there gives rho u^dag
    right = apply_1q(rho, u.conj(), qubit, n_qubits)
    left = apply_1q(np.swapaxes(right, -1, -2), u, qubit, n_qubits)
    return np.swapaxes(left, -1, -2)


def _apply_channel_array(rho, channel, qubit, n_qubits):
    out = None
    for e in channel.operators:
        term = conjugate_1q(rho, e, qubit, n_qubits)
        out = term if out is None else out + term
    return out


def _check_channel(channel: KrausChannel):
    err = channel.completeness_error()
    if err > COMPLETENESS_TOL:
        raise CPTPViolationError(f"Kraus operators not complete (deviation {err:.3g})")


def apply_channel(rho: DensityMatrix, channel: KrausChannel, qubit: int) -> DensityMatrix:
    _check_channel(channel)
    if not 0 <= qubit < rho.n_qubits:
        raise IndexError(f"qubit {qubit} out of range for {rho.n_qubits} qubits")
    return DensityMatrix(rho.n_qubits, _apply_channel_array(rho.elements, channel, qubit, rho.n_qubits))


def apply_gate_density(rho: np.ndarray, gate: Gate, n_qubits: int) -> np.ndarray:
    if max(gate.qubits) >= n_qubits:
        raise IndexError(f"gate {gate.kind}{gate.qubits} out of range for {n_qubits} qubits")
    if gate.kind == "CNOT":
        perm = cnot_permutation(*gate.qubits, n_qubits)
        return rho[..., perm, :][..., :, perm]
    return conjugate_1q(rho, gate_matrix(gate), gate.qubits[0], n_qubits)


def run_circuit_density(
    circuit: Circuit,
    params=(),
    channel: KrausChannel | None = None,
    placement=NoisePlacement.AFTER_EACH_GATE,
) -> DensityMatrix:
    """Evolve ``|0..0><0..0|`` through ``circuit``, optionally inserting ``channel``.

    AFTER_EACH_GATE applies the channel to every qubit a gate touches right
    after that gate; END_OF_CIRCUIT applies it once to each qubit at the end.
    Batch semantics match :func:`qnoise.sim.run_circuit`.
    """
    placement = NoisePlacement(placement)
    params = np.asarray(params, dtype=float)
    if params.shape[-1:] != (circuit.n_params,):
        raise ArityError(f"expected {circuit.n_params} parameters, got shape {params.shape}")
    if channel is not None:
        _check_channel(channel)
    n = circuit.n_qubits
    rho = DensityMatrix.zero(n).elements
    per_gate = channel is not None and placement is NoisePlacement.AFTER_EACH_GATE
    for gate in circuit.bind(params).gates:
        rho = apply_gate_density(rho, gate, n)
        if per_gate:
            for q in gate.qubits:
                rho = _apply_channel_array(rho, channel, q, n)
    if channel is not None and placement is NoisePlacement.END_OF_CIRCUIT:
        for q in range(n):
            rho = _apply_channel_array(rho, channel, q, n)
    return DensityMatrix(n, rho)


def expect_z_density(rho: DensityMatrix, qubit: int = 0):
    if not 0 <= qubit < rho.n_qubits:
        raise IndexError(f"qubit {qubit} out of range for {rho.n_qubits} qubits")
    diag = np.diagonal(rho.elements, axis1=-2, axis2=-1)
    value = diag @ z_signs(qubit, rho.n_qubits)
    if np.max(np.abs(np.imag(value))) > 1e-8:
        raise NumericalIntegrityError(f"<Z> has imaginary part {np.max(np.abs(np.imag(value))):.3g}")
    return np.real(value)
