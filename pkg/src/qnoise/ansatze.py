"""Trainable circuit fragments; every rotation is an unbound parameter slot."""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .embeddings import check_pairs, linear_pairs
from .sim import Circuit, Gate


class AnsatzKind(str, enum.Enum):
    REAL_AMPLITUDES = "real_amplitudes"
    EFFICIENT_SU2 = "efficient_su2"
    LAYERED_RY_RX = "layered_ry_rx"


def _entanglers(pairs):
    return [Gate("CNOT", p) for p in pairs]


def real_amplitudes(n_qubits: int, reps: int = 1, pairs=None) -> Circuit:
    """``reps`` blocks of [RY on each qubit, CNOT per pair]; n * reps slots.

    No trailing rotation layer is appended (library versions of this ansatz
    often add one, giving n * (reps + 1) parameters).
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    pairs = linear_pairs(n_qubits) if pairs is None else check_pairs(pairs, n_qubits)
    gates = []
    for _ in range(reps):
        gates += [Gate("RY", (i,)) for i in range(n_qubits)]
        gates += _entanglers(pairs)
    return Circuit(n_qubits, gates)


def efficient_su2(n_qubits: int, reps: int = 1, pairs=None) -> Circuit:
    if reps < 1:
        raise ValueError("reps must be >= 1")
    pairs = linear_pairs(n_qubits) if pairs is None else check_pairs(pairs, n_qubits)
    gates = []
    for _ in range(reps):
        for i in range(n_qubits):
            gates += [Gate("RY", (i,)), Gate("RZ", (i,))]
        gates += _entanglers(pairs)
    return Circuit(n_qubits, gates)


def layered_ryrx(n_qubits: int = 4, layers: int = 3, pairs=None) -> Circuit:
    """``layers`` blocks of [RY then RX on each qubit, linear CNOT chain]."""
    if layers < 1:
        raise ValueError("layers must be >= 1")
    pairs = linear_pairs(n_qubits) if pairs is None else check_pairs(pairs, n_qubits)
    gates = []
    for _ in range(layers):
        for j in range(n_qubits):
            gates += [Gate("RY", (j,)), Gate("RX", (j,))]
        gates += _entanglers(pairs)
    return Circuit(n_qubits, gates)


_BUILDERS = {
    AnsatzKind.REAL_AMPLITUDES: real_amplitudes,
    AnsatzKind.EFFICIENT_SU2: efficient_su2,
    AnsatzKind.LAYERED_RY_RX: layered_ryrx,
}


@dataclass(frozen=True)
class AnsatzSpec:
    kind: AnsatzKind
    n_qubits: int
    reps: int = 1
    pairs: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", AnsatzKind(self.kind))
        if self.n_qubits < 1 or self.reps < 1:
            raise ValueError("n_qubits and reps must be >= 1")
        if self.pairs is not None:
            object.__setattr__(self, "pairs", check_pairs(self.pairs, self.n_qubits))

    @property
    def n_params(self) -> int:
        per_qubit = 1 if self.kind is AnsatzKind.REAL_AMPLITUDES else 2
        return per_qubit * self.n_qubits * self.reps

    def build(self) -> Circuit:
        return _BUILDERS[self.kind](self.n_qubits, self.reps, self.pairs)
