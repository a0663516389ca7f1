"""Feature-encoding circuit fragments.

Feature values are used as rotation angles as-is; scale them into [0, pi]
first (see :func:`qnoise.data.rescale_to_angle`). ``x`` may be a single
vector of shape ``(n,)`` or a batch ``(B, n)``; batched features give
array-valued gate angles.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ArityError
from .sim import Circuit, Gate


class EmbeddingKind(str, enum.Enum):
    ANGLE = "angle"
    Z_FEATURE = "z_feature"
    ZZ_FEATURE = "zz_feature"


def linear_pairs(n_qubits: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, i + 1) for i in range(n_qubits - 1))


def full_pairs(n_qubits: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, j) for i in range(n_qubits) for j in range(i + 1, n_qubits))


def entangle_pairs(topology: str, n_qubits: int) -> tuple[tuple[int, int], ...]:
    if topology == "linear":
        return linear_pairs(n_qubits)
    if topology == "full":
        return full_pairs(n_qubits)
    raise ValueError(f"unknown entangling topology {topology!r}")


def check_pairs(pairs, n_qubits: int) -> tuple[tuple[int, int], ...]:
    out = []
    for i, j in pairs:
        if i == j or not (0 <= i < n_qubits and 0 <= j < n_qubits):
            raise IndexError(f"invalid qubit pair ({i}, {j}) for {n_qubits} qubits")
        out.append((int(i), int(j)))
    return tuple(out)


def _columns(x, n_qubits: int | None):
    x = np.asarray(x, dtype=float)
    n = x.shape[-1] if n_qubits is None else n_qubits
    if x.ndim == 0 or x.shape[-1] != n:
        raise ArityError(f"expected {n} features, got shape {x.shape}")
    if x.ndim == 1:
        return [float(v) for v in x]
    return [x[..., i] for i in range(n)]


@dataclass(frozen=True)
class EmbeddingSpec:
    kind: EmbeddingKind
    n_qubits: int
    reps: int = 1
    pairs: tuple[tuple[int, int], ...] | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "kind", EmbeddingKind(self.kind))
        if self.n_qubits < 1 or self.reps < 1:
            raise ValueError("n_qubits and reps must be >= 1")
        if self.pairs is not None:
            object.__setattr__(self, "pairs", check_pairs(self.pairs, self.n_qubits))

    def build(self, x) -> Circuit:
        if self.kind is EmbeddingKind.ANGLE:
            return angle_embed(x, self.n_qubits)
        if self.kind is EmbeddingKind.Z_FEATURE:
            return z_feature_map(x, self.reps, self.n_qubits)
        pairs = linear_pairs(self.n_qubits) if self.pairs is None else self.pairs
        return zz_feature_map(x, self.reps, pairs, self.n_qubits)


def angle_embed(x, n_qubits: int | None = None) -> Circuit:
    """One RY(x_i) on qubit i."""
    cols = _columns(x, n_qubits)
    return Circuit(len(cols), [Gate("RY", (i,), c, ((i, 1.0),)) for i, c in enumerate(cols)])


def z_feature_map(x, reps: int = 1, n_qubits: int | None = None) -> Circuit:
    cols = _columns(x, n_qubits)
    n = len(cols)
    gates = []
    for _ in range(reps):
        gates += [Gate("H", (i,)) for i in range(n)]
        gates += [Gate("P", (i,), 2 * c, ((i, 2.0),)) for i, c in enumerate(cols)]
    return Circuit(n, gates)


def zz_feature_map(x, reps: int = 1, pairs=None, n_qubits: int | None = None) -> Circuit:
    """Like :func:`z_feature_map` plus a CNOT . P(2 x_i x_j) . CNOT block per pair.

    The pair phase sits on the second qubit of the pair.
    """
    cols = _columns(x, n_qubits)
    n = len(cols)
    pairs = linear_pairs(n) if pairs is None else check_pairs(pairs, n)
    gates = []
    for _ in range(reps):
        gates += [Gate("H", (i,)) for i in range(n)]
        gates += [Gate("P", (i,), 2 * c, ((i, 2.0),)) for i, c in enumerate(cols)]
        for i, j in pairs:
            xi, xj = cols[i], cols[j]
            gates.append(Gate("CNOT", (i, j)))
            gates.append(Gate("P", (j,), 2 * xi * xj, ((i, 2 * xj), (j, 2 * xi))))
            gates.append(Gate("CNOT", (i, j)))
    return Circuit(n, gates)
