"""Exact statevector/matrix simulation of the single- and multi-qubit QNNs.

Conventions: matrices are dense ``complex128`` arrays; Kronecker products
use ``np.kron`` (row-major, left factor = most significant qubit).  In the
LCU circuit the ancilla register sits in the most significant bits.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from jqnn.qnn_params import QnnParams

__all__ = [
    "TooLarge",
    "BlockSpec",
    "gate_ry",
    "gate_rz",
    "gate_h",
    "gate_x",
    "kron_all",
    "single_qubit_unitary",
    "single_qubit_amplitudes",
    "amplitude00",
    "lcu_dense_unitary",
    "lcu_amplitude_fast",
    "lcu_amplitudes_fast",
    "lexicographic_box",
    "MAX_DENSE_QUBITS",
]

MAX_DENSE_QUBITS = 14

_H = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)
_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


class TooLarge(RuntimeError):
    """Requested dense simulation exceeds the qubit guard."""


def gate_ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def gate_rz(theta: float) -> np.ndarray:
    e = np.exp(-0.5j * theta)
    return np.array([[e, 0.0], [0.0, np.conj(e)]], dtype=complex)


def gate_h() -> np.ndarray:
    return _H.copy()


def gate_x() -> np.ndarray:
    return _X.copy()


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, mats, np.ones((1, 1), dtype=complex))


def single_qubit_unitary(p: QnnParams, x: float) -> np.ndarray:
    """``R_Z(phi) R_Y(theta_0) R_Z(phi_0) prod_l R_Z(x) R_Y(theta_l) R_Z(phi_l)``."""
    U = gate_rz(p.phi[0]) @ gate_ry(p.theta[0]) @ gate_rz(p.phi[1])
    Rx = gate_rz(x)
    for l in range(1, p.depth + 1):
        U = U @ Rx @ gate_ry(p.theta[l]) @ gate_rz(p.phi[l + 1])
    return U


def single_qubit_amplitudes(p: QnnParams, xs) -> np.ndarray:
    """Vectorized ``<0|U(x)|0>`` for many inputs.

    Propagates the row vector ``<0| U`` through the layers, so each layer
    costs O(len(xs)).
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    head = gate_rz(p.phi[0]) @ gate_ry(p.theta[0]) @ gate_rz(p.phi[1])
    row = np.broadcast_to(head[0], (xs.size, 2)).astype(complex)
    ex = np.exp(-0.5j * xs)
    for l in range(1, p.depth + 1):
        row = row * np.stack([ex, np.conj(ex)], axis=1)
        row = row @ (gate_ry(p.theta[l]) @ gate_rz(p.phi[l + 1]))
    return row[:, 0]


def amplitude00(U: np.ndarray) -> complex:
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {U.shape}")
    return complex(U[0, 0])


def lexicographic_box(L: Sequence[int]) -> list[tuple[int, ...]]:
    """All ``n`` with ``-L <= n <= L`` in lexicographic order."""
    return [tuple(n) for n in itertools.product(*[range(-Lj, Lj + 1) for Lj in L])]


@dataclass(frozen=True)
class BlockSpec:
    """Parameters of the LCU multi-qubit QNN.

    ``ordering[i]`` is the multi-index ``n_i`` selected by ancilla state
    ``|i>``; ``blocks[i][j]`` is the single-qubit QNN acting on data qubit
    ``j`` in that branch (depth ``2|n_{i,j}|``).
    """

    ordering: tuple[tuple[int, ...], ...]
    blocks: tuple[tuple[QnnParams, ...], ...]
    d: int

    def __post_init__(self):
        if len(self.ordering) != len(self.blocks):
            raise ValueError("ordering and blocks must have equal length")
        if not self.ordering:
            raise ValueError("BlockSpec needs at least one block")
        for n, blk in zip(self.ordering, self.blocks):
            if len(n) != self.d or len(blk) != self.d:
                raise ValueError(f"block {n} does not have {self.d} components")
            for nj, pj in zip(n, blk):
                if pj.depth != 2 * abs(nj):
                    raise ValueError(f"block {n}: depth {pj.depth} != 2|{nj}|")

    @property
    def n_blocks(self) -> int:
        return len(self.ordering)

    @property
    def q(self) -> int:
        return (self.n_blocks - 1).bit_length()

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(max(abs(n[j]) for n in self.ordering) for j in range(self.d))

    def is_full_box(self) -> bool:
        return sorted(self.ordering) == lexicographic_box(self.degrees)


def lcu_dense_unitary(spec: BlockSpec, x: Sequence[float]) -> np.ndarray:
    """Full ``(H^q x I)^dagger C(x) (H^q x I)`` as a dense matrix.

    Verification oracle only; raises :class:`TooLarge` above 14 qubits.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size != spec.d:
        raise ValueError(f"input has {x.size} coordinates, spec expects {spec.d}")
    q, d = spec.q, spec.d
    if q + d > MAX_DENSE_QUBITS:
        raise TooLarge(f"dense LCU needs {q + d} qubits; guard is {MAX_DENSE_QUBITS}")
    dim_d = 2**d
    C = np.zeros((2 ** (q + d), 2 ** (q + d)), dtype=complex)
    filler = kron_all([_X] * d)
    for i in range(2**q):
        if i < spec.n_blocks:
            blk = kron_all([single_qubit_unitary(p, x[j]) for j, p in enumerate(spec.blocks[i])])
        else:
            blk = filler
        C[i * dim_d : (i + 1) * dim_d, i * dim_d : (i + 1) * dim_d] = blk
    W = np.kron(kron_all([_H] * q), np.eye(dim_d, dtype=complex))
    return W.conj().T @ C @ W


def lcu_amplitude_fast(spec: BlockSpec, x: Sequence[float]) -> complex:
    """``<0|U(x)|0>`` without building the matrix: ``2^-q`` times the sum of
    the product of single-qubit block amplitudes.  Padding branches
    (``X`` on every data qubit) have zero ``<0|.|0>`` and are skipped."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size != spec.d:
        raise ValueError(f"input has {x.size} coordinates, spec expects {spec.d}")
    total = 0j
    for blk in spec.blocks:
        term = 1 + 0j
        for j, p in enumerate(blk):
            term *= complex(single_qubit_amplitudes(p, x[j])[0])
        total += term
    return total / 2**spec.q


def lcu_amplitudes_fast(spec: BlockSpec, xs) -> np.ndarray:
    """Vectorized :func:`lcu_amplitude_fast` over points ``xs`` of shape ``(P, d)``."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if xs.shape[1] != spec.d:
        raise ValueError(f"points have {xs.shape[1]} coordinates, spec expects {spec.d}")
    # cache per (axis, params) since many blocks share unit monomials
    cache: dict[tuple[int, int], np.ndarray] = {}
    total = np.zeros(xs.shape[0], dtype=complex)
    for blk in spec.blocks:
        term = np.ones(xs.shape[0], dtype=complex)
        for j, p in enumerate(blk):
            key = (j, id(p))
            if key not in cache:
                cache[key] = single_qubit_amplitudes(p, xs[:, j])
            term *= cache[key]
        total += term
    return total / 2**spec.q
