"""Five-qubit state tomography emulation.

Each of the 3^5 settings pre-rotates every qubit by I, X/2 = R_0(π/2) or
Y/2 = R_{π/2}(π/2) and records the 2^5 computational-basis probabilities.
Reconstruction is linear inversion in the Pauli basis (a tensor product of
per-qubit pseudo-inverses) followed by projection onto the closest density
matrix: eigenvalues are projected onto the probability simplex.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from .qsim import apply_single, rotation_matrix

__all__ = [
    "SETTINGS",
    "settings_probabilities",
    "simulate_qst",
    "linear_inversion",
    "project_density",
    "state_fidelity",
]

N_QUBITS = 5
SETTINGS = {
    "I": np.eye(2, dtype=complex),
    "X/2": rotation_matrix(math.pi / 2, 0.0),
    "Y/2": rotation_matrix(math.pi / 2, math.pi / 2),
}
_PAULIS = np.array([
    [[1, 0], [0, 1]],
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


def settings_probabilities(state) -> np.ndarray:
    """Exact outcome probabilities, shape (3,)*5 + (2,)*5."""
    s = np.asarray(state, dtype=complex)
    if s.size != 2**N_QUBITS:
        raise ValueError(f"tomography expects a {N_QUBITS}-qubit state, got length {s.size}")
    rots = list(SETTINGS.values())
    out = np.empty((3,) * N_QUBITS + (2,) * N_QUBITS)
    for setting in itertools.product(range(3), repeat=N_QUBITS):
        v = s
        for q, u in enumerate(setting):
            v = apply_single(v, rots[u], q)
        out[setting] = (np.abs(v) ** 2).reshape((2,) * N_QUBITS)
    return out


@lru_cache(maxsize=None)
def _single_inverse() -> np.ndarray:
    # A1[(u, b), P] = Tr(E_{u,b} P) / 2 with E_{u,b} = U_u^† |b><b| U_u
    rots = list(SETTINGS.values())
    a1 = np.empty((6, 4))
    for u, rot in enumerate(rots):
        for b in range(2):
            proj = np.zeros((2, 2))
            proj[b, b] = 1
            effect = rot.conj().T @ proj @ rot
            for p in range(4):
                a1[2 * u + b, p] = np.real(np.trace(effect @ _PAULIS[p])) / 2
    return np.linalg.pinv(a1)


def linear_inversion(probabilities) -> np.ndarray:
    """Hermitian unit-trace (not necessarily positive) estimate from setting probabilities."""
    p = np.asarray(probabilities, dtype=float)
    if p.shape != (3,) * N_QUBITS + (2,) * N_QUBITS:
        raise ValueError("probabilities must have shape (3,)*5 + (2,)*5")
    # interleave to (u1, b1, u2, b2, ...) and merge each pair into one 6-index
    order = [ax for q in range(N_QUBITS) for ax in (q, N_QUBITS + q)]
    t = np.transpose(p, order).reshape((6,) * N_QUBITS)
    inv = _single_inverse()
    for q in range(N_QUBITS):
        t = np.moveaxis(np.tensordot(inv, t, axes=(1, q)), 0, q)
    # t now holds Tr(rho P) per Pauli string; rho = sum_P t_P P / 2^n
    rho = t.astype(complex)
    for q in range(N_QUBITS):
        rho = np.tensordot(rho, _PAULIS, axes=(0, 0))  # appends (i_q, j_q)
    rho = rho.reshape((2, 2) * N_QUBITS)
    rho = np.transpose(rho, [2 * q for q in range(N_QUBITS)] + [2 * q + 1 for q in range(N_QUBITS)])
    rho = rho.reshape(2**N_QUBITS, 2**N_QUBITS) / 2**N_QUBITS
    return (rho + rho.conj().T) / 2


def _simplex(v: np.ndarray) -> np.ndarray:
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, v.size + 1)
    r = np.nonzero(u - (css - 1) / k > 0)[0][-1]
    shift = (css[r] - 1) / (r + 1)
    return np.maximum(v - shift, 0.0)


def project_density(rho) -> np.ndarray:
    """Closest (Frobenius) positive-semidefinite unit-trace matrix."""
    rho = np.asarray(rho, dtype=complex)
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    return (v * _simplex(w)) @ v.conj().T


def simulate_qst(state, shots: int | None = None, rng: np.random.Generator | None = None) -> np.ndarray:
    """Reconstructed density matrix of a 5-qubit state.

    With ``shots`` set, each setting's probabilities are replaced by multinomial
    frequencies drawn from ``rng``.
    """
    p = settings_probabilities(state)
    if shots is not None:
        if shots < 1:
            raise ValueError("shots must be positive")
        rng = rng if rng is not None else np.random.default_rng()
        flat = p.reshape(3**N_QUBITS, 2**N_QUBITS)
        flat = np.clip(flat, 0, None)
        flat = flat / flat.sum(axis=1, keepdims=True)
        counts = np.array([rng.multinomial(shots, row) for row in flat])
        p = (counts / shots).reshape(p.shape)
    return project_density(linear_inversion(p))


def state_fidelity(rho, state) -> float:
    """<psi|rho|psi> = Tr(rho |psi><psi|)."""
    s = np.asarray(state, dtype=complex)
    return float(np.real(np.vdot(s, np.asarray(rho) @ s)))
