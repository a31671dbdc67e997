"""Spin-1/2 quantum tetrahedra: the two-dimensional rank-4 intertwiner space.

Face ordering is |s1 s2 s3 s4> with ↑ before ↓ (index 0 = ↑), so a 16-vector
index reads the four spins as bits, most significant first. The intermediate
coupling is (12)(34): |0> has J12 = 0, |1> has J12 = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .su2 import CoherentHalfSpin, coherent_spinor

__all__ = [
    "IntertwinerBloch",
    "IntertwinerBasis",
    "FaceNormals",
    "REGULAR_NORMALS",
    "E_PLUS",
    "E_MINUS",
    "basis_states",
    "bloch_vector",
    "embed",
    "project_coherent",
    "project_spinors",
    "closure_residual",
    "spin_operators",
    "restrict",
    "dihedral_formula",
    "dihedral_operator",
    "volume_matrix",
    "volume_expectation",
    "orientation",
    "DIHEDRAL_PAIRS",
]

DIHEDRAL_PAIRS = ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4))

# face normals of a regular tetrahedron (outward, summing to zero)
REGULAR_NORMALS = np.array([
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
]) / math.sqrt(3.0)


@dataclass(frozen=True)
class IntertwinerBloch:
    theta: float
    phi: float

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi):
            raise ValueError(f"theta={self.theta} outside [0, pi]")

    @property
    def state(self) -> np.ndarray:
        """Coefficients in the {|0>, |1>} intertwiner basis."""
        return bloch_vector(self.theta, self.phi)


E_PLUS = IntertwinerBloch(math.pi / 2, math.pi / 2)
E_MINUS = IntertwinerBloch(math.pi / 2, 3 * math.pi / 2)


class IntertwinerBasis(NamedTuple):
    zero: np.ndarray
    one: np.ndarray

    def matrix(self) -> np.ndarray:
        """Rows are |0> and |1>; shape (2, 16)."""
        return np.stack([self.zero, self.one])


@dataclass(frozen=True)
class FaceNormals:
    normals: tuple

    def __init__(self, normals, atol: float = 1e-9):
        arr = np.asarray(normals, dtype=float)
        if arr.shape != (4, 3):
            raise ValueError(f"expected four 3-vectors, got shape {arr.shape}")
        norms = np.linalg.norm(arr, axis=1)
        if np.any(np.abs(norms - 1.0) > atol):
            raise ValueError(f"face normals must be unit vectors, norms {norms}")
        object.__setattr__(self, "normals", tuple(map(tuple, arr)))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.normals)

    def spinors(self) -> np.ndarray:
        return np.array([CoherentHalfSpin.from_vector(n).state for n in self.normals])


def _ket(*spins: str) -> np.ndarray:
    up, dn = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    v = np.array([1.0])
    for s in spins:
        v = np.kron(v, up if s == "u" else dn)
    return v


@lru_cache(maxsize=None)
def _basis() -> tuple[np.ndarray, np.ndarray]:
    singlet = _ket("u", "d") - _ket("d", "u")
    triplet0 = _ket("u", "d") + _ket("d", "u")
    zero = 0.5 * np.kron(singlet, singlet)
    one = (
        _ket("d", "d", "u", "u") + _ket("u", "u", "d", "d") - 0.5 * np.kron(triplet0, triplet0)
    ) / math.sqrt(3.0)
    zero.setflags(write=False)
    one.setflags(write=False)
    return zero, one


def basis_states() -> IntertwinerBasis:
    zero, one = _basis()
    return IntertwinerBasis(zero.astype(complex), one.astype(complex))


def bloch_vector(theta, phi) -> np.ndarray:
    return coherent_spinor(theta, phi)


def embed(t: IntertwinerBloch) -> np.ndarray:
    zero, one = _basis()
    c0, c1 = t.state
    return c0 * zero + c1 * one


def project_spinors(spinors) -> np.ndarray:
    """(<0|psi>, <1|psi>) for psi the tensor product of four 2-spinors.

    Accepts shape (..., 4, 2) and returns (..., 2).
    """
    s = np.asarray(spinors)
    zero, one = _basis()
    basis = np.stack([zero, one]).reshape(2, 2, 2, 2, 2)
    return np.einsum("iabcd,...a,...b,...c,...d->...i", basis, s[..., 0, :], s[..., 1, :], s[..., 2, :], s[..., 3, :])


def project_coherent(f) -> np.ndarray:
    """Project the product of four face coherent states onto the intertwiner space."""
    if not isinstance(f, FaceNormals):
        f = FaceNormals(f)
    return project_spinors(f.spinors())


@lru_cache(maxsize=None)
def spin_operators() -> np.ndarray:
    """Array J[k, c] of 16x16 matrices: component c (x, y, z) of face k."""
    paulis = (
        np.array([[0, 1], [1, 0]], dtype=complex),
        np.array([[0, -1j], [1j, 0]], dtype=complex),
        np.array([[1, 0], [0, -1]], dtype=complex),
    )
    out = np.empty((4, 3, 16, 16), dtype=complex)
    for k in range(4):
        for c, p in enumerate(paulis):
            factors = [np.eye(2)] * 4
            factors[k] = p / 2
            m = factors[0]
            for fct in factors[1:]:
                m = np.kron(m, fct)
            out[k, c] = m
    out.setflags(write=False)
    return out


def closure_residual(v) -> float:
    """Sum over x, y, z of ||(J1 + J2 + J3 + J4)_c v||."""
    v = np.asarray(v, dtype=complex)
    total = spin_operators().sum(axis=0)
    return float(sum(np.linalg.norm(total[c] @ v) for c in range(3)))


def restrict(op: np.ndarray) -> np.ndarray:
    """Matrix of a 16x16 operator in the {|0>, |1>} basis."""
    b = basis_states().matrix()
    return b.conj() @ op @ b.T


def _dot(k: int, m: int) -> np.ndarray:
    J = spin_operators()
    return sum(J[k, c] @ J[m, c] for c in range(3))


@lru_cache(maxsize=None)
def _dihedral_matrices() -> np.ndarray:
    # sign chosen so |0> (J12 = 0) gives cos(theta_12) = +1
    mats = np.array([-4.0 / 3.0 * restrict(_dot(k - 1, m - 1)) for k, m in DIHEDRAL_PAIRS])
    mats.setflags(write=False)
    return mats


def dihedral_formula(t: IntertwinerBloch) -> np.ndarray:
    """The closed-form dihedral cosines for pairs (12, 13, 14, 23, 24, 34).

    cos12 = cos34 and cos13 = cos24 are taken verbatim (including the sin φ
    cross term). cos14 and cos23 come from cos14 = 1 - cos23 - cos12 together
    with cos14 = cos23, which closure imposes on any intertwiner.
    """
    c, s = math.cos(t.theta / 2), math.sin(t.theta / 2)
    c12 = c * c - s * s / 3
    c13 = 2 / 3 * s * s + 2 * math.sqrt(3) / 3 * c * s * math.sin(t.phi)
    c14 = (1 - c12) / 2
    return np.array([c12, c13, c14, c14, c13, c12])


def dihedral_operator(t: IntertwinerBloch) -> np.ndarray:
    """Expectation values of -(4/3) J_k·J_m for pairs (12, 13, 14, 23, 24, 34)."""
    v = t.state
    return np.real(np.einsum("i,pij,j->p", v.conj(), _dihedral_matrices(), v))


def volume_matrix() -> np.ndarray:
    """Q = (J1 x J2)·J3 restricted to the intertwiner space (Hermitian, traceless)."""
    J = spin_operators()
    q = np.zeros((16, 16), dtype=complex)
    for i, j, k, sign in ((0, 1, 2, 1), (1, 2, 0, 1), (2, 0, 1, 1), (0, 2, 1, -1), (2, 1, 0, -1), (1, 0, 2, -1)):
        q += sign * J[0, i] @ J[1, j] @ J[2, k]
    return restrict(q)


def volume_expectation(t: IntertwinerBloch) -> float:
    """Oriented volume <sign(Q) (√2/3) √|Q|> with (√(8πγ) l_p)^3 set to 1."""
    w, vecs = np.linalg.eigh(volume_matrix())
    weights = np.abs(vecs.conj().T @ t.state) ** 2
    return float(np.sum(weights * np.sign(w) * math.sqrt(2) / 3 * np.sqrt(np.abs(w))))


def orientation(t: IntertwinerBloch, atol: float = 1e-12) -> int:
    v = volume_expectation(t)
    if abs(v) < atol:
        return 0
    return 1 if v > 0 else -1
