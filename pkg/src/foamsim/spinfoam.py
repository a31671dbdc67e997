"""Ooguri vertex amplitudes for spin-1/2 boundaries.

The {15j} tensor contracts five rank-4 intertwiners along the ten links of the
pentagon (complete) graph on tetrahedra 0..4. Each link (a, b), a < b, carries
the antisymmetric spin-0 bilinear form ``LINK_FORM[x, y]`` with x on the face of
tetrahedron a and y on the face of b. Tetrahedron e orders its four faces by
the neighbour they are shared with, ``PENTAGON_SLOTS[e]``. The slot order is
the unique one (among all per-tetrahedron face orderings) whose contraction
reproduces the known vertex-state coefficients; with it the amplitudes are
invariant under the cyclic dihedral group on the five index positions.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from .intertwiner import IntertwinerBloch, _basis, bloch_vector

__all__ = [
    "PENTAGON_SLOTS",
    "LINK_FORM",
    "Z_REFERENCE",
    "SCAN_COLUMNS",
    "VertexState",
    "TwoVertexState",
    "Amplitude",
    "fifteenj_tensor",
    "fifteenj_norm",
    "vertex_state",
    "two_vertex_state",
    "amplitude_single",
    "amplitude_double",
    "boundary_states",
    "scan_single",
    "scan_double",
    "write_scan_csv",
    "vertex_state_json",
    "dihedral_orbit",
]

PENTAGON_SLOTS = (
    (1, 2, 4, 3),
    (0, 4, 2, 3),
    (0, 1, 4, 3),
    (0, 4, 1, 2),
    (0, 1, 3, 2),
)
LINK_FORM = np.array([[0.0, -1.0], [1.0, 0.0]])

# normalization constant quoted alongside the prefactored amplitudes
Z_REFERENCE = 0.62361

SCAN_COLUMNS = ("theta", "phi", "probability", "amplitude_re", "amplitude_im")


def _links():
    return [(a, b) for a in range(5) for b in range(a + 1, 5)]


@lru_cache(maxsize=None)
def _fifteenj() -> np.ndarray:
    zero, one = _basis()
    node = np.stack([zero, one]).reshape(2, 2, 2, 2, 2)
    letters = iter("abcdefghijklmnopqrstuvwxyz")
    face_label = {}
    for a, b in _links():
        face_label[a, b] = next(letters)
        face_label[b, a] = next(letters)
    operands, subscripts = [], []
    out = "ABCDE"
    for e in range(5):
        subscripts.append(out[e] + "".join(face_label[e, nb] for nb in PENTAGON_SLOTS[e]))
        operands.append(node)
    for a, b in _links():
        subscripts.append(face_label[a, b] + face_label[b, a])
        operands.append(LINK_FORM)
    f = np.einsum(",".join(subscripts) + "->" + out, *operands, optimize="greedy")
    f.setflags(write=False)
    return f


def fifteenj_tensor() -> np.ndarray:
    """Raw pentagon contraction f(i1..i5), shape (2, 2, 2, 2, 2)."""
    return _fifteenj().copy()


def fifteenj_norm() -> float:
    return float(np.linalg.norm(_fifteenj()))


@dataclass(frozen=True)
class VertexState:
    amplitudes: np.ndarray  # 32 entries, lexicographic |i1..i5>
    normalization: float

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * 5)


@lru_cache(maxsize=None)
def _vertex() -> VertexState:
    f = _fifteenj()
    norm = float(np.linalg.norm(f))
    w = f.reshape(-1) / norm
    if w[-1] < 0:
        w = -w
    w = w.astype(complex)
    w.setflags(write=False)
    return VertexState(w, norm)


def vertex_state() -> VertexState:
    """Unit-norm |W>, sign fixed so that <11111|W> > 0."""
    return _vertex()


def dihedral_orbit(bits: Sequence[int]) -> list[tuple[int, ...]]:
    """Images of a 5-bit string under the 10 symmetries of the 5-cycle."""
    bits = tuple(bits)
    out = []
    for reflect in (False, True):
        seq = bits[::-1] if reflect else bits
        for shift in range(5):
            out.append(seq[shift:] + seq[:shift])
    return out


@dataclass(frozen=True)
class TwoVertexState:
    amplitudes: np.ndarray  # 256 entries over |i1 i2 i3 i4 i6 i7 i8 i9>
    glued_norm: float       # norm of sum_k W(..k) W(..k) before normalization
    product_with_epr: np.ndarray  # 10-qubit (<W_A| ⊗ <W_B|) with shared qubits 4, 9

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * 8)


@lru_cache(maxsize=None)
def _two_vertex() -> TwoVertexState:
    w = vertex_state().tensor.real
    glued = np.einsum("abcdk,efghk->abcdefgh", w, w)
    norm = float(np.linalg.norm(glued))
    wd = (glued / norm).reshape(-1).astype(complex)
    product = np.kron(w.reshape(-1), w.reshape(-1)).astype(complex)
    wd.setflags(write=False)
    product.setflags(write=False)
    return TwoVertexState(wd, norm, product)


def two_vertex_state() -> TwoVertexState:
    return _two_vertex()


@dataclass(frozen=True)
class Amplitude:
    overlap: complex      # <W|Phi>
    probability: float    # |<W|Phi>|^2
    prefactored: complex  # 2^10 Z <W|Phi> or √2 2^16 Z^2 <W_d|Phi>


def boundary_states(boundary) -> np.ndarray:
    """Stack of 2-spinors for a sequence of IntertwinerBloch or (θ, φ) pairs."""
    rows = []
    for t in boundary:
        if not isinstance(t, IntertwinerBloch):
            t = IntertwinerBloch(float(t[0]), float(t[1]))
        rows.append(t.state)
    return np.array(rows)


def _contract(tensor: np.ndarray, states: np.ndarray) -> complex:
    v = tensor
    for s in states:
        v = np.tensordot(s, v, axes=(0, 0))
    return complex(v)


def amplitude_single(boundary, z: float = Z_REFERENCE) -> Amplitude:
    states = boundary_states(boundary)
    if states.shape[0] != 5:
        raise ValueError(f"single-vertex boundary needs 5 tetrahedra, got {states.shape[0]}")
    # W is real, so <W|Phi> needs no conjugation of W
    ov = _contract(vertex_state().tensor, states)
    return Amplitude(ov, abs(ov) ** 2, 2**10 * z * ov)


def amplitude_double(boundary, z: float = Z_REFERENCE) -> Amplitude:
    states = boundary_states(boundary)
    if states.shape[0] != 8:
        raise ValueError(f"two-vertex boundary needs 8 tetrahedra, got {states.shape[0]}")
    ov = _contract(two_vertex_state().tensor, states)
    return Amplitude(ov, abs(ov) ** 2, math.sqrt(2) * 2**16 * z * z * ov)


def _scan(tensor, fixed_states, position, thetas, phis):
    # contract every fixed tetrahedron, leaving a 2-vector on the scanned slot
    t = np.moveaxis(tensor, position, -1)
    for s in fixed_states:
        t = np.tensordot(s, t, axes=(0, 0))
    th, ph = np.meshgrid(thetas, phis, indexing="ij")
    amp = bloch_vector(th, ph) @ t
    return np.column_stack([
        th.ravel(), ph.ravel(), np.abs(amp.ravel()) ** 2, amp.real.ravel(), amp.imag.ravel(),
    ])


def scan_single(n_theta: int, n_phi: int, fixed: IntertwinerBloch | None = None, position: int = 4) -> np.ndarray:
    """Landscape with four tetrahedra held at ``fixed`` and one scanned.

    Rows are theta-major over theta in [0, π] and phi in [0, 2π], columns as
    in ``SCAN_COLUMNS``.
    """
    if n_theta < 2 or n_phi < 2:
        raise ValueError("grid sizes must be at least 2")
    fixed = fixed or IntertwinerBloch(math.pi / 2, math.pi / 2)
    states = [fixed.state] * 4
    return _scan(vertex_state().tensor, states, position,
                 np.linspace(0, math.pi, n_theta), np.linspace(0, 2 * math.pi, n_phi))


def scan_double(n_theta: int, phis=(math.pi / 2, 3 * math.pi / 2),
                side_a: IntertwinerBloch | None = None, side_b: IntertwinerBloch | None = None) -> np.ndarray:
    """Two-vertex landscape: positions 1-4 at ``side_a``, 6-8 at ``side_b``,
    the eighth boundary tetrahedron scanned over theta for each phi."""
    if n_theta < 2:
        raise ValueError("grid sizes must be at least 2")
    side_a = side_a or IntertwinerBloch(math.pi / 2, math.pi / 2)
    side_b = side_b or IntertwinerBloch(math.pi / 2, 3 * math.pi / 2)
    states = [side_a.state] * 4 + [side_b.state] * 3
    return _scan(two_vertex_state().tensor, states, 7,
                 np.linspace(0, math.pi, n_theta), np.asarray(phis, dtype=float))


def write_scan_csv(table: np.ndarray, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SCAN_COLUMNS)
        for row in table:
            writer.writerow([repr(float(x)) for x in row])


def vertex_state_json(state: VertexState | None = None) -> str:
    state = state or vertex_state()
    return json.dumps([[float(a.real), float(a.imag)] for a in state.amplitudes])


def load_bundled(name: str) -> dict:
    return json.loads((Path(__file__).parent / "data" / name).read_text())
