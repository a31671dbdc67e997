"""Monte Carlo evaluation of the spin-1/2 Ooguri vertex integral.

Boundary data are face normals ``normals[e, s]`` for tetrahedron e and slot s,
with slots ordered as ``PENTAGON_SLOTS[e]``. On the link between tetrahedra
a < b the integrand factor is

    <n_{a->b}| g_a^{-1} g_b |n_{b->a}>,

i.e. the lower-indexed tetrahedron sits on the bra side. One group element
(g_0) is gauge-fixed to the identity.

Integrating the group elements analytically turns each tetrahedron into its
projection onto the intertwiner space, with bra-side faces entering through
the antiunitary flip J|n> = eps^{-1} conj(|n>); ``contraction_amplitude``
evaluates that closed form and is the exact reference for the sampler.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .intertwiner import FaceNormals, REGULAR_NORMALS, project_coherent, project_spinors
from .spinfoam import PENTAGON_SLOTS, _fifteenj, vertex_state
from .su2 import CoherentHalfSpin, antipodal_spinor, haar_quaternions, quaternion_matrices

__all__ = [
    "MCEstimate",
    "regular_boundary_normals",
    "validate_normals",
    "face_spinors",
    "boundary_coefficients",
    "projected_boundary",
    "contraction_amplitude",
    "mc_amplitude_single",
    "empirical_z",
    "mc_amplitude_double",
    "contraction_amplitude_double",
]

DEFAULT_BLOCK = 1 << 15


@dataclass(frozen=True)
class MCEstimate:
    estimate: complex
    std_error: float
    samples: int
    seed: int


def regular_boundary_normals(signs=(1, 1, 1, 1, 1)) -> np.ndarray:
    """Regular tetrahedra with orientation-consistent effective normals.

    Slot s of tetrahedron e carries ``sign_e * REGULAR_NORMALS[s]``, reversed on
    bra-side faces, so that every tetrahedron projects onto the same
    intertwiner state up to a phase. This boundary has a large amplitude and
    hence a small relative Monte Carlo error.
    """
    out = np.empty((5, 4, 3))
    for e in range(5):
        for s, nb in enumerate(PENTAGON_SLOTS[e]):
            base = signs[e] * REGULAR_NORMALS[s]
            out[e, s] = -base if _bra_side(e, nb) else base
    return out


def validate_normals(normals, n_tet: int = 5) -> np.ndarray:
    arr = np.asarray(normals, dtype=float)
    if arr.shape != (n_tet, 4, 3):
        raise ValueError(f"expected normals of shape ({n_tet}, 4, 3), got {arr.shape}")
    for tet in arr:
        FaceNormals(tet)  # raises on non-unit normals
    return arr


def face_spinors(normals) -> np.ndarray:
    arr = np.asarray(normals, dtype=float)
    flat = [CoherentHalfSpin.from_vector(n).state for n in arr.reshape(-1, 3)]
    return np.array(flat).reshape(arr.shape[:-1] + (2,))


def _bra_side(e: int, neighbour: int) -> bool:
    return e < neighbour


def boundary_coefficients(normals) -> np.ndarray:
    """(5, 2) intertwiner coefficients <i|Psi_e> entering the exact contraction."""
    spinors = face_spinors(validate_normals(normals))
    for e in range(5):
        for s, nb in enumerate(PENTAGON_SLOTS[e]):
            if _bra_side(e, nb):
                spinors[e, s] = antipodal_spinor(spinors[e, s])
    return project_spinors(spinors)


def projected_boundary(normals) -> np.ndarray:
    """(5, 2) coefficients from ``project_coherent``, bra-side normals reversed.

    Agrees with ``boundary_coefficients`` up to one unit-modulus phase per
    tetrahedron.
    """
    arr = validate_normals(normals).copy()
    for e in range(5):
        for s, nb in enumerate(PENTAGON_SLOTS[e]):
            if _bra_side(e, nb):
                arr[e, s] = -arr[e, s]
    return np.array([project_coherent(t) for t in arr])


def _contract(tensor, coeffs) -> complex:
    v = tensor
    for c in coeffs:
        v = np.tensordot(c, v, axes=(0, 0))
    return complex(v)


def contraction_amplitude(normals) -> complex:
    """Exact value of the vertex integral, 2^10 sum_i f(i) prod_e c_e(i_e)."""
    return 2**10 * _contract(_fifteenj(), boundary_coefficients(normals))


def _single_block(spinors, links, rng, size):
    # g_0 = identity, g_1..g_4 Haar
    q = haar_quaternions(rng, (size, 4))
    g = quaternion_matrices(q)
    rotated = np.empty((size, 5, 4, 2), dtype=complex)
    rotated[:, 0] = spinors[0]
    rotated[:, 1:] = np.einsum("beij,esj->besi", g, spinors[1:])
    x = np.ones(size, dtype=complex)
    for a, sa, b, sb in links:
        x *= np.einsum("bi,bi->b", rotated[:, a, sa].conj(), rotated[:, b, sb])
    return x


def _run_blocks(block_fn, samples: int, seed: int, block_size: int, workers: int):
    n_blocks = -(-samples // block_size)
    sizes = [block_size] * (n_blocks - 1) + [samples - block_size * (n_blocks - 1)]
    children = np.random.SeedSequence(seed).spawn(n_blocks)

    def run(i):
        x = block_fn(np.random.default_rng(children[i]), sizes[i])
        return x.sum(), float(np.sum(np.abs(x) ** 2))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(n_blocks)))
    else:
        parts = [run(i) for i in range(n_blocks)]
    # fixed reduction order keeps results independent of the worker count
    total, total_sq = 0j, 0.0
    for s, sq in parts:
        total += s
        total_sq += sq
    mean = total / samples
    var = max(total_sq - samples * abs(mean) ** 2, 0.0) / (samples - 1)
    return mean, math.sqrt(var / samples)


def mc_amplitude_single(normals, samples: int, seed: int, block_size: int = DEFAULT_BLOCK,
                        workers: int = 1) -> MCEstimate:
    """Monte Carlo estimate of 2^10 ∫ prod dg prod_f <n|g^{-1} g'|n'>."""
    if samples < 1000:
        raise ValueError("samples must be at least 1000")
    spinors = face_spinors(validate_normals(normals))
    slot = [{nb: s for s, nb in enumerate(PENTAGON_SLOTS[e])} for e in range(5)]
    links = [(a, slot[a][b], b, slot[b][a]) for a in range(5) for b in range(a + 1, 5)]
    mean, se = _run_blocks(lambda rng, n: _single_block(spinors, links, rng, n),
                           samples, seed, block_size, workers)
    return MCEstimate(2**10 * mean, 2**10 * se, samples, seed)


def empirical_z(estimate: MCEstimate, normals) -> float:
    """|MC estimate| / |2^10 <W|Phi_proj>|."""
    coeffs = projected_boundary(normals)
    ov = _contract(vertex_state().tensor, coeffs)
    return abs(estimate.estimate) / abs(2**10 * ov)


# --- two glued vertices (experimental) --------------------------------------
#
# Vertex A uses pentagon tetrahedra 0..3 plus the shared tetrahedron 4, and so
# does vertex B. The shared tetrahedron is integrated out: its four faces
# become internal faces joining A-tetrahedron a to B-tetrahedron a through a
# common group element h = g_{A4} g_{B4}^{-1},
#
#     <n^A_{a->4}| g_{Aa}^{-1} h g_{Ba} |n^B_{a->4}>,
#
# so the shared tetrahedron is seen with opposite orientation from the two
# sides. Gauge: g_{A0} = g_{B0} = identity.


def _double_links():
    slot = [{nb: s for s, nb in enumerate(PENTAGON_SLOTS[e])} for e in range(5)]
    internal = [(a, slot[a][b], b, slot[b][a]) for a in range(4) for b in range(a + 1, 4)]
    shared = [(a, slot[a][4]) for a in range(4)]
    return internal, shared


def _double_block(sa, sb, rng, size):
    internal, shared = _double_links()
    q = haar_quaternions(rng, (size, 7))
    g = quaternion_matrices(q)
    ra = np.empty((size, 4, 4, 2), dtype=complex)
    rb = np.empty((size, 4, 4, 2), dtype=complex)
    ra[:, 0] = sa[0]
    rb[:, 0] = sb[0]
    ra[:, 1:] = np.einsum("beij,esj->besi", g[:, 0:3], sa[1:])
    rb[:, 1:] = np.einsum("beij,esj->besi", g[:, 3:6], sb[1:])
    h = g[:, 6]
    x = np.ones(size, dtype=complex)
    for a, s1, b, s2 in internal:
        x *= np.einsum("bi,bi->b", ra[:, a, s1].conj(), ra[:, b, s2])
        x *= np.einsum("bi,bi->b", rb[:, a, s1].conj(), rb[:, b, s2])
    for a, s in shared:
        x *= np.einsum("bi,bij,bj->b", ra[:, a, s].conj(), h, rb[:, a, s])
    return x


def mc_amplitude_double(normals_a, normals_b, samples: int, seed: int,
                        block_size: int = DEFAULT_BLOCK, workers: int = 1) -> MCEstimate:
    """Experimental: 16-face, seven-group-element integral for two glued vertices.

    Variance grows quickly with the number of faces; no accuracy is promised
    below roughly 10^7 samples.
    """
    if samples < 1000:
        raise ValueError("samples must be at least 1000")
    sa = face_spinors(validate_normals(normals_a, 4))
    sb = face_spinors(validate_normals(normals_b, 4))
    mean, se = _run_blocks(lambda rng, n: _double_block(sa, sb, rng, n),
                           samples, seed, block_size, workers)
    return MCEstimate(2**16 * mean, 2**16 * se, samples, seed)


def contraction_amplitude_double(normals_a, normals_b) -> complex:
    """Exact value of the two-vertex integral used by ``mc_amplitude_double``.

    Equals 2^16 sum_k f(i_A, k) f(i_B, k) prod c^A prod c^B. On the B side the
    faces toward the shared tetrahedron are kets and keep their plain spinor:
    contracting them directly with |k> instead of through LINK_FORM is the
    same thing, because LINK_FORM^{-1} is in SU(2) and fixes |k>.
    """
    sa = face_spinors(validate_normals(normals_a, 4))
    sb = face_spinors(validate_normals(normals_b, 4))
    for e in range(4):
        for s, nb in enumerate(PENTAGON_SLOTS[e]):
            if _bra_side(e, nb):
                sa[e, s] = antipodal_spinor(sa[e, s])
                if nb != 4:
                    sb[e, s] = antipodal_spinor(sb[e, s])
    ca, cb = project_spinors(sa), project_spinors(sb)
    f = _fifteenj()
    glued = np.einsum("abcdk,efghk->abcdefgh", f, f)
    return 2**16 * _contract(glued, list(ca) + list(cb))
