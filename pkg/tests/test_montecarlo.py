import numpy as np
import pytest

from conftest import random_unit_vectors
from foamsim.intertwiner import REGULAR_NORMALS, project_coherent
from foamsim.montecarlo import (
    boundary_coefficients,
    contraction_amplitude,
    contraction_amplitude_double,
    empirical_z,
    mc_amplitude_double,
    mc_amplitude_single,
    projected_boundary,
    regular_boundary_normals,
    validate_normals,
)
from foamsim.spinfoam import PENTAGON_SLOTS, fifteenj_norm, vertex_state


def _contract(w, coeffs):
    v = w
    for c in coeffs:
        v = np.tensordot(c, v, axes=(0, 0))
    return complex(v)


def test_regular_boundary_is_orientation_consistent():
    n = regular_boundary_normals()
    assert n.shape == (5, 4, 3)
    # undoing the bra-side reversal gives a closed regular tetrahedron each time
    for e in range(5):
        eff = np.array([-n[e, s] if e < nb else n[e, s] for s, nb in enumerate(PENTAGON_SLOTS[e])])
        assert np.allclose(eff, REGULAR_NORMALS, atol=1e-15)
    coeffs = projected_boundary(n)
    g = project_coherent(REGULAR_NORMALS)
    for c in coeffs:
        # every tetrahedron projects onto the same state up to a phase
        assert abs(abs(np.vdot(g, c)) - np.vdot(g, g).real) < 1e-12


def test_exact_contraction_is_z_times_vertex_overlap(rng):
    w = vertex_state().tensor
    z = fifteenj_norm()
    for _ in range(5):
        n = random_unit_vectors(rng, (5, 4))
        exact = contraction_amplitude(n)
        # the raw tensor is -Z W; the sign is global
        assert abs(exact + 2**10 * z * _contract(w, boundary_coefficients(n))) < 1e-10
        # project_coherent agrees up to per-tetrahedron phases
        assert abs(abs(exact) - 2**10 * z * abs(_contract(w, projected_boundary(n)))) < 1e-10


def test_mc_matches_exact_on_random_boundaries():
    rng = np.random.default_rng(99)
    for k in range(5):
        n = random_unit_vectors(rng, (5, 4))
        est = mc_amplitude_single(n, 10**5, seed=k)
        assert abs(est.estimate - contraction_amplitude(n)) < 3 * est.std_error


def test_mc_zero_overlap_boundary(rng):
    n = random_unit_vectors(rng, (5, 4))
    n[0] = [0, 0, 1]
    assert abs(contraction_amplitude(n)) < 1e-12
    est = mc_amplitude_single(n, 10**5, seed=4)
    assert abs(est.estimate) < 3 * est.std_error


def test_mc_determinism_and_worker_independence():
    n = regular_boundary_normals()
    a = mc_amplitude_single(n, 20000, seed=3, block_size=4096)
    b = mc_amplitude_single(n, 20000, seed=3, block_size=4096)
    c = mc_amplitude_single(n, 20000, seed=3, block_size=4096, workers=4)
    assert a == b == c
    d = mc_amplitude_single(n, 20000, seed=4, block_size=4096)
    assert d.estimate != a.estimate


def test_mc_standard_error_scaling():
    n = regular_boundary_normals()
    a = mc_amplitude_single(n, 50000, seed=1)
    b = mc_amplitude_single(n, 200000, seed=2)
    assert a.std_error / b.std_error == pytest.approx(2.0, rel=0.2)


def test_empirical_z_regular():
    n = regular_boundary_normals()
    est = mc_amplitude_single(n, 2 * 10**5, seed=5)
    # exact ratio is Z; a 2e5-sample estimate lands within a few percent
    assert empirical_z(est, n) == pytest.approx(fifteenj_norm(), rel=0.05)
    exact_ratio = abs(contraction_amplitude(n)) / abs(2**10 * _contract(vertex_state().tensor, projected_boundary(n)))
    assert exact_ratio == pytest.approx(fifteenj_norm(), abs=1e-12)


def test_input_validation():
    with pytest.raises(ValueError):
        mc_amplitude_single(regular_boundary_normals(), 999, seed=0)
    bad = regular_boundary_normals()
    bad[2, 1] *= 1.1
    with pytest.raises(ValueError):
        mc_amplitude_single(bad, 1000, seed=0)
    with pytest.raises(ValueError):
        validate_normals(np.zeros((4, 4, 3)))


def test_two_vertex_mc_against_exact():
    rng = np.random.default_rng(8)
    na = random_unit_vectors(rng, (4, 4))
    nb = random_unit_vectors(rng, (4, 4))
    est = mc_amplitude_double(na, nb, 2 * 10**5, seed=1)
    exact = contraction_amplitude_double(na, nb)
    assert abs(est.estimate - exact) < 3 * est.std_error
