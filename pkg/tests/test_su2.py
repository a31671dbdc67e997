import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import ks_2samp

from foamsim.su2 import (
    CoherentHalfSpin,
    HalfInteger,
    SU2Element,
    antipodal_spinor,
    clebsch_gordan,
    coherent_overlap,
    haar_quaternions,
    haar_sample,
    quaternion_matrices,
    su2_compose,
    su2_inverse,
)


def test_half_integer_exact():
    assert HalfInteger.of("3/2").twice == 3
    assert HalfInteger.of(Fraction(1, 2)) + HalfInteger.of(1) == HalfInteger(3)
    assert HalfInteger.of(0.5).twice == 1
    with pytest.raises(ValueError):
        HalfInteger.of("1/3")
    with pytest.raises(TypeError):
        HalfInteger(1.5)


@pytest.mark.parametrize("args, expected", [
    (("1/2", "1/2", "1/2", "-1/2", 0, 0), 1 / math.sqrt(2)),
    (("1/2", "-1/2", "1/2", "1/2", 0, 0), -1 / math.sqrt(2)),
    (("1/2", "1/2", "1/2", "-1/2", 1, 0), 1 / math.sqrt(2)),
    (("3/2", "1/2", 0, 0, "3/2", "1/2"), 1.0),
    ((1, 1, 1, -1, 0, 0), 1 / math.sqrt(3)),
    ((1, 0, 1, 0, 0, 0), -1 / math.sqrt(3)),
    ((1, 1, "1/2", "-1/2", "3/2", "1/2"), 1 / math.sqrt(3)),
    ((1, 1, "1/2", "-1/2", "1/2", "1/2"), math.sqrt(2 / 3)),
])
def test_clebsch_gordan_values(args, expected):
    assert clebsch_gordan(*args) == pytest.approx(expected, abs=1e-14)


def test_clebsch_gordan_selection_rules():
    assert clebsch_gordan("1/2", "1/2", "1/2", "1/2", 1, 0) == 0.0
    assert clebsch_gordan("1/2", "1/2", "1/2", "1/2", 2, 1) == 0.0
    with pytest.raises(ValueError):
        clebsch_gordan("1/2", "3/2", "1/2", "1/2", 1, 1)
    with pytest.raises(ValueError):
        clebsch_gordan("1/2", "1/3", "1/2", "1/2", 1, 1)


def _spins(limit):
    return [Fraction(t, 2) for t in range(0, 2 * limit + 1)]


@pytest.mark.parametrize("j1", _spins(2))
@pytest.mark.parametrize("j2", _spins(2))
def test_clebsch_gordan_orthogonality(j1, j2):
    Js = [j1 + j2 - k for k in range(int(2 * min(j1, j2)) + 1)]
    states = [(J, J - k) for J in Js for k in range(int(2 * J) + 1)]
    m1s = [j1 - k for k in range(int(2 * j1) + 1)]
    m2s = [j2 - k for k in range(int(2 * j2) + 1)]
    C = np.array([[clebsch_gordan(j1, a, j2, b, J, M) for a in m1s for b in m2s] for J, M in states])
    assert np.allclose(C @ C.T, np.eye(len(states)), atol=1e-12)


quats = st.lists(st.floats(-1, 1), min_size=4, max_size=4).filter(lambda q: np.linalg.norm(q) > 0.1)


@settings(max_examples=50, deadline=None)
@given(quats, quats, quats)
def test_group_laws(q1, q2, q3):
    g, h, k = (SU2Element.from_quaternion(q) for q in (q1, q2, q3))
    e = su2_compose(g, su2_inverse(g))
    assert np.allclose(e.matrix, np.eye(2), atol=1e-12)
    assert np.allclose(su2_compose(SU2Element.identity(), g).matrix, g.matrix, atol=1e-15)
    assert np.allclose(((g @ h) @ k).matrix, (g @ (h @ k)).matrix, atol=1e-12)
    assert np.allclose((g @ h).matrix, g.matrix @ h.matrix, atol=1e-12)
    m = (g @ h).matrix
    assert np.allclose(m.conj().T @ m, np.eye(2), atol=1e-12)
    assert abs(np.linalg.det(m) - 1) < 1e-12


def test_haar_moments():
    rng = np.random.default_rng(7)
    n = 10**6
    m = quaternion_matrices(haar_quaternions(rng, n))
    assert np.all(np.abs(m.mean(axis=0)) < 5 / math.sqrt(n))
    assert abs(np.mean(np.abs(m[:, 0, 0]) ** 2) - 0.5) < 5 / math.sqrt(n)


def test_haar_left_invariance():
    rng = np.random.default_rng(11)
    n = 10**5
    h = haar_sample(np.random.default_rng(3)).matrix
    g1 = quaternion_matrices(haar_quaternions(rng, n))
    g2 = quaternion_matrices(haar_quaternions(rng, n))
    tr_plain = np.trace(g1, axis1=1, axis2=2).real
    tr_shift = np.trace(h @ g2, axis1=1, axis2=2).real
    stat = ks_2samp(tr_plain, tr_shift).statistic
    # two-sample 1% critical value: 1.628 sqrt(2/n)
    assert stat < 1.628 * math.sqrt(2 / n)


def test_haar_deterministic():
    a = haar_sample(np.random.default_rng(5))
    b = haar_sample(np.random.default_rng(5))
    assert a == b


def test_coherent_overlap_cases(rng):
    e = SU2Element.identity()
    n = CoherentHalfSpin(0.7, 1.3)
    assert coherent_overlap(n, e, e, n) == pytest.approx(1.0)
    north, south = CoherentHalfSpin(0.0, 0.0), CoherentHalfSpin(math.pi, 0.0)
    assert abs(coherent_overlap(north, e, e, south)) < 1e-15
    for _ in range(20):
        g, g2 = haar_sample(rng), haar_sample(rng)
        a = CoherentHalfSpin(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
        b = CoherentHalfSpin(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
        direct = a.state.conj() @ np.linalg.inv(g.matrix) @ g2.matrix @ b.state
        assert abs(abs(coherent_overlap(a, g, g2, b)) ** 2 - abs(direct) ** 2) < 1e-12
        assert abs(coherent_overlap(a, g, g2, b) - direct) < 1e-12


def test_coherent_state_direction(rng):
    for v in rng.normal(size=(10, 3)):
        v /= np.linalg.norm(v)
        c = CoherentHalfSpin.from_vector(v)
        assert np.allclose(c.vector, v, atol=1e-12)
        s = c.state
        paulis = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]
        bloch = [np.real(s.conj() @ p @ s) for p in paulis]
        assert np.allclose(bloch, v, atol=1e-12)
    with pytest.raises(ValueError):
        CoherentHalfSpin(4.0, 0.0)
    with pytest.raises(ValueError):
        CoherentHalfSpin.from_vector([1.0, 1.0, 0.0])


def test_antipodal_spinor_phase():
    theta, phi = 0.9, 2.1
    s = CoherentHalfSpin(theta, phi).state
    flipped = antipodal_spinor(s)
    expected = -np.exp(-1j * phi) * CoherentHalfSpin(math.pi - theta, phi + math.pi).state
    assert np.allclose(flipped, expected, atol=1e-14)
