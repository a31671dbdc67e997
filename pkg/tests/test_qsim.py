import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from foamsim.intertwiner import E_PLUS, IntertwinerBloch
from foamsim.qsim import (
    GLUE_MATRIX,
    CouplingMatrix,
    Entangle,
    Glue,
    Phase,
    PulseSchedule,
    Rotation,
    UInverse,
    all_zero_probability,
    apply_entangling,
    apply_glue,
    apply_phase,
    apply_rotation,
    apply_u_inverse,
    bundled_couplings,
    effective_coupling,
    fidelity_pure,
    load_couplings,
    measurement_probability,
    run_schedule,
    run_steps,
    zero_state,
)
from foamsim.spinfoam import amplitude_double, amplitude_single, two_vertex_state, vertex_state

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)

angles = st.floats(-2 * math.pi, 2 * math.pi)


def random_state(rng, n):
    s = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return s / np.linalg.norm(s)


def excitations(n):
    return np.array([bin(i).count("1") for i in range(2**n)])


def test_rotation_basics():
    s = zero_state(1)
    assert np.allclose(apply_rotation(s, 0, 0.0, 1.3), s)
    flipped = apply_rotation(s, 0, math.pi, 0.0)
    assert abs(flipped[1]) == pytest.approx(1.0)
    with pytest.raises(IndexError):
        apply_rotation(zero_state(2), 2, 1.0, 0.0)


@settings(max_examples=40, deadline=None)
@given(angles, angles)
def test_rotation_matches_matrix_exponential(alpha, beta):
    u = expm(-0.5j * alpha * (math.cos(beta) * X + math.sin(beta) * Y))
    s = np.array([0.6, 0.8j])
    assert np.allclose(apply_rotation(s, 0, alpha, beta), u @ s, atol=1e-12)


def test_y_half_rotation_bloch_vector():
    s = apply_rotation(zero_state(1), 0, math.pi / 2, math.pi / 2)
    bloch = [np.real(s.conj() @ p @ s) for p in (X, Y, np.diag([1, -1]))]
    # rotating +z by π/2 about +y lands on +x
    assert np.allclose(bloch, [1, 0, 0], atol=1e-12)


def test_phase_gate():
    rng = np.random.default_rng(0)
    s = random_state(rng, 2)
    assert np.allclose(apply_phase(s, 1, 0.0), s)
    full = apply_phase(s, 1, 2 * math.pi)
    assert abs(abs(np.vdot(s, full)) - 1) < 1e-12
    assert np.allclose(apply_phase(apply_phase(s, 0, 0.3), 0, 1.1), apply_phase(s, 0, 1.4), atol=1e-12)


def test_entangling_two_qubit_transfer():
    c = CouplingMatrix("A", (0, 1), [[0, 1.04], [1.04, 0]])
    s = np.array([0, 0, 1, 0], dtype=complex)  # |10>
    assert np.allclose(apply_entangling(s, c, 0.0), s)
    t_swap = math.pi / (2 * abs(2 * math.pi * 1.04 * 1e-3))
    out = apply_entangling(s, c, t_swap)
    assert abs(out[1]) ** 2 == pytest.approx(1.0, abs=1e-12)
    # population oscillates at 2g: back to |10> after twice the swap time
    back = apply_entangling(s, c, 2 * t_swap)
    assert abs(back[2]) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_entangling_conserves_excitations_and_blocks(rng):
    c = bundled_couplings("single_vertex")[0]
    n_op = excitations(5)
    for _ in range(5):
        s = random_state(rng, 5)
        out = apply_entangling(s, c, rng.uniform(0, 500))
        assert abs(np.sum(n_op * abs(s) ** 2) - np.sum(n_op * abs(out) ** 2)) < 1e-12
        assert abs(np.linalg.norm(out) - 1) < 1e-10
    u = c.propagator(137.0)
    leak = u[n_op[:, None] != n_op[None, :]]
    assert np.max(np.abs(leak)) <= 1e-12


def test_entangling_matches_dense_expm():
    c = bundled_couplings("single_vertex")[0]
    tau = 231.5
    dense = expm(-1j * 2 * math.pi * 1e-3 * tau * c.hamiltonian())
    assert np.allclose(c.propagator(tau), dense, atol=1e-12)
    h = 1e-5
    fd = (c.propagator(tau + h) - c.propagator(tau - h)) / (2 * h)
    assert np.allclose(c.propagator_derivative(tau), fd, atol=1e-8)


def test_group_independence(rng):
    a, b = bundled_couplings("two_vertex")
    s = random_state(rng, 10)
    ab = apply_entangling(apply_entangling(s, a, 150.0), b, 210.0)
    ba = apply_entangling(apply_entangling(s, b, 210.0), a, 150.0)
    assert np.max(np.abs(ab - ba)) < 1e-12


def test_coupling_validation():
    with pytest.raises(ValueError):
        CouplingMatrix("A", (0, 1), [[0, 1], [2, 0]])
    with pytest.raises(ValueError):
        CouplingMatrix("A", (0, 1), [[1, 1], [1, 0]])
    with pytest.raises(ValueError):
        CouplingMatrix("A", (0, 0), [[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        apply_entangling(zero_state(2), CouplingMatrix.zeros("A", (0, 1)), -1.0)


def test_effective_coupling():
    assert effective_coupling(0, 20, -235, 0.7) == 0.7
    assert effective_coupling(20, 20, -1e12, 0.5) == pytest.approx(0.5)
    assert effective_coupling(20, 20, -235, 0.5) == pytest.approx(-1.202, abs=1e-3)
    with pytest.raises(ValueError):
        effective_coupling(1, 1, 0, 0)


def test_u_inverse_contract():
    rng = np.random.default_rng(2)
    assert abs(abs(apply_u_inverse(zero_state(1), 0, 0.0, 0.9)[0]) - 1) < 1e-15
    for _ in range(50):
        t = IntertwinerBloch(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
        out = apply_u_inverse(t.state, 0, t.theta, t.phi)
        assert abs(abs(out[0]) - 1) < 1e-12
    e_plus = np.array([1, 1j]) / math.sqrt(2)
    out = apply_u_inverse(e_plus, 0, math.pi / 2, math.pi / 2)
    assert abs(abs(out[0]) - 1) < 1e-12


def test_glue_gate():
    epr = np.array([1, 0, 0, 1]) / math.sqrt(2)
    assert abs(abs(apply_glue(epr, 0, 1)[0]) - 1) < 1e-12
    anti = np.array([1, 0, 0, -1]) / math.sqrt(2)
    assert abs(apply_glue(anti, 0, 1)[0]) < 1e-12
    assert np.allclose(GLUE_MATRIX.conj().T @ GLUE_MATRIX, np.eye(4), atol=1e-12)
    with pytest.raises(ValueError):
        apply_glue(epr, 1, 1)
    # non-adjacent, reversed qubit order on a larger register
    s = np.zeros(2**4, complex)
    s[0b0000] = s[0b1001] = 1 / math.sqrt(2)
    assert abs(abs(apply_glue(s, 3, 0)[0]) - 1) < 1e-12


def test_run_steps_and_schedule():
    assert np.allclose(run_schedule(PulseSchedule.empty(5)), zero_state(5))
    s = run_steps([Rotation(0, math.pi, 0.0)], 3)
    assert abs(s[0b100]) == pytest.approx(1.0)
    c = CouplingMatrix("A", (0, 1), [[0, 1.0], [1.0, 0]])
    s = run_steps([Rotation(0, math.pi, 0), Entangle("A", 250.0), Phase(1, 0.3), UInverse(0, 0.0, 0.0),
                   Glue(0, 1)], 2, c)
    assert abs(np.linalg.norm(s) - 1) < 1e-12
    with pytest.raises(KeyError):
        run_steps([Entangle("B", 1.0)], 2, c)


def test_long_schedule_preserves_norm(rng):
    c = bundled_couplings("single_vertex")[0]
    steps = []
    for _ in range(40):
        q = int(rng.integers(5))
        steps += [Rotation(q, *rng.uniform(0, 6, 2)), Phase(q, rng.uniform(0, 6)), Entangle("A", rng.uniform(0, 400))]
    steps += [UInverse(0, 1.0, 2.0), Glue(1, 3)]
    assert len(steps) <= 200
    s = run_steps(steps, 5, c)
    assert abs(np.linalg.norm(s) - 1) < 1e-8


def test_readout_helpers():
    assert all_zero_probability(zero_state(3)) == 1.0
    ones = np.zeros(8, complex)
    ones[-1] = 1
    assert all_zero_probability(ones) == 0.0
    with pytest.raises(ValueError):
        fidelity_pure(zero_state(2), zero_state(3))


def test_measurement_identity_with_exact_state(rng):
    w = vertex_state().amplitudes
    for _ in range(10):
        rows = [(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi)) for _ in range(5)]
        p = measurement_probability(w, rows)
        assert abs(p - amplitude_single(rows).probability) < 1e-10


def test_two_vertex_readout(rng):
    product = two_vertex_state().product_with_epr
    for _ in range(5):
        rows = [(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi)) for _ in range(8)]
        # the EPR projection costs a factor 1/2 in amplitude, 1/4 in probability
        p = measurement_probability(product, rows)
        assert p == pytest.approx(amplitude_double(rows).probability / 4, abs=1e-12)
    with pytest.raises(ValueError):
        measurement_probability(product, rows[:5])


def test_bundled_fixture_prepares_vertex_state():
    from importlib.resources import files

    data = json.loads(files("foamsim").joinpath("data/schedule_d4.json").read_text())
    sched = PulseSchedule.from_json(data)
    state = run_schedule(sched, bundled_couplings("single_vertex"))
    assert fidelity_pure(state, vertex_state().amplitudes) >= 0.99
    assert sched.depth == 4
    assert sched.to_vector().size == PulseSchedule.parameter_count(5, 4)
    rows = [(E_PLUS.theta, E_PLUS.phi)] * 5
    assert measurement_probability(state, rows) == pytest.approx(1 / 7, abs=1e-3)


def test_schedule_json_roundtrip(rng):
    groups = ("A", "B")
    x = rng.uniform(0, 6, PulseSchedule.parameter_count(10, 2, 2))
    sched = PulseSchedule.from_vector(x, 10, 2, groups)
    sched.metadata = {"seed": 3}
    data = json.loads(json.dumps(sched.to_json()))
    assert "tau_ns_by_group" in data["layers"][0]
    back = PulseSchedule.from_json(data)
    assert np.array_equal(back.to_vector(), x)
    assert back.groups == groups and back.metadata == {"seed": 3}
    single = PulseSchedule.from_vector(rng.uniform(0, 6, PulseSchedule.parameter_count(5, 3)), 5, 3)
    data = single.to_json()
    assert "tau_ns" in data["layers"][0]
    assert np.array_equal(PulseSchedule.from_json(data).to_vector(), single.to_vector())
    with pytest.raises(ValueError):
        PulseSchedule.from_json({"init": [{"q": 1, "alpha": 0, "beta": 0}]})
    with pytest.raises(ValueError):
        PulseSchedule.from_json({"layers": []})


def test_coupling_files(tmp_path):
    single = bundled_couplings("single_vertex")[0]
    assert single.names == ("Q1", "Q2", "Q5", "Q4", "Q3")
    # Q1-Q3 lands between state positions 0 and 4
    assert single.matrix[0, 4] == -1.33
    a, b = bundled_couplings("two_vertex")
    assert b.qubits == (5, 6, 7, 8, 9) and a.matrix[0, 2] == -1.04
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"groups": [single.to_json()]}))
    loaded = load_couplings(path)[0]
    assert np.array_equal(loaded.matrix, single.matrix)
    path.write_text(json.dumps({"groups": [{"qubits": ["a", "b"], "couplings_mhz": {"a-c": 1.0}}]}))
    with pytest.raises(ValueError):
        load_couplings(path)
    with pytest.raises(ValueError):
        bundled_couplings("missing")
