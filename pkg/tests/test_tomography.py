import numpy as np
import pytest

from foamsim.spinfoam import vertex_state
from foamsim.tomography import (
    linear_inversion,
    project_density,
    settings_probabilities,
    simulate_qst,
    state_fidelity,
)


def test_noiseless_vertex_state():
    w = vertex_state().amplitudes
    rho = simulate_qst(w)
    assert state_fidelity(rho, w) >= 0.999
    assert np.allclose(rho, np.outer(w, w.conj()), atol=1e-10)


def test_ground_state():
    z = np.zeros(32, complex)
    z[0] = 1
    assert np.max(np.abs(simulate_qst(z) - np.outer(z, z))) < 1e-10


def test_random_state_linear_inversion_is_exact():
    rng = np.random.default_rng(4)
    s = rng.normal(size=32) + 1j * rng.normal(size=32)
    s /= np.linalg.norm(s)
    rho = linear_inversion(settings_probabilities(s))
    assert np.allclose(rho, np.outer(s, s.conj()), atol=1e-12)


def test_shot_noise():
    w = vertex_state().amplitudes
    rho = simulate_qst(w, shots=10**4, rng=np.random.default_rng(1))
    assert state_fidelity(rho, w) >= 0.98
    eig = np.linalg.eigvalsh(rho)
    assert eig.min() > -1e-12
    assert np.trace(rho).real == pytest.approx(1.0)
    again = simulate_qst(w, shots=10**4, rng=np.random.default_rng(1))
    assert np.array_equal(rho, again)


def test_projection_onto_density_matrices():
    m = np.diag([0.9, 0.3, -0.2]).astype(complex)
    p = project_density(m)
    assert np.allclose(np.diag(p).real, [0.8, 0.2, 0.0])


def test_wrong_size():
    with pytest.raises(ValueError):
        simulate_qst(np.ones(16) / 4)
