import math

import numpy as np
import pytest

R3 = math.sqrt(3)

# published vertex-state numerators over the common denominator 8√42,
# lexicographic order |00000>, |00001>, ..., |11111>
VERTEX_NUMERATORS = np.array([
    3 * R3, 9, 9, -3 * R3, 9, 9 * R3, -3 * R3, 3,
    9, 9 * R3, 9 * R3, -9, -3 * R3, -9, 3, -R3,
    9, -3 * R3, 9 * R3, 3, 9 * R3, -9, -9, -R3,
    -3 * R3, 3, -9, -R3, 3, -R3, -R3, 21,
])
VERTEX_DENOMINATOR = 8 * math.sqrt(42)
VERTEX_COEFFS = VERTEX_NUMERATORS / VERTEX_DENOMINATOR

# value of |<W|e+^5>|^2, frozen from a dense 32-dim contraction
REGULAR_PROBABILITY = 0.14285714285714293


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_unit_vectors(rng, shape):
    v = rng.normal(size=tuple(shape) + (3,))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)
