"""SU(2) substrate: half-integer spins, Clebsch-Gordan coefficients, group
elements, spin-1/2 coherent states and Haar sampling.

Group elements are stored as unit quaternions ``(a, b, c, d)`` with matrix

    [[ a + i b,  c + i d],
     [-c + i d,  a - i b]]

Haar sampling normalizes a 4-vector of independent standard Gaussians, which
is uniform on S^3 and therefore Haar-distributed on SU(2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

__all__ = [
    "HalfInteger",
    "SU2Element",
    "CoherentHalfSpin",
    "clebsch_gordan",
    "coherent_overlap",
    "haar_sample",
    "haar_quaternions",
    "quaternion_matrices",
    "su2_compose",
    "su2_inverse",
    "coherent_spinor",
    "antipodal_spinor",
]


@dataclass(frozen=True, order=True)
class HalfInteger:
    """A spin label j stored as the integer 2j."""

    twice: int

    def __post_init__(self):
        if not isinstance(self.twice, (int, np.integer)) or isinstance(self.twice, bool):
            raise TypeError("twice must be an integer")
        object.__setattr__(self, "twice", int(self.twice))

    @classmethod
    def of(cls, value) -> "HalfInteger":
        """Convert int, float, Fraction, "p/2" string or HalfInteger exactly."""
        if isinstance(value, HalfInteger):
            return value
        if isinstance(value, str):
            value = Fraction(value)
        if isinstance(value, (int, np.integer)):
            return cls(2 * int(value))
        if isinstance(value, Rational):
            doubled = 2 * Fraction(value)
        elif isinstance(value, (float, np.floating)):
            doubled = Fraction(2 * float(value))
        else:
            raise TypeError(f"cannot interpret {value!r} as a half-integer")
        if doubled.denominator != 1:
            raise ValueError(f"{value!r} is not a half-integer")
        return cls(int(doubled))

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def __float__(self) -> float:
        return self.twice / 2

    def __add__(self, other):
        return HalfInteger(self.twice + HalfInteger.of(other).twice)

    def __sub__(self, other):
        return HalfInteger(self.twice - HalfInteger.of(other).twice)

    def __neg__(self):
        return HalfInteger(-self.twice)

    def __abs__(self):
        return HalfInteger(abs(self.twice))

    def __repr__(self):
        if self.twice % 2 == 0:
            return f"HalfInteger({self.twice // 2})"
        return f"HalfInteger({self.twice}/2)"


def _spin(value) -> int:
    return HalfInteger.of(value).twice


def clebsch_gordan(j1, m1, j2, m2, J, M) -> float:
    """<j1 m1; j2 m2 | J M> in the Condon-Shortley convention.

    Evaluated with the Racah single-sum formula in exact rational arithmetic;
    only the final square root is taken in floating point.
    """
    tj1, tm1, tj2, tm2, tJ, tM = (_spin(x) for x in (j1, m1, j2, m2, J, M))
    for tj, tm in ((tj1, tm1), (tj2, tm2), (tJ, tM)):
        if tj < 0:
            raise ValueError("spins must be non-negative")
        if abs(tm) > tj:
            raise ValueError(f"|m| > j for j={tj}/2, m={tm}/2")
        if (tj - tm) % 2:
            raise ValueError(f"j={tj}/2 and m={tm}/2 differ by a non-integer")
    if tM != tm1 + tm2:
        return 0.0
    if tJ < abs(tj1 - tj2) or tJ > tj1 + tj2 or (tj1 + tj2 + tJ) % 2:
        return 0.0

    # all quantities below are plain integers (twice-values halved exactly)
    a = (tj1 + tj2 - tJ) // 2
    b = (tj1 - tm1) // 2
    c = (tj2 + tm2) // 2
    d = (tJ - tj2 + tm1) // 2
    e = (tJ - tj1 - tm2) // 2
    f = math.factorial
    pref = Fraction(
        (tJ + 1)
        * f((tJ + tj1 - tj2) // 2)
        * f((tJ - tj1 + tj2) // 2)
        * f(a),
        f((tj1 + tj2 + tJ) // 2 + 1),
    )
    pref *= (
        f((tJ + tM) // 2)
        * f((tJ - tM) // 2)
        * f((tj1 - tm1) // 2)
        * f((tj1 + tm1) // 2)
        * f((tj2 - tm2) // 2)
        * f((tj2 + tm2) // 2)
    )
    total = Fraction(0)
    for k in range(max(0, -d, -e), min(a, b, c) + 1):
        denom = f(k) * f(a - k) * f(b - k) * f(c - k) * f(d + k) * f(e + k)
        total += Fraction((-1) ** k, denom)
    if total == 0:
        return 0.0
    sign = 1.0 if total > 0 else -1.0
    sq = pref * total * total
    return sign * math.sqrt(sq.numerator) / math.sqrt(sq.denominator)


@dataclass(frozen=True)
class SU2Element:
    a: float
    b: float
    c: float
    d: float

    @classmethod
    def identity(cls) -> "SU2Element":
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_quaternion(cls, q) -> "SU2Element":
        q = np.asarray(q, dtype=float)
        q = q / np.linalg.norm(q)
        return cls(*map(float, q))

    @classmethod
    def from_matrix(cls, m) -> "SU2Element":
        m = np.asarray(m, dtype=complex)
        return cls(m[0, 0].real, m[0, 0].imag, m[0, 1].real, m[0, 1].imag)

    @property
    def quaternion(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d])

    @property
    def matrix(self) -> np.ndarray:
        return quaternion_matrices(self.quaternion)

    def __matmul__(self, other: "SU2Element") -> "SU2Element":
        return su2_compose(self, other)


def quaternion_matrices(q) -> np.ndarray:
    """2x2 matrices for quaternions of shape (..., 4)."""
    q = np.asarray(q, dtype=float)
    a, b, c, d = np.moveaxis(q, -1, 0)
    m = np.empty(q.shape[:-1] + (2, 2), dtype=complex)
    m[..., 0, 0] = a + 1j * b
    m[..., 0, 1] = c + 1j * d
    m[..., 1, 0] = -c + 1j * d
    m[..., 1, 1] = a - 1j * b
    return m


def su2_compose(g: SU2Element, h: SU2Element) -> SU2Element:
    """Matrix product g·h."""
    return SU2Element.from_matrix(g.matrix @ h.matrix)


def su2_inverse(g: SU2Element) -> SU2Element:
    return SU2Element(g.a, -g.b, -g.c, -g.d)


def haar_quaternions(rng: np.random.Generator, size) -> np.ndarray:
    """Array of Haar-random unit quaternions with shape ``size + (4,)``."""
    if isinstance(size, int):
        size = (size,)
    q = rng.standard_normal(tuple(size) + (4,))
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def haar_sample(rng: np.random.Generator) -> SU2Element:
    return SU2Element(*map(float, haar_quaternions(rng, ())))


@dataclass(frozen=True)
class CoherentHalfSpin:
    """cos(Θ/2)|↑> + e^{iΦ} sin(Θ/2)|↓>, pointing along (Θ, Φ)."""

    theta: float
    phi: float

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi):
            raise ValueError(f"theta={self.theta} outside [0, pi]")

    @classmethod
    def from_vector(cls, n, atol: float = 1e-9) -> "CoherentHalfSpin":
        n = np.asarray(n, dtype=float)
        norm = np.linalg.norm(n)
        if abs(norm - 1.0) > atol:
            raise ValueError(f"normal {n} is not a unit vector")
        z = float(np.clip(n[2] / norm, -1.0, 1.0))
        return cls(math.acos(z), math.atan2(n[1], n[0]))

    @property
    def vector(self) -> np.ndarray:
        return np.array([
            math.sin(self.theta) * math.cos(self.phi),
            math.sin(self.theta) * math.sin(self.phi),
            math.cos(self.theta),
        ])

    @property
    def state(self) -> np.ndarray:
        return coherent_spinor(self.theta, self.phi)


def coherent_spinor(theta, phi) -> np.ndarray:
    """Spinors for arrays of angles; shape ``broadcast(theta, phi) + (2,)``."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return np.stack(
        np.broadcast_arrays(np.cos(theta / 2) + 0j, np.exp(1j * phi) * np.sin(theta / 2)),
        axis=-1,
    )


def antipodal_spinor(spinor) -> np.ndarray:
    """Antiunitary flip J|n> = eps^{-1} conj(|n>), with eps = [[0, 1], [-1, 0]].

    J|n> equals |-n> up to a phase; for the standard coherent-state phase
    convention J|Θ, Φ> = -e^{-iΦ} |π-Θ, Φ+π>.
    """
    s = np.conj(np.asarray(spinor))
    return np.stack([-s[..., 1], s[..., 0]], axis=-1)


def coherent_overlap(n: CoherentHalfSpin, g: SU2Element, g2: SU2Element, n2: CoherentHalfSpin) -> complex:
    """<n| g^{-1} g2 |n2>."""
    left = g.matrix @ n.state
    right = g2.matrix @ n2.state
    return complex(np.vdot(left, right))
