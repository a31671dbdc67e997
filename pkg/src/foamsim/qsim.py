"""Ideal statevector emulation of the layered entangling-gate protocol.

States are plain complex numpy vectors of length 2**n, qubit 0 being the most
significant bit (|q0 q1 ... q_{n-1}>). Couplings are g/2π in MHz and times in
ns, so an entangling gate accumulates phase 2π·g·τ·1e-3 per unit matrix element.

Gate conventions:
    R_β(α) = exp(-i α/2 (cos β X + sin β Y))
    Z(γ)   = exp(-i γ/2 Z)
    U^{-1}(θ, φ) = R_{φ-π/2}(θ), which sends cos(θ/2)|0> + e^{iφ} sin(θ/2)|1> to |0>.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence, Union

import numpy as np

__all__ = [
    "MAX_QUBITS",
    "PHASE_PER_MHZ_NS",
    "CouplingMatrix",
    "Rotation",
    "Phase",
    "Entangle",
    "UInverse",
    "Glue",
    "PulseSchedule",
    "zero_state",
    "apply_single",
    "rotation_matrix",
    "phase_matrix",
    "apply_rotation",
    "apply_phase",
    "apply_u_inverse",
    "apply_glue",
    "apply_entangling",
    "apply_group",
    "effective_coupling",
    "run_steps",
    "run_schedule",
    "all_zero_probability",
    "fidelity_pure",
    "measurement_probability",
    "load_couplings",
    "bundled_couplings",
    "GLUE_MATRIX",
]

MAX_QUBITS = 10
PHASE_PER_MHZ_NS = 2 * math.pi * 1e-3

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_I2 = np.eye(2, dtype=complex)


def zero_state(n: int) -> np.ndarray:
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"qubit count must be in 1..{MAX_QUBITS}, got {n}")
    s = np.zeros(2**n, dtype=complex)
    s[0] = 1.0
    return s


def _n_qubits(state: np.ndarray) -> int:
    n = int(state.size).bit_length() - 1
    if 2**n != state.size:
        raise ValueError(f"state length {state.size} is not a power of two")
    return n


def _check_qubit(q: int, n: int) -> None:
    if not 0 <= q < n:
        raise IndexError(f"qubit {q} out of range for {n} qubits")


def apply_single(state: np.ndarray, u: np.ndarray, q: int) -> np.ndarray:
    n = _n_qubits(state)
    _check_qubit(q, n)
    t = state.reshape((2,) * n)
    t = np.moveaxis(np.tensordot(u, t, axes=(1, q)), 0, q)
    return t.reshape(-1)


def rotation_matrix(alpha: float, beta: float) -> np.ndarray:
    axis = math.cos(beta) * _X + math.sin(beta) * _Y
    return math.cos(alpha / 2) * _I2 - 1j * math.sin(alpha / 2) * axis


def phase_matrix(gamma: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * gamma), np.exp(0.5j * gamma)])


def apply_rotation(state, q: int, alpha: float, beta: float) -> np.ndarray:
    return apply_single(state, rotation_matrix(alpha, beta), q)


def apply_phase(state, q: int, gamma: float) -> np.ndarray:
    return apply_single(state, phase_matrix(gamma), q)


def apply_u_inverse(state, q: int, theta: float, phi: float) -> np.ndarray:
    return apply_single(state, rotation_matrix(theta, phi - math.pi / 2), q)


# CNOT(a -> b) followed by a Hadamard on a: (|00> + |11>)/√2 -> |00>
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
GLUE_MATRIX = np.kron(_H, _I2) @ _CNOT


def apply_glue(state, qa: int, qb: int) -> np.ndarray:
    n = _n_qubits(state)
    _check_qubit(qa, n)
    _check_qubit(qb, n)
    if qa == qb:
        raise ValueError("glue needs two distinct qubits")
    t = state.reshape((2,) * n)
    t = np.tensordot(GLUE_MATRIX.reshape(2, 2, 2, 2), t, axes=((2, 3), (qa, qb)))
    t = np.moveaxis(t, (0, 1), (qa, qb))
    return t.reshape(-1)


def effective_coupling(g_i: float, g_j: float, delta: float, g_ij: float) -> float:
    """Dispersive qubit-qubit coupling g_i g_j / Δ + g_ij (all MHz)."""
    if delta == 0:
        raise ValueError("detuning must be nonzero in the dispersive regime")
    return g_i * g_j / delta + g_ij


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """Effective couplings g_ij/2π (MHz) of one group acting on ``qubits``."""

    label: str
    qubits: tuple
    matrix: np.ndarray
    names: tuple = ()

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        k = len(self.qubits)
        if m.shape != (k, k):
            raise ValueError(f"coupling matrix shape {m.shape} does not match {k} qubits")
        if not np.allclose(m, m.T, atol=0, rtol=0):
            raise ValueError("coupling matrix must be symmetric")
        if np.any(np.diag(m) != 0):
            raise ValueError("coupling matrix must have zero diagonal")
        if len(set(self.qubits)) != k:
            raise ValueError("group qubits must be distinct")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))

    @classmethod
    def zeros(cls, label: str, qubits) -> "CouplingMatrix":
        k = len(qubits)
        return cls(label, tuple(qubits), np.zeros((k, k)))

    @property
    def size(self) -> int:
        return len(self.qubits)

    def hamiltonian(self) -> np.ndarray:
        """sum_{i<j} g_ij (σ+_i σ-_j + σ-_i σ+_j) on the group's 2^k space."""
        k = self.size
        h = np.zeros((2**k, 2**k))
        for idx in range(2**k):
            for i in range(k):
                for j in range(i + 1, k):
                    bi, bj = k - 1 - i, k - 1 - j
                    if ((idx >> bi) & 1) != ((idx >> bj) & 1):
                        h[idx ^ (1 << bi) ^ (1 << bj), idx] += self.matrix[i, j]
        return h

    @cached_property
    def _sectors(self):
        # exact diagonalization per excitation-number block
        h = self.hamiltonian()
        popcount = np.array([bin(i).count("1") for i in range(h.shape[0])])
        out = []
        for m in range(self.size + 1):
            idx = np.flatnonzero(popcount == m)
            w, v = np.linalg.eigh(h[np.ix_(idx, idx)])
            out.append((idx, w, v))
        return out

    def eigh(self):
        """Eigenvalues (MHz) and eigenvectors of the full group Hamiltonian,
        assembled block-diagonally from the excitation sectors."""
        dim = 2**self.size
        w = np.empty(dim)
        v = np.zeros((dim, dim))
        pos = 0
        for idx, ws, vs in self._sectors:
            cols = np.arange(pos, pos + len(idx))
            w[cols] = ws
            v[np.ix_(idx, cols)] = vs
            pos += len(idx)
        return w, v

    def propagator(self, tau: float) -> np.ndarray:
        dim = 2**self.size
        u = np.zeros((dim, dim), dtype=complex)
        for idx, w, v in self._sectors:
            u[np.ix_(idx, idx)] = (v * np.exp(-1j * PHASE_PER_MHZ_NS * w * tau)) @ v.T
        return u

    def propagator_derivative(self, tau: float) -> np.ndarray:
        """d/dτ of ``propagator(tau)``."""
        dim = 2**self.size
        du = np.zeros((dim, dim), dtype=complex)
        for idx, w, v in self._sectors:
            rate = -1j * PHASE_PER_MHZ_NS * w
            du[np.ix_(idx, idx)] = (v * (rate * np.exp(rate * tau))) @ v.T
        return du

    def to_json(self) -> dict:
        names = self.names or tuple(f"q{q}" for q in self.qubits)
        couplings = {
            f"{names[i]}-{names[j]}": float(self.matrix[i, j])
            for i in range(self.size) for j in range(i + 1, self.size)
        }
        return {"label": self.label, "qubits": list(names), "couplings_mhz": couplings}

    @classmethod
    def from_json(cls, data: dict, offset: int = 0) -> "CouplingMatrix":
        names = tuple(data["qubits"])
        index = {name: i for i, name in enumerate(names)}
        m = np.zeros((len(names), len(names)))
        for key, value in data["couplings_mhz"].items():
            a, b = key.split("-")
            if a not in index or b not in index:
                raise ValueError(f"coupling {key!r} names a qubit outside the group")
            i, j = index[a], index[b]
            m[i, j] = m[j, i] = float(value)
        qubits = data.get("positions", list(range(offset, offset + len(names))))
        return cls(str(data.get("label", "")), tuple(qubits), m, names)


def apply_entangling(state, coupling: CouplingMatrix, tau: float, qubits=None) -> np.ndarray:
    """exp(-i H τ) on the group's qubits."""
    if tau < 0:
        raise ValueError("entangling duration must be non-negative")
    qubits = tuple(coupling.qubits if qubits is None else qubits)
    if len(qubits) != coupling.size or len(set(qubits)) != len(qubits):
        raise ValueError("group qubits must be distinct and match the coupling matrix")
    return apply_group(state, coupling.propagator(tau), qubits)


def apply_group(state, u: np.ndarray, qubits) -> np.ndarray:
    n = _n_qubits(state)
    for q in qubits:
        _check_qubit(q, n)
    k = len(qubits)
    t = state.reshape((2,) * n)
    t = np.tensordot(u.reshape((2,) * (2 * k)), t, axes=(tuple(range(k, 2 * k)), qubits))
    t = np.moveaxis(t, tuple(range(k)), qubits)
    return t.reshape(-1)


# --- gate steps -------------------------------------------------------------

@dataclass(frozen=True)
class Rotation:
    q: int
    alpha: float
    beta: float


@dataclass(frozen=True)
class Phase:
    q: int
    gamma: float


@dataclass(frozen=True)
class Entangle:
    group: str
    tau: float


@dataclass(frozen=True)
class UInverse:
    q: int
    theta: float
    phi: float


@dataclass(frozen=True)
class Glue:
    qa: int
    qb: int


GateStep = Union[Rotation, Phase, Entangle, UInverse, Glue]


def _group_lookup(couplings) -> dict:
    if couplings is None:
        return {}
    if isinstance(couplings, CouplingMatrix):
        couplings = [couplings]
    return {c.label: c for c in couplings}


def run_steps(steps: Sequence[GateStep], n_qubits: int, couplings=None, state=None) -> np.ndarray:
    groups = _group_lookup(couplings)
    s = zero_state(n_qubits) if state is None else np.asarray(state, dtype=complex)
    for step in steps:
        if isinstance(step, Rotation):
            s = apply_rotation(s, step.q, step.alpha, step.beta)
        elif isinstance(step, Phase):
            s = apply_phase(s, step.q, step.gamma)
        elif isinstance(step, Entangle):
            if step.group not in groups:
                raise KeyError(f"no coupling matrix for group {step.group!r}")
            s = apply_entangling(s, groups[step.group], step.tau)
        elif isinstance(step, UInverse):
            s = apply_u_inverse(s, step.q, step.theta, step.phi)
        elif isinstance(step, Glue):
            s = apply_glue(s, step.qa, step.qb)
        else:
            raise TypeError(f"unknown gate step {step!r}")
    return s


# --- pulse schedules --------------------------------------------------------

@dataclass
class PulseSchedule:
    """Initialization rotations followed by ``depth`` layers.

    Each layer runs every group's entangling gate for its own duration, then a
    rotation R_β(α) and a phase Z(γ) on every qubit.
    """

    init: np.ndarray            # (n, 2): alpha, beta
    taus: np.ndarray            # (depth, n_groups), ns
    gates: np.ndarray           # (depth, n, 3): alpha, beta, gamma
    groups: tuple = ("A",)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.init = np.asarray(self.init, dtype=float).reshape(-1, 2)
        n = self.init.shape[0]
        self.taus = np.asarray(self.taus, dtype=float).reshape(-1, len(self.groups))
        self.gates = np.asarray(self.gates, dtype=float).reshape(self.taus.shape[0], n, 3)
        self.groups = tuple(self.groups)
        if np.any(self.taus < 0):
            raise ValueError("entangling durations must be non-negative")

    @property
    def n_qubits(self) -> int:
        return self.init.shape[0]

    @property
    def depth(self) -> int:
        return self.taus.shape[0]

    @classmethod
    def empty(cls, n_qubits: int, groups=("A",)) -> "PulseSchedule":
        return cls(np.zeros((n_qubits, 2)), np.zeros((0, len(groups))),
                   np.zeros((0, n_qubits, 3)), tuple(groups))

    @staticmethod
    def parameter_count(n_qubits: int, depth: int, n_groups: int = 1) -> int:
        return 2 * n_qubits + depth * (n_groups + 3 * n_qubits)

    def to_vector(self) -> np.ndarray:
        parts = [self.init.ravel()]
        for i in range(self.depth):
            parts += [self.taus[i], self.gates[i].ravel()]
        return np.concatenate(parts)

    @classmethod
    def from_vector(cls, x, n_qubits: int, depth: int, groups=("A",)) -> "PulseSchedule":
        x = np.asarray(x, dtype=float)
        g = len(groups)
        if x.size != cls.parameter_count(n_qubits, depth, g):
            raise ValueError("parameter vector has the wrong length")
        init = x[: 2 * n_qubits].reshape(n_qubits, 2)
        taus, gates = [], []
        off = 2 * n_qubits
        for _ in range(depth):
            taus.append(x[off: off + g])
            off += g
            gates.append(x[off: off + 3 * n_qubits].reshape(n_qubits, 3))
            off += 3 * n_qubits
        return cls(init, np.reshape(taus, (depth, g)), np.reshape(gates, (depth, n_qubits, 3)), tuple(groups))

    def steps(self) -> list:
        out: list = [Rotation(q, a, b) for q, (a, b) in enumerate(self.init)]
        for i in range(self.depth):
            out += [Entangle(label, float(t)) for label, t in zip(self.groups, self.taus[i])]
            for q, (a, b, c) in enumerate(self.gates[i]):
                out += [Rotation(q, a, b), Phase(q, c)]
        return out

    def to_json(self) -> dict:
        layers = []
        for i in range(self.depth):
            layer: dict = {}
            if len(self.groups) == 1:
                layer["tau_ns"] = float(self.taus[i, 0])
            else:
                layer["tau_ns_by_group"] = {lab: float(t) for lab, t in zip(self.groups, self.taus[i])}
            layer["gates"] = [
                {"q": q, "alpha": float(a), "beta": float(b), "gamma": float(c)}
                for q, (a, b, c) in enumerate(self.gates[i])
            ]
            layers.append(layer)
        out = {
            "init": [{"q": q, "alpha": float(a), "beta": float(b)} for q, (a, b) in enumerate(self.init)],
            "layers": layers,
        }
        if len(self.groups) > 1 or self.groups != ("A",):
            out["groups"] = list(self.groups)
        if self.metadata:
            out["metadata"] = self.metadata
        return out

    @classmethod
    def from_json(cls, data: dict) -> "PulseSchedule":
        try:
            init_rows = sorted(data["init"], key=lambda r: r["q"])
            n = len(init_rows)
            if [r["q"] for r in init_rows] != list(range(n)):
                raise ValueError("init must list every qubit exactly once")
            init = [[r["alpha"], r["beta"]] for r in init_rows]
            layers = data.get("layers", [])
            groups = data.get("groups")
            if groups is None:
                groups = ["A"]
                for layer in layers:
                    if "tau_ns_by_group" in layer:
                        groups = list(layer["tau_ns_by_group"])
                        break
            taus, gates = [], []
            for layer in layers:
                if "tau_ns_by_group" in layer:
                    taus.append([layer["tau_ns_by_group"][g] for g in groups])
                else:
                    taus.append([layer["tau_ns"]] * len(groups))
                rows = sorted(layer["gates"], key=lambda r: r["q"])
                if [r["q"] for r in rows] != list(range(n)):
                    raise ValueError("each layer must list every qubit exactly once")
                gates.append([[r["alpha"], r["beta"], r["gamma"]] for r in rows])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed schedule: {exc}") from exc
        d = len(taus)
        return cls(np.array(init, dtype=float), np.array(taus, dtype=float).reshape(d, len(groups)),
                   np.array(gates, dtype=float).reshape(d, n, 3), tuple(groups), dict(data.get("metadata", {})))

    @classmethod
    def load(cls, path) -> "PulseSchedule":
        return cls.from_json(json.loads(Path(path).read_text()))


def run_schedule(schedule, couplings=None, n_qubits: int | None = None) -> np.ndarray:
    """Run a PulseSchedule (or a list of gate steps) from |0...0>."""
    if isinstance(schedule, PulseSchedule):
        return run_steps(schedule.steps(), schedule.n_qubits, couplings)
    if n_qubits is None:
        raise ValueError("n_qubits is required when running a bare step list")
    return run_steps(schedule, n_qubits, couplings)


# --- readout ------------------------------------------------------------------

def all_zero_probability(state) -> float:
    state = np.asarray(state)
    return float(abs(state[0]) ** 2)


def fidelity_pure(state, target) -> float:
    state, target = np.asarray(state), np.asarray(target)
    if state.shape != target.shape:
        raise ValueError(f"dimension mismatch: {state.shape} vs {target.shape}")
    return float(abs(np.vdot(target, state)) ** 2)


def measurement_probability(state, boundary, glue_pair=(4, 9)) -> float:
    """All-zero probability after undoing each boundary tetrahedron.

    With as many boundary rows as qubits every qubit is reversed. A 10-qubit
    state with 8 rows is read as two glued vertices: the glue gate acts on
    ``glue_pair`` and the boundary covers the remaining qubits in order.
    """
    s = np.asarray(state, dtype=complex)
    n = _n_qubits(s)
    rows = [tuple(map(float, r)) for r in boundary]
    if len(rows) == n:
        targets = list(range(n))
    elif n == 10 and len(rows) == 8:
        s = apply_glue(s, *glue_pair)
        targets = [q for q in range(n) if q not in glue_pair]
    else:
        raise ValueError(f"boundary with {len(rows)} tetrahedra does not fit a {n}-qubit state")
    for q, (theta, phi) in zip(targets, rows):
        s = apply_u_inverse(s, q, theta, phi)
    return all_zero_probability(s)


# --- coupling files -----------------------------------------------------------

def load_couplings(source, dataset: str | None = None) -> list[CouplingMatrix]:
    """Read coupling groups from a JSON file or an already parsed dict.

    Accepts ``{"groups": [...]}`` or a mapping of named datasets, in which
    case ``dataset`` picks one. Groups without explicit ``positions`` occupy
    consecutive qubits in file order.
    """
    data = source if isinstance(source, dict) else json.loads(Path(source).read_text())
    if "groups" not in data:
        if dataset is None:
            names = [k for k in data if isinstance(data[k], dict) and "groups" in data[k]]
            if len(names) != 1:
                raise ValueError(f"coupling file holds datasets {names}; choose one")
            dataset = names[0]
        if dataset not in data:
            raise ValueError(f"unknown coupling dataset {dataset!r}")
        data = data[dataset]
    try:
        out, offset = [], 0
        for group in data["groups"]:
            c = CouplingMatrix.from_json(group, offset)
            out.append(c)
            offset += c.size
    except (KeyError, TypeError, AttributeError) as exc:
        raise ValueError(f"malformed coupling file: {exc}") from exc
    return out


def bundled_couplings(dataset: str) -> list[CouplingMatrix]:
    return load_couplings(Path(__file__).parent / "data" / "couplings.json", dataset)
