"""Spin-1/2 Ooguri spin-foam amplitudes and an ideal emulator of the
superconducting-circuit protocol that measures them."""

from .intertwiner import E_MINUS, E_PLUS, IntertwinerBloch
from .spinfoam import amplitude_double, amplitude_single, two_vertex_state, vertex_state

__version__ = "0.1.0"

__all__ = [
    "E_MINUS",
    "E_PLUS",
    "IntertwinerBloch",
    "amplitude_double",
    "amplitude_single",
    "two_vertex_state",
    "vertex_state",
]
