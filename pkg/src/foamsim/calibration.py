"""Chevron calibration: two-qubit swap patterns and coupling extraction.

P(|10>) after time t at detuning Δ, for an exchange coupling g:

    P = 1 - 4g^2/(Δ^2 + 4g^2) · sin^2(½ √(Δ^2 + 4g^2) · t̃),   t̃ = 2π·1e-3·t

with g, Δ in MHz and t in ns. Each detuning row oscillates at √(Δ^2 + 4g^2) MHz,
whose minimum over Δ is 2g.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import least_squares

__all__ = ["chevron_scan", "oscillation_frequencies", "extract_coupling"]


def _grid(values, name) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} grid must be a nonempty 1-d sequence")
    return arr


def chevron_scan(g: float, detunings, times) -> np.ndarray:
    """P(|10>) with rows over detuning (MHz) and columns over time (ns)."""
    d = _grid(detunings, "detuning")[:, None]
    t = _grid(times, "time")[None, :]
    omega2 = d**2 + 4 * g**2
    t_ang = 2 * math.pi * 1e-3 * t
    with np.errstate(invalid="ignore", divide="ignore"):
        contrast = np.where(omega2 > 0, 4 * g**2 / np.where(omega2 > 0, omega2, 1), 0.0)
    return 1 - contrast * np.sin(0.5 * np.sqrt(omega2) * t_ang) ** 2


def _row_frequency(row: np.ndarray, times: np.ndarray, pad: int) -> float:
    dt = times[1] - times[0]
    x = row - row.mean()
    if not np.any(np.abs(x) > 1e-12):
        return math.nan
    n = pad * x.size
    spec = np.abs(np.fft.rfft(x * np.hanning(x.size), n))
    freqs = np.fft.rfftfreq(n, dt * 1e-3)  # MHz
    k = int(np.argmax(spec[1:])) + 1
    f0 = freqs[k]

    def resid(p):
        a, f, ph, c = p
        return a * np.cos(2 * math.pi * f * 1e-3 * times + ph) + c - row

    amp = (row.max() - row.min()) / 2
    fit = least_squares(resid, [amp, f0, 0.0, row.mean()])
    best = fit
    # try a second phase seed; the cheaper of the two wins
    alt = least_squares(resid, [amp, f0, math.pi / 2, row.mean()])
    if alt.cost < best.cost:
        best = alt
    return abs(float(best.x[1]))


def oscillation_frequencies(matrix, times, pad: int = 16) -> np.ndarray:
    """Dominant oscillation frequency (MHz) of each detuning row.

    A zero-padded discrete Fourier peak seeds a least-squares sinusoid fit.
    """
    t = _grid(times, "time")
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    if m.shape[1] != t.size:
        raise ValueError("matrix columns must match the time grid")
    if t.size < 4 or not np.allclose(np.diff(t), t[1] - t[0]) or t[1] <= t[0]:
        raise ValueError("time grid must be uniform, increasing, with at least 4 points")
    return np.array([_row_frequency(row, t, pad) for row in m])


def extract_coupling(matrix, detunings, times) -> float:
    """Coupling g (MHz) from a chevron pattern.

    Fits f(Δ)^2 = a Δ^2 + b Δ + c over the rows and returns half the square root
    of its minimum, which tolerates an unknown resonance offset and grids that
    skip Δ = 0 exactly.
    """
    d = _grid(detunings, "detuning")
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    if m.shape[0] != d.size:
        raise ValueError("matrix rows must match the detuning grid")
    f = oscillation_frequencies(m, times)
    ok = np.isfinite(f)
    if ok.sum() == 1 or np.unique(d[ok]).size < 3:
        if not ok.any():
            raise ValueError("no oscillating rows in the chevron")
        return float(np.nanmin(f)) / 2
    a, b, c = np.polyfit(d[ok], f[ok] ** 2, 2)
    if a <= 0:
        return float(np.nanmin(f)) / 2
    fmin2 = c - b * b / (4 * a)
    return math.sqrt(max(fmin2, 0.0)) / 2
