"""Adaptive Dormand-Prince 5(4) integrator for linear complex ODEs ``y' = f(t, y)``.

Written for the vectorised master equation, where the right-hand side is a
single sparse mat-vec. Steps are clipped so that every requested output time
is hit exactly (no dense-output interpolation).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import StiffnessError

# Dormand-Prince tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
                187 / 2100, 1 / 40])
_E = _B - _B4

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


@dataclass
class IntegratorStats:
    steps: int = 0
    rejected: int = 0
    nfev: int = 0


def _error_norm(err, y, y_new, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.max(np.abs(err / scale)))


def _initial_step(f, t0, y0, f0, rtol, atol, span):
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean(np.abs(y0 / scale) ** 2))
    d1 = np.sqrt(np.mean(np.abs(f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = f(t0 + h0, y0 + h0 * f0)
    d2 = np.sqrt(np.mean(np.abs((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, span)


def dopri5(f: Callable, y0: np.ndarray, times, rtol: float = 1e-8, atol: float = 1e-10,
           max_steps: int = 1_000_000, callback: Callable | None = None):
    """Integrate from ``times[0]`` and return the solution at every entry of ``times``.

    Parameters
    ----------
    f : callable
        ``f(t, y) -> dy/dt``.
    y0 : ndarray
        Initial value at ``times[0]``.
    times : array_like
        Strictly increasing output times.
    rtol, atol : float
        Local error tolerances.
    max_steps : int
        Hard cap on accepted plus rejected steps.
    callback : callable, optional
        ``callback(k, t, y)`` called at each output time instead of storing
        ``y``; the returned list then holds the callback results.

    Returns
    -------
    outputs : list
        Solution vectors (or callback results) at ``times``.
    stats : IntegratorStats

    Raises
    ------
    StiffnessError
        If the step size underflows or ``max_steps`` is exceeded.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a non-empty 1-d array")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    stats = IntegratorStats()
    y = np.array(y0, dtype=complex)
    t = float(times[0])
    emit = callback if callback is not None else (lambda k, tt, yy: yy.copy())
    out = [emit(0, t, y)]
    if times.size == 1:
        return out, stats

    fy = f(t, y)
    stats.nfev += 1
    h = _initial_step(f, t, y, fy, rtol, atol, float(times[-1] - t))
    stats.nfev += 1
    k = np.empty((7,) + y.shape, dtype=complex)

    for idx in range(1, times.size):
        t_target = float(times[idx])
        while t < t_target:
            if stats.steps + stats.rejected >= max_steps:
                raise StiffnessError(
                    f"step budget {max_steps} exhausted at t={t:.6g} "
                    f"(h={h:.3g}, rejected={stats.rejected})")
            h_min = 1e-14 * max(1.0, abs(t))
            if h < h_min:
                raise StiffnessError(
                    f"step size underflow at t={t:.6g} (h={h:.3g}, "
                    f"rejected={stats.rejected}); problem too stiff for an explicit method")
            remaining = t_target - t
            last = h >= remaining
            step = remaining if last else h
            k[0] = fy
            for s in range(1, 7):
                ys = y + step * np.tensordot(_A[s], k[:s], axes=1)
                k[s] = f(t + _C[s] * step, ys)
            stats.nfev += 6
            y_new = ys  # stage 7 argument is the 5th-order solution (FSAL)
            err = step * np.tensordot(_E, k, axes=1)
            en = _error_norm(err, y, y_new, rtol, atol)
            if en <= 1.0:
                t = t_target if last else t + step
                y = y_new
                fy = k[6].copy()
                stats.steps += 1
                fac = MAX_FACTOR if en == 0 else min(MAX_FACTOR, SAFETY * en ** -0.2)
                # clipped final steps should not shrink the natural step
                h = max(h, step * fac) if last else step * fac
            else:
                stats.rejected += 1
                h = step * max(MIN_FACTOR, SAFETY * en ** -0.2)
        out.append(emit(idx, t, y))
    return out, stats
