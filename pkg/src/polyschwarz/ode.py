"""Dormand-Prince 5(4) integrator with step capping and event bracketing.

Written for right-hand sides that blow up like (1 - t)^-2 at t = 1: besides
the usual error control, the step is capped by a caller-supplied function of
t (typically ``0.05 * (1 - t)``).  Complex state vectors are supported.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Dormand-Prince tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4
_A_ROWS = [np.array(row) for row in _A]

H_FLOOR = 1e-12


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray
    status: str  # "completed", "event", "underflow"
    bracket: tuple | None = None
    bracket_states: tuple | None = None
    steps: int = 0
    rejected: int = 0
    messages: list = field(default_factory=list)


def dopri_step(rhs, t, y, h, k1=None):
    """One Dormand-Prince step; returns (y5, error estimate, k7)."""
    k = np.empty((7,) + np.shape(y), dtype=np.result_type(y, float))
    k[0] = rhs(t, y) if k1 is None else k1
    for i in range(1, 7):
        k[i] = rhs(t + _C[i] * h, y + h * (_A_ROWS[i] @ k[:i]))
    y5 = y + h * (_B5 @ k)
    err = h * (_E @ k)
    return y5, err, k[6]


def integrate(
    rhs,
    t0: float,
    y0,
    t_end: float,
    *,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    cap=None,
    event=None,
    event_tol: float = 1e-12,
    h0: float | None = None,
    h_floor: float = H_FLOOR,
    max_steps: int = 200000,
) -> Trajectory:
    """Integrate y' = rhs(t, y) from t0 toward t_end.

    ``event(t, y)`` is a real function; integration stops at the first step
    where it changes from positive to nonpositive, and the crossing is
    bracketed by bisection (re-stepping from the last accepted state) to
    width ``event_tol``.
    """
    y = np.array(y0, dtype=complex if np.iscomplexobj(y0) else float)
    t = float(t0)
    ts, ys = [t], [y.copy()]
    span = t_end - t0
    h = h0 if h0 is not None else min(1e-3, span / 10)
    if cap is not None:
        h = min(h, cap(t))
    k1 = rhs(t, y)
    ev_prev = event(t, y) if event is not None else None
    steps = rejected = 0
    while t < t_end:
        if steps >= max_steps:
            return Trajectory(np.array(ts), np.array(ys), "underflow", steps=steps, rejected=rejected,
                              messages=["step budget exhausted"])
        h = min(h, t_end - t)
        if cap is not None:
            h = min(h, cap(t))
        if cap is not None and cap(t) < h_floor:
            return Trajectory(np.array(ts), np.array(ys), "completed", steps=steps, rejected=rejected,
                              messages=[f"stopped at t = {t!r}: step cap below the floor"])
        if h < h_floor and t_end - t > h_floor:
            return Trajectory(np.array(ts), np.array(ys), "underflow", steps=steps, rejected=rejected,
                              messages=[f"step size underflow at t = {t!r}"])
        with np.errstate(over="ignore", invalid="ignore"):
            y_new, err, k7 = dopri_step(rhs, t, y, h, k1)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = np.sqrt(np.mean(np.abs(err / scale) ** 2)) if np.all(np.isfinite(y_new)) else np.inf
        if not np.isfinite(err_norm) or err_norm > 1.0:
            rejected += 1
            factor = 0.2 if not np.isfinite(err_norm) else max(0.2, 0.9 * err_norm ** -0.2)
            h *= factor
            continue
        t_new = t + h
        if event is not None:
            ev_new = event(t_new, y_new)
            if ev_prev > 0 and ev_new <= 0:
                lo, hi, y_lo, y_hi = _bisect_event(rhs, event, t, y, k1, h, y_new, event_tol)
                ts.append(lo)
                ys.append(y_lo)
                return Trajectory(np.array(ts), np.array(ys), "event", (lo, hi), (y_lo, y_hi),
                                  steps=steps + 1, rejected=rejected)
            ev_prev = ev_new
        t, y, k1 = t_new, y_new, k7
        ts.append(t)
        ys.append(y.copy())
        steps += 1
        growth = 5.0 if err_norm == 0 else min(5.0, 0.9 * err_norm ** -0.2)
        h *= growth
    return Trajectory(np.array(ts), np.array(ys), "completed", steps=steps, rejected=rejected)


def _bisect_event(rhs, event, t, y, k1, h, y_full, tol):
    lo, hi = 0.0, h
    y_lo, y_hi = y, y_full
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        with np.errstate(over="ignore", invalid="ignore"):
            y_mid = dopri_step(rhs, t, y, mid, k1)[0]
        ev = event(t + mid, y_mid) if np.all(np.isfinite(y_mid)) else -np.inf
        if ev > 0:
            lo, y_lo = mid, y_mid
        else:
            hi, y_hi = mid, y_mid
        if mid in (lo, hi) and hi - lo <= np.spacing(t + hi) * 4:
            break
    return t + lo, t + hi, y_lo, y_hi
