"""Adaptive embedded Runge-Kutta integration (Dormand-Prince 5(4)).

Step size is controlled by the embedded 4th-order error estimate against
``atol = rtol = step_tol``.  The integration direction may be forward or
backward.  Callers can force the trajectory to land exactly on a list of
nodes; values there carry the integrator tolerance, while ``state_at``
interpolates between recorded points with cubic Hermite accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = ["Trajectory", "StiffnessError", "ode_integrate"]

# Dormand-Prince 5(4) tableau.
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
       187 / 2100, 1 / 40)


class StiffnessError(RuntimeError):
    """Step size underflowed; the problem is too stiff for this method."""


@dataclass
class Trajectory:
    """States and derivatives recorded along an integration.

    ``ts`` runs in integration order (ascending or descending); boundary
    and requested nodes are included exactly.
    """

    ts: np.ndarray
    ys: np.ndarray   # shape (len(ts), dim)
    dys: np.ndarray  # rhs evaluated at each recorded state

    def state_at(self, t: float) -> np.ndarray:
        """Cubic Hermite interpolation between recorded points."""
        ts, ys, dys = self.ts, self.ys, self.dys
        if ts[0] > ts[-1]:
            ts, ys, dys = ts[::-1], ys[::-1], dys[::-1]
        if not ts[0] <= t <= ts[-1]:
            raise ValueError(f"t={t} outside trajectory range "
                             f"[{ts[0]}, {ts[-1]}]")
        i = min(max(int(np.searchsorted(ts, t, side="right")) - 1, 0),
                len(ts) - 2)
        h = ts[i + 1] - ts[i]
        if h == 0.0:
            return ys[i].copy()
        s = (t - ts[i]) / h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return (h00 * ys[i] + h10 * h * dys[i]
                + h01 * ys[i + 1] + h11 * h * dys[i + 1])


def ode_integrate(rhs: Callable[[float, np.ndarray], np.ndarray],
                  z0: float, z1: float, state0: Sequence[float],
                  step_tol: float = 1e-10,
                  nodes: Sequence[float] | None = None,
                  max_steps: int = 2_000_000) -> Trajectory:
    """Integrate state' = rhs(z, state) from z0 to z1 (either direction).

    ``nodes`` are interior points the solver must land on exactly; they,
    plus both endpoints, make up the recorded trajectory.
    """
    if step_tol <= 0.0:
        raise ValueError("step_tol must be positive")
    y = np.asarray(state0, dtype=float).copy()
    if z1 == z0:
        d = rhs(z0, y)
        return Trajectory(np.array([z0]), y[None, :].copy(),
                          np.asarray(d, float)[None, :])
    direction = 1.0 if z1 > z0 else -1.0

    targets = [z0]
    if nodes is not None:
        inside = sorted({float(n) for n in nodes
                         if min(z0, z1) < n < max(z0, z1)},
                        reverse=direction < 0)
        targets += inside
    targets.append(z1)

    span = abs(z1 - z0)
    h = direction * min(span / 100.0, 0.1)
    min_h = 1e-14 * max(span, 1.0)

    rec_t = [z0]
    rec_y = [y.copy()]
    k1 = np.asarray(rhs(z0, y), dtype=float)
    rec_d = [k1.copy()]

    z = z0
    steps = 0
    for target in targets[1:]:
        while (target - z) * direction > 1e-15 * max(abs(target), 1.0):
            if steps >= max_steps:
                raise StiffnessError(f"exceeded {max_steps} steps")
            if abs(h) < min_h:
                raise StiffnessError(f"step size underflow near z={z:.6g}")
            if (z + h - target) * direction > 0.0:
                h = target - z
            k = [k1]
            for i in range(1, 7):
                yi = y + h * sum(a * kk for a, kk in zip(_A[i], k))
                k.append(np.asarray(rhs(z + _C[i] * h, yi), dtype=float))
            y5 = y + h * sum(b * kk for b, kk in zip(_B5, k) if b != 0.0)
            y4 = y + h * sum(b * kk for b, kk in zip(_B4, k) if b != 0.0)
            scale = step_tol + step_tol * np.maximum(np.abs(y), np.abs(y5))
            err = float(np.sqrt(np.mean(((y5 - y4) / scale) ** 2)))
            steps += 1
            if err <= 1.0:
                z = z + h
                y = y5
                k1 = k[6]  # FSAL
                factor = 5.0 if err == 0.0 else 0.9 * err ** -0.2
            else:
                factor = max(0.9 * err ** -0.2, 0.2)
            h *= min(max(factor, 0.2), 5.0)
        # snap to the target exactly
        z = target
        rec_t.append(z)
        rec_y.append(y.copy())
        rec_d.append(k1.copy())

    return Trajectory(np.array(rec_t), np.array(rec_y), np.array(rec_d))
