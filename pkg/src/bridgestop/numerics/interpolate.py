"""Piecewise quintic Hermite interpolation and Chebyshev node helpers.

The quintic pieces match value, first and second derivative at both ends
of every interval, giving a C^2 interpolant whose second derivative is
accurate enough for residual checks of ODE solutions (O(h^4) versus the
O(1) second-derivative jumps of a cubic spline built from values alone).
"""

from __future__ import annotations

import numpy as np

__all__ = ["PiecewiseQuinticHermite", "chebyshev_lobatto_nodes"]


def chebyshev_lobatto_nodes(a: float, b: float, n: int) -> np.ndarray:
    """n Chebyshev-Lobatto points on [a, b], ascending, endpoints included."""
    if n < 2:
        raise ValueError("need at least 2 nodes")
    k = np.arange(n)
    x = np.cos(np.pi * k / (n - 1))[::-1]
    return 0.5 * (a + b) + 0.5 * (b - a) * x


class PiecewiseQuinticHermite:
    """C^2 interpolant from (value, derivative, second derivative) data."""

    def __init__(self, xs: np.ndarray, y: np.ndarray, dy: np.ndarray,
                 d2y: np.ndarray):
        xs = np.asarray(xs, dtype=float)
        if xs.ndim != 1 or len(xs) < 2:
            raise ValueError("xs must be a 1-d array of at least 2 points")
        if np.any(np.diff(xs) <= 0.0):
            raise ValueError("xs must be strictly increasing")
        y, dy, d2y = (np.asarray(v, dtype=float) for v in (y, dy, d2y))
        self.xs = xs
        h = np.diff(xs)
        y0, y1 = y[:-1], y[1:]
        m0, m1 = dy[:-1] * h, dy[1:] * h
        s0, s1 = d2y[:-1] * h * h, d2y[1:] * h * h
        r0 = y1 - y0 - m0 - 0.5 * s0
        r1 = m1 - m0 - s0
        r2 = s1 - s0
        # coefficients of p(t) = sum c_j t^j on t in [0, 1]
        self._c = np.stack([
            y0, m0, 0.5 * s0,
            10.0 * r0 - 4.0 * r1 + 0.5 * r2,
            -15.0 * r0 + 7.0 * r1 - r2,
            6.0 * r0 - 3.0 * r1 + 0.5 * r2,
        ])
        self._h = h

    def _locate(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.xs[0]) or np.any(x > self.xs[-1]):
            raise ValueError("evaluation outside interpolation range")
        i = np.clip(np.searchsorted(self.xs, x, side="right") - 1,
                    0, len(self.xs) - 2)
        t = (x - self.xs[i]) / self._h[i]
        return i, t

    def value(self, x):
        i, t = self._locate(x)
        c = self._c[:, i]
        out = c[5]
        for j in (4, 3, 2, 1, 0):
            out = out * t + c[j]
        return out if out.ndim else float(out)

    def derivative(self, x):
        i, t = self._locate(x)
        c = self._c[:, i]
        out = 5.0 * c[5]
        for j in (4, 3, 2, 1):
            out = out * t + j * c[j]
        out = out / self._h[i]
        return out if out.ndim else float(out)

    def second_derivative(self, x):
        i, t = self._locate(x)
        c = self._c[:, i]
        out = 20.0 * c[5]
        for j in (4, 3, 2):
            out = out * t + j * (j - 1) * c[j]
        out = out / self._h[i] ** 2
        return out if out.ndim else float(out)
