"""Bracketed scalar root finding (Brent's method with bisection fallback)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

__all__ = ["RootBracket", "BracketError", "find_root_monotone"]


@dataclass(frozen=True)
class RootBracket:
    lo: float
    hi: float
    tol: float = 1e-12

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")


class BracketError(ValueError):
    """The function does not change sign over the given bracket."""


def find_root_monotone(f: Callable[[float], float], bracket: RootBracket,
                       max_iter: int = 200) -> float:
    """Root of a continuous monotone function inside a sign-changing bracket.

    Returns x with |f(x)| <= tol or enclosing-interval width <= tol.
    Inverse-quadratic/secant steps are taken when they help; bisection
    otherwise, so convergence is guaranteed.
    """
    a, b = bracket.lo, bracket.hi
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        raise BracketError(
            f"no sign change on [{a}, {b}]: f(a)={fa:.6g}, f(b)={fb:.6g}")

    tol = bracket.tol
    c, fc = a, fa
    d = e = b - a
    for _ in range(max_iter):
        if fb * fc > 0.0:
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        mid = 0.5 * (c - b)
        if abs(fb) <= tol or abs(mid) <= tol:
            return b
        if abs(e) >= tol and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:  # secant
                p, q = 2.0 * mid * s, 1.0 - s
            else:  # inverse quadratic
                q, r = fa / fc, fb / fc
                p = s * (2.0 * mid * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            p = abs(p)
            if 2.0 * p < min(3.0 * mid * q - abs(tol * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = mid
        else:
            d = e = mid
        a, fa = b, fb
        b += d if abs(d) > tol else math.copysign(tol, mid)
        fb = f(b)
    return b
