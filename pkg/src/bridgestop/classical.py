"""Benchmark solution when the pinning time T is known in advance.

The optimal rule stops at the square-root boundary b(t) = B sqrt(T - t),
where Shepp's constant B is the unique positive root of

    sqrt(2 pi) (1 - B^2) exp(B^2 / 2) Phi(B) = B      (B ~ 0.839924),

and below the boundary the value of the stopped bridge is

    V(t, x) = sqrt(2 pi (T-t)) (1 - B^2) exp(x^2 / (2(T-t))) Phi(x / sqrt(T-t)).

For any prior supported in [0, T] the unknown-pinning value is dominated
by this one, which makes it a universal upper bound in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .numerics import RootBracket, find_root_monotone, normal_cdf

__all__ = ["ClassicalSolution", "boundary_constant", "solve_classical",
           "value_classical", "boundary_classical"]


def _pasting_residual(c: float) -> float:
    return math.sqrt(2.0 * math.pi) * (1.0 - c * c) * math.exp(0.5 * c * c) \
        * normal_cdf(c) - c


@lru_cache(maxsize=1)
def boundary_constant() -> float:
    """Shepp's boundary coefficient, cached after the first solve.

    The residual function is positive at 0.5 and negative at 1.0 and
    strictly decreasing in between, so the bracket is sound.
    """
    return find_root_monotone(_pasting_residual, RootBracket(0.5, 1.0, 1e-14))


@dataclass(frozen=True)
class ClassicalSolution:
    """Known pinning time ``pin_time`` with boundary coef * sqrt(T - t)."""

    pin_time: float
    coef: float

    def boundary(self, t: float) -> float:
        return boundary_classical(self.pin_time, t)

    def value(self, t: float, x: float) -> float:
        return value_classical(self.pin_time, t, x)


def solve_classical(pin_time: float = 1.0) -> ClassicalSolution:
    if pin_time <= 0.0:
        raise ValueError("pin_time must be positive")
    return ClassicalSolution(pin_time, boundary_constant())


def boundary_classical(T: float, t: float) -> float:
    """Optimal stopping boundary B sqrt(T - t)."""
    if t > T:
        raise ValueError(f"t={t} exceeds the pinning time {T}")
    return boundary_constant() * math.sqrt(T - t)


def value_classical(T: float, t: float, x: float) -> float:
    """Value of optimally stopping the bridge pinned at the known time T.

    Defined for 0 <= t < T; at t = T the process has pinned and the value
    of the exhausted problem is max(x, 0) with V(T, 0) = 0.
    """
    if t > T:
        raise ValueError(f"t={t} exceeds the pinning time {T}")
    if t == T:
        return max(x, 0.0)
    rem = T - t
    B = boundary_constant()
    if x >= B * math.sqrt(rem):
        return x
    z = x / math.sqrt(rem)
    return math.sqrt(2.0 * math.pi * rem) * (1.0 - B * B) \
        * math.exp(0.5 * z * z) * normal_cdf(z)
