"""Closed-form stopping solution for Gamma(1/2, beta) pinning-time priors.

For this prior the filtered bridge is bang-bang Brownian motion with
drift -sqrt(2 beta) sgn(x) and constant killing rate sqrt(2 beta) at 0,
so the stopping problem is time homogeneous.  The optimal rule is a
constant threshold

    b = 1 / (2 sqrt(2 beta)),

and the value below it is

    V(x) = b e^(-1)          for x <= 0,
    V(x) = b e^(x/b - 1)     for 0 < x < b,
    V(x) = x                 for x >= b.

V is the unique bounded solution of 1/2 V'' - sqrt(2 beta) sgn(x) V' = 0
off {0, b} with smooth pasting at b and the elastic-killing derivative
jump V'(0+) - V'(0-) = 2 sqrt(2 beta) V(0); ``verify_fbp_residuals``
re-measures all of these conditions numerically.

Gamma priors with n >= 2 lose time homogeneity and are not solved here;
only their filter (``filtering.f_gamma``) is available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["GammaSolution", "GammaResidualReport", "solve_gamma",
           "value_gamma", "verify_fbp_residuals"]


@dataclass(frozen=True)
class GammaSolution:
    beta: float
    threshold: float  # optimal constant boundary

    def value(self, x: float) -> float:
        return value_gamma(self, x)


def solve_gamma(beta: float) -> GammaSolution:
    """Optimal threshold 1 / (2 sqrt(2 beta)) for the Gamma(1/2, beta) prior."""
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    return GammaSolution(beta, 0.5 / math.sqrt(2.0 * beta))


def value_gamma(sol: GammaSolution, x: float) -> float:
    b = sol.threshold
    if x >= b:
        return x
    if x <= 0.0:
        return b * math.exp(-1.0)
    return b * math.exp(x / b - 1.0)


def _dvalue_interior(sol: GammaSolution, x: float) -> float:
    """V' on the branch 0 <= x <= b, one-sided limits included."""
    return math.exp(x / sol.threshold - 1.0)


@dataclass(frozen=True)
class GammaResidualReport:
    """Residuals of every free-boundary condition the value must satisfy."""

    interior_max: float        # max |1/2 V'' - sqrt(2b) sgn(x) V'| on a grid
    boundary_continuity: float  # |V(b) - b|
    smooth_pasting: float      # |V'(b-) - 1|
    value_continuity_at_zero: float
    kink: float                # |V'(0+) - V'(0-) - 2 sqrt(2 beta) V(0)|
    bounded_tail: float        # |V(-50 b) - V(0)|

    @property
    def max_abs(self) -> float:
        return max(self.interior_max, self.boundary_continuity,
                   self.smooth_pasting, self.value_continuity_at_zero,
                   self.kink, self.bounded_tail)


def verify_fbp_residuals(sol: GammaSolution, n_grid: int = 2001) -> GammaResidualReport:
    """Measure the free-boundary conditions on the closed-form value.

    The interior operator 1/2 V'' - sqrt(2 beta) sgn(x) V' is evaluated
    analytically on a grid over (-5b, 0) and (0, b); the pasting, kink
    and boundedness conditions are checked at their points.
    """
    b = sol.threshold
    sq = math.sqrt(2.0 * sol.beta)

    xs_neg = np.linspace(-5.0 * b, -b * 1e-9, n_grid)
    xs_pos = np.linspace(b * 1e-9, b * (1.0 - 1e-9), n_grid)
    interior = 0.0
    for xs in (xs_neg, xs_pos):
        for x in xs:
            x = float(x)
            if 0.0 < x < b:
                v1 = math.exp(x / b - 1.0)
                v2 = v1 / b
            else:
                v1 = 0.0
                v2 = 0.0
            interior = max(interior,
                           abs(0.5 * v2 - sq * math.copysign(1.0, x) * v1))

    # pasting / kink residuals from the one-sided analytic limits
    v_prime_at_b = _dvalue_interior(sol, b)          # V'(b-)
    v_prime_0_plus = _dvalue_interior(sol, 0.0)      # V'(0+)
    v_prime_0_minus = 0.0                            # flat branch on x < 0
    report = GammaResidualReport(
        interior_max=interior,
        boundary_continuity=abs(b * math.exp(b / b - 1.0) - b),
        smooth_pasting=abs(v_prime_at_b - 1.0),
        value_continuity_at_zero=abs(b * math.exp(0.0 / b - 1.0)
                                     - value_gamma(sol, -1.0)),
        kink=abs(v_prime_0_plus - v_prime_0_minus
                 - 2.0 * sq * value_gamma(sol, 0.0)),
        bounded_tail=abs(value_gamma(sol, -50.0 * b) - value_gamma(sol, 0.0)),
    )
    return report
