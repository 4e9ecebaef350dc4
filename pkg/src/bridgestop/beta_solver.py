"""Free-boundary solver for Beta(1/2, beta) pinning-time priors.

In the similarity variable z = x / sqrt(1-t) the value function
factorizes as V(t, x) = sqrt(1-t) u(z) and the boundary is
b(t) = A sqrt(1-t).  The profile u solves

    u''(z) + z (1 - 2 g(z)) u'(z) - u(z) = 0     off {0, A},
    u(z) = z and u'(z) = 1 at z = A (smooth pasting),
    u continuous at 0 with the elastic-killing kink
        u'(0+) - u'(0-) = alpha u(0),   alpha = 2 sqrt(2 pi) / B(1/2, beta),
    u(-inf) = 0,

with g the self-similar drift profile of the filter.  On z > 0 the
solution is C psi + D phi in terms of the increasing / decreasing
positive fundamental solutions normalized to 1 at 0+, and evenness of g
gives u(z) = (C + D) phi(-z) on z < 0.  Pasting at A determines

    C = (phi(A) - A phi'(A)) / W_A,   D = (A psi'(A) - psi(A)) / W_A,
    W_A = phi(A) psi'(A) - phi'(A) psi(A),

and the kink condition pins A as the unique root of p(A) = K where

    p(z) = (z psi'(z) - psi(z)) / (z phi'(z) - phi(z)),
    K = (psi'(0+) + phi'(0+) - alpha) / (2 phi'(0+) - alpha);

p decreases from p(0+) = 1 and K <= 1, so the root is found by a
bracketing search expanding upward from 0.

Construction of the pair: the ODE coefficient z(1 - 2 g(z)) has a finite
limit at 0+, so both solutions are regular there.  psi is integrated
forward from epsilon, its start slope isolated by bisection as the
smallest slope keeping psi' positive out to z_max; phi is integrated
backward from z_max starting on the decaying local branch (the direction
in which backward integration is stable) and rescaled to phi(eps) = 1.
Values, first and second derivatives are recorded on a dense Chebyshev
grid and evaluated through C^2 piecewise-quintic interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .filtering import g_beta
from .numerics import (PiecewiseQuinticHermite, RootBracket,
                       chebyshev_lobatto_nodes, find_root_monotone,
                       ode_integrate)
from .priors import _beta_function_half

__all__ = ["FundamentalPair", "BetaSolution", "drift_coefficient",
           "compute_fundamental_pair", "solve_beta", "value_beta",
           "boundary_beta"]

_PROXY_DEGREE = 280
_N_NODES = 1200
_STEP_TOL = 1e-12


def drift_coefficient(beta: float, z_max: float) -> Callable[[float], float]:
    """Fast evaluator of c(z) = z (1 - 2 g(z)) on [0, z_max].

    z g(z) extends analytically to z = 0 (limit sqrt(2) G(b+1/2)/G(b)), so
    it is interpolated once on a Chebyshev grid to near machine precision
    and c is assembled from the proxy; the direct route costs two adaptive
    quadratures per point, far too slow inside an ODE right-hand side.
    """
    def h_direct(z: float) -> float:
        if z < 1e-11:
            return math.sqrt(2.0) * math.exp(math.lgamma(beta + 0.5)
                                             - math.lgamma(beta))
        return z * g_beta(beta, z)

    k = np.arange(_PROXY_DEGREE + 1)
    # Chebyshev points of the first kind: interior, so z = 0 is never hit
    zs = 0.5 * z_max * (1.0 + np.cos(np.pi * (2.0 * k + 1.0)
                                     / (2.0 * (_PROXY_DEGREE + 1))))
    hs = np.array([h_direct(float(z)) for z in zs])
    cheb = np.polynomial.Chebyshev.fit(zs, hs, deg=_PROXY_DEGREE,
                                       domain=[0.0, z_max])
    coef = cheb.coef.copy()
    keep = np.nonzero(np.abs(coef) > 1e-14 * np.max(np.abs(coef)))[0]
    coef = coef[: keep[-1] + 1]

    scale = 2.0 / z_max

    def c(z: float) -> float:
        # Clenshaw on plain floats; z mapped to [-1, 1]
        zz = scale * z - 1.0
        b1 = b2 = 0.0
        two_zz = 2.0 * zz
        for a in coef[:0:-1]:
            b1, b2 = two_zz * b1 - b2 + a, b1
        h = zz * b1 - b2 + coef[0]
        return z - 2.0 * h

    # spot check the proxy against the direct route
    for z in (0.37 * z_max, 0.81 * z_max, 0.09 * z_max):
        if abs(c(z) - (z - 2.0 * h_direct(z))) > 1e-9 * (1.0 + abs(z)):
            raise RuntimeError("drift-coefficient interpolation failed to "
                               "converge; increase the proxy degree")
    return c


@dataclass(frozen=True)
class FundamentalPair:
    """Increasing (psi) and decreasing (phi) solutions on [epsilon, z_max].

    Both are normalized to 1 at epsilon (standing in for 0+); derivatives
    at 0+ are Richardson extrapolations from epsilon and 2 epsilon.
    """

    beta: float
    epsilon: float
    z_max: float
    _psi: PiecewiseQuinticHermite
    _phi: PiecewiseQuinticHermite
    _c: Callable[[float], float]

    def psi(self, z):
        return self._psi.value(z)

    def psi_prime(self, z):
        return self._psi.derivative(z)

    def phi(self, z):
        return self._phi.value(z)

    def phi_prime(self, z):
        return self._phi.derivative(z)

    def psi_second(self, z):
        return self._psi.second_derivative(z)

    def phi_second(self, z):
        return self._phi.second_derivative(z)

    @property
    def psi_prime0(self) -> float:
        e = self.epsilon
        return 2.0 * self.psi_prime(e) - self.psi_prime(2.0 * e)

    @property
    def phi_prime0(self) -> float:
        e = self.epsilon
        return 2.0 * self.phi_prime(e) - self.phi_prime(2.0 * e)

    def wronskian(self, z):
        return self.phi(z) * self.psi_prime(z) - self.phi_prime(z) * self.psi(z)


def _integrate_profile(c: Callable[[float], float], z0: float, z1: float,
                       u0: float, du0: float, step_tol: float,
                       nodes=None):
    def rhs(z, y):
        return np.array([y[1], y[0] - c(z) * y[1]])

    return ode_integrate(rhs, z0, z1, [u0, du0], step_tol, nodes=nodes)


def _shoot_psi_slope(c, epsilon: float, z_max: float) -> float:
    """Smallest start slope keeping the solution increasing to z_max."""

    def increasing(slope: float) -> bool:
        if slope < 0.0:
            return False  # decreasing at the start already
        tr = _integrate_profile(c, epsilon, z_max, 1.0, slope, 1e-7)
        return bool(np.all(tr.ys[:, 1] >= 0.0) and np.all(tr.ys[:, 0] > 0.0))

    lo, hi = -1.0, 1.0
    if not increasing(hi):  # pragma: no cover - c < 0 rules this out
        raise RuntimeError("no increasing branch found; enlarge the bracket")
    for _ in range(45):
        mid = 0.5 * (lo + hi)
        if increasing(mid):
            hi = mid
        else:
            lo = mid
    return hi


def compute_fundamental_pair(beta: float, epsilon: float = 1e-6,
                             z_max: float = 8.0, n_nodes: int = _N_NODES,
                             step_tol: float = _STEP_TOL) -> FundamentalPair:
    """Construct the normalized fundamental pair for the profile ODE."""
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    if not 0.0 < epsilon < 0.01 * z_max:
        raise ValueError("epsilon must be small and positive")

    c = drift_coefficient(beta, z_max)
    grid = chebyshev_lobatto_nodes(epsilon, z_max, n_nodes)

    slope = _shoot_psi_slope(c, epsilon, z_max)
    tr_psi = _integrate_profile(c, epsilon, z_max, 1.0, slope, step_tol,
                                nodes=grid[1:-1])

    c_end = c(z_max)
    decay_slope = 0.5 * (-c_end - math.sqrt(c_end * c_end + 4.0))
    tr_phi = _integrate_profile(c, z_max, epsilon, 1.0, decay_slope, step_tol,
                                nodes=grid[1:-1])

    def pack(tr, reverse: bool, scale: float) -> PiecewiseQuinticHermite:
        ts, ys = tr.ts, tr.ys
        if reverse:
            ts, ys = ts[::-1], ys[::-1]
        u = ys[:, 0] * scale
        du = ys[:, 1] * scale
        d2u = u - np.array([c(float(z)) for z in ts]) * du
        return PiecewiseQuinticHermite(ts, u, du, d2u)

    psi = pack(tr_psi, reverse=False, scale=1.0)
    phi_raw_at_eps = tr_phi.ys[-1, 0]
    if phi_raw_at_eps <= 0.0:
        raise ValueError("decreasing solution lost positivity; increase "
                         "z_max or decrease epsilon")
    phi = pack(tr_phi, reverse=True, scale=1.0 / phi_raw_at_eps)

    pair = FundamentalPair(beta, epsilon, z_max, psi, phi, c)
    probe = np.linspace(epsilon, z_max, 211)[1:]
    if np.any(pair.phi_prime(probe) >= 0.0) or np.any(pair.phi(probe) <= 0.0):
        raise ValueError("phi is not positive decreasing on the grid; "
                         "increase z_max or decrease epsilon")
    if np.any(pair.psi_prime(probe) < 0.0):
        raise ValueError("psi is not increasing on the grid")
    return pair


@dataclass(frozen=True)
class BetaSolution:
    """Solved boundary coefficient and value profile for one beta."""

    beta: float
    coef: float           # boundary coefficient A in b(t) = A sqrt(1-t)
    c_inc: float          # weight of psi on (0, A)
    c_dec: float          # weight of phi on (0, A)
    alpha: float          # kink constant 2 sqrt(2 pi) / B(1/2, beta)
    pair: FundamentalPair

    def profile(self, z: float) -> float:
        """The similarity profile u(z); V(t, x) = sqrt(1-t) u(x/sqrt(1-t))."""
        A, C, D, pair = self.coef, self.c_inc, self.c_dec, self.pair
        eps = pair.epsilon
        if z >= A:
            return float(z)
        if z >= eps:
            return C * pair.psi(z) + D * pair.phi(z)
        if z > -eps:
            # linear bridge across the kink; O(eps^2) from either side
            u0 = C + D
            du = (C * pair.psi_prime0 + D * pair.phi_prime0 if z >= 0.0
                  else -u0 * pair.phi_prime0)
            return u0 + du * z
        w = -z
        if w <= pair.z_max:
            return (C + D) * pair.phi(w)
        # algebraic ~ 1/w tail continuation beyond the grid
        return (C + D) * pair.phi(pair.z_max) * pair.z_max / w

    def value(self, t: float, x: float) -> float:
        return value_beta(self, t, x)

    def boundary(self, t: float) -> float:
        return boundary_beta(self, t)


def solve_beta(beta: float, epsilon: float = 1e-6, z_max: float = 8.0,
               verify: bool = True) -> BetaSolution:
    """Solve for the boundary coefficient A and the value profile.

    ``verify`` repeats the solve with epsilon/2 and 2 z_max and requires
    the two boundary coefficients to agree within 1e-6.
    """
    sol = _solve_beta_once(beta, epsilon, z_max)
    if verify:
        refined = _solve_beta_once(beta, 0.5 * epsilon, 2.0 * z_max)
        if abs(refined.coef - sol.coef) > 1e-6:
            raise RuntimeError(
                f"boundary coefficient did not converge under refinement: "
                f"{sol.coef!r} vs {refined.coef!r}")
    return sol


def _solve_beta_once(beta: float, epsilon: float, z_max: float) -> BetaSolution:
    pair = compute_fundamental_pair(beta, epsilon, z_max)
    alpha = 2.0 * math.sqrt(2.0 * math.pi) / _beta_function_half(beta)
    dpsi0, dphi0 = pair.psi_prime0, pair.phi_prime0
    K = (dpsi0 + dphi0 - alpha) / (2.0 * dphi0 - alpha)
    if K > 1.0 + 1e-9:
        raise RuntimeError(f"kink constant K={K} exceeds 1; the fundamental "
                           f"pair is inconsistent")

    def p_minus_K(z: float) -> float:
        num = z * pair.psi_prime(z) - pair.psi(z)
        den = z * pair.phi_prime(z) - pair.phi(z)
        return num / den - K

    lo = 2.0 * epsilon
    if p_minus_K(lo) <= 0.0:
        raise RuntimeError("boundary coefficient below resolution; "
                           "decrease epsilon")
    hi = 0.2
    while p_minus_K(hi) > 0.0:
        hi *= 1.6
        if hi > 0.9 * z_max:
            raise RuntimeError("no sign change up to 0.9 z_max; increase "
                               "z_max")
    A = find_root_monotone(p_minus_K, RootBracket(lo, hi, 1e-13))

    w_a = pair.phi(A) * pair.psi_prime(A) - pair.phi_prime(A) * pair.psi(A)
    C = (pair.phi(A) - A * pair.phi_prime(A)) / w_a
    D = (A * pair.psi_prime(A) - pair.psi(A)) / w_a
    return BetaSolution(beta, A, C, D, alpha, pair)


def value_beta(sol: BetaSolution, t: float, x: float) -> float:
    """V(t, x) = sqrt(1-t) u(x / sqrt(1-t)); V(1, 0) = 0."""
    if t == 1.0 and x == 0.0:
        return 0.0
    if not 0.0 <= t < 1.0:
        raise ValueError(f"need 0 <= t < 1, got t={t}")
    scale = math.sqrt(1.0 - t)
    return scale * sol.profile(x / scale)


def boundary_beta(sol: BetaSolution, t: float) -> float:
    """Stopping boundary A sqrt(1-t) on [0, 1]."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"need 0 <= t <= 1, got t={t}")
    return sol.coef * math.sqrt(1.0 - t)
