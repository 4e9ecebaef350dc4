"""Posterior of the pinning time and the filtered drift of the bridge.

Given survival to time t and X_t = x, the conditional law of the pinning
time theta has density proportional to

    w(t, x, r) * mu(r),   r > t,
    w(t, x, r) = sqrt(r/(r-t)) * exp(-r (x - k + t k / r)^2 / (2 t (r-t)))

where k is the start value X_0 and mu the prior density.  The
observation-adapted drift of the bridge is -x f(t, x) with

    f(t, x) = E[1/(theta - t) | X_t = x, t < theta]
            = int (r-t)^(-1) w mu dr / int w mu dr.

Quadrature in r always substitutes r = t + s^2, which removes the
integrable (r-t)^(-1/2) endpoint singularity exactly; beta priors get a
second substitution v = (1-r)^beta that removes the (1-r)^(beta-1)
singularity at the right end of their support.

Closed-form routes (start value 0):

* Gamma(n - 1/2, beta) priors:  f = sqrt(2 beta)/|x| * Q(t, x) with Q a
  ratio of half-integer Bessel-K sums; Q == 1 when n = 1, so the drift
  is the time-homogeneous -sqrt(2 beta) sgn(x).
* Beta(1/2, beta) priors:  f(t, x) = g(x/sqrt(1-t))/(1-t) with
  g(z) = U(beta, 3/2, z^2/2) / U(beta, 1/2, z^2/2); for beta = 1/2,
  g(z) = exp(-z^2/2) / (|z| sqrt(2 pi) (1 - Phi(|z|))).

The killing rate of the survival process at level 0 is

    q(t) = mu(t) / ( (2 pi t)^(-1/2) int_t^T sqrt(r/(r-t)) mu(r) dr ),

constant sqrt(2 beta) for the n = 1 gamma prior and
sqrt(2 pi/(1-t))/B(1/2, beta) for beta priors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .numerics import (QuadratureSpec, integrate_adaptive, bessel_k_half,
                       normal_pdf, normal_sf, tricomi_u)
from .priors import BetaHalfPrior, GammaHalfPrior, Prior, TabulatedPrior

__all__ = ["PosteriorState", "DriftEval", "posterior_density", "f_general",
           "f_gamma", "f_beta", "g_beta", "killing_rate", "drift_zero_limit"]

_FILTER_SPEC = QuadratureSpec(abs_tol=0.0, rel_tol=1e-10, max_subdivisions=4000)
# piecewise-linear densities have a kink at every knot; GK stalls there, so
# the tabulated route trades a digit of accuracy for convergence
_TABULATED_SPEC = QuadratureSpec(abs_tol=1e-14, rel_tol=1e-9,
                                 max_subdivisions=4000)


@dataclass(frozen=True)
class DriftEval:
    """Drift factor f >= 0 and the drift -x f at one point (t, x).

    At x = 0 with positive prior density at t the factor is infinite while
    the drift has finite one-sided limits; ``drift`` is then reported as
    0.0 (the symmetric convention) and ``zero_limit`` carries
    lim_{x -> 0+} x f(t, x) > 0, so the limiting drift from above is
    ``-zero_limit`` and from below ``+zero_limit``.
    """

    f_value: float
    drift: float
    route: str
    zero_limit: float | None = None


@dataclass(frozen=True)
class PosteriorState:
    """Survival state (t, X_t = x) under a prior, with start value kappa."""

    t: float
    x: float
    prior: Prior
    kappa: float = 0.0

    def __post_init__(self):
        if self.t < 0.0:
            raise ValueError(f"t must be >= 0, got {self.t}")
        hi = self.prior.support[1]
        if self.t >= hi:
            raise ValueError(f"t={self.t} is not inside the prior support "
                             f"(upper end {hi})")

    @cached_property
    def _normalizer(self) -> float:
        return _support_integral(self.prior, self.t, self.x, self.kappa, a=0)


def _log_weight_factored(t: float, x: float, kappa: float, r, s2):
    """log w(t, x, r) with the r-independent bulk exp(-(x-k)^2/(2t)) removed.

    ``s2`` is r - t.  The removed factor cancels in every ratio used here
    and keeping it out prevents underflow at large |x - kappa|.
    """
    if t == 0.0:
        # limiting weight as t -> 0 at fixed x: exp(-x^2/(2 r)); the
        # sqrt(r/(r-t)) factor tends to 1
        return -x * x / (2.0 * r)
    diff = x - kappa + t * kappa / r
    bulk = (x - kappa) ** 2 / (2.0 * t)
    return 0.5 * (np.log(r) - np.log(s2)) - r * diff * diff / (2.0 * t * s2) + bulk


def _support_integral(prior: Prior, t: float, x: float, kappa: float,
                      a: int, spec: QuadratureSpec | None = None) -> float:
    """int_t^T (r-t)^(-a) w(t,x,r) mu(r) dr (bulk factor removed), a in {0,1}."""
    if spec is None:
        spec = _TABULATED_SPEC if isinstance(prior, TabulatedPrior) \
            else _FILTER_SPEC
    lo, hi = prior.support
    if not lo <= t < hi:
        raise ValueError(f"t={t} outside prior support [{lo}, {hi})")

    def integrand_s(s: np.ndarray) -> np.ndarray:
        s2 = s * s
        r = t + s2
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            logw = _log_weight_factored(t, x, kappa, r, s2)
            out = 2.0 * np.exp(logw - (2.0 * a - 1.0) * np.log(s)) \
                * prior.density(r)
        return np.nan_to_num(out, nan=0.0, posinf=0.0)

    # interior peak of exp(-c/s^2) s^(-2a) sits near s ~ |x - kappa|/sqrt(2)
    s_star = max(abs(x - kappa) / math.sqrt(2.0), 1e-8)
    points = [s_star / 4.0, s_star, 4.0 * s_star]

    if isinstance(prior, BetaHalfPrior):
        # split at r = (1+t)/2; the right piece absorbs (1-r)^(beta-1)
        s_hi = math.sqrt((1.0 - t) / 2.0)
        pts = [p for p in points if p < s_hi]
        left = integrate_adaptive(integrand_s, 0.0, s_hi, spec, points=pts)
        right = _beta_right_piece(prior, t, x, kappa, a, spec)
        return left + right

    if isinstance(prior, GammaHalfPrior):
        points.append(math.sqrt(max(prior.mean() - t, prior.mean())))
        return integrate_adaptive(integrand_s, 0.0, math.inf, spec,
                                  points=sorted(set(points)))

    s_hi = math.sqrt(hi - t)
    pts = [p for p in points if p < s_hi]
    return integrate_adaptive(integrand_s, 0.0, s_hi, spec, points=pts)


def _beta_right_piece(prior: BetaHalfPrior, t: float, x: float, kappa: float,
                      a: int, spec: QuadratureSpec) -> float:
    """Beta-prior integral over ((1+t)/2, 1) via v = (1-r)^beta."""
    from .priors import _beta_function_half

    beta = prior.beta
    norm = _beta_function_half(beta)

    def integrand_v(v: np.ndarray) -> np.ndarray:
        r = 1.0 - v ** (1.0 / beta)
        s2 = r - t
        logw = _log_weight_factored(t, x, kappa, r, s2)
        return np.exp(logw - a * np.log(s2)) / (np.sqrt(r) * norm * beta)

    v_hi = ((1.0 - t) / 2.0) ** beta
    return integrate_adaptive(integrand_v, 0.0, v_hi, spec)


def posterior_density(state: PosteriorState, r) -> float | np.ndarray:
    """Normalized posterior density of the pinning time at r (> t)."""
    t = state.t
    if not 0.0 < t < state.prior.support[1]:
        raise ValueError(f"posterior_density needs 0 < t < support end, "
                         f"got t={t}")
    r_arr = np.asarray(r, dtype=float)
    out = np.zeros_like(r_arr)
    ok = r_arr > t
    rv = r_arr[ok]
    logw = _log_weight_factored(t, state.x, state.kappa, rv, rv - t)
    out[ok] = np.exp(logw) * state.prior.density(rv) / state._normalizer
    return out if out.ndim else float(out)


def f_general(state: PosteriorState) -> DriftEval:
    """Drift factor by direct quadrature of the posterior expectation.

    Valid for any prior and any start value; t = 0 uses the limiting
    weight exp(-x^2/(2r)).  At x = 0 the factor is infinite whenever the
    prior density at t is positive.
    """
    t, x, kappa = state.t, state.x, state.kappa
    if x == 0.0 and (t > 0.0 and float(state.prior.density(t)) > 0.0):
        return DriftEval(math.inf, 0.0, "quadrature",
                         zero_limit=drift_zero_limit(state.prior, t))
    try:
        num = _support_integral(state.prior, t, x, kappa, a=1)
        den = _support_integral(state.prior, t, x, kappa, a=0)
    except Exception:
        if x == 0.0:
            return DriftEval(math.inf, 0.0, "quadrature",
                             zero_limit=drift_zero_limit(state.prior, t))
        raise
    f = num / den
    return DriftEval(f, -x * f, "quadrature")


def _gamma_Q(n: int, beta: float, t: float, x: float) -> float:
    """Bessel-sum ratio Q(t, x) of the gamma closed form; Q <= 1."""
    y = math.sqrt(2.0 * beta) * abs(x)
    ratio = math.sqrt(2.0 * beta) / abs(x)
    num = den = 0.0
    for k in range(n):
        c = math.comb(n - 1, k) * t ** k * ratio ** k
        j_num = n - k - 2          # order j + 1/2 = n - k - 3/2
        m_num = j_num if j_num >= 0 else -j_num - 1
        m_den = n - k - 1          # order n - k - 1/2, always >= 1/2
        num += c * bessel_k_half(m_num, y)
        den += c * bessel_k_half(m_den, y)
    return num / den


def f_gamma(n: int, beta: float, t: float, x: float) -> DriftEval:
    """Closed-form drift factor for a Gamma(n - 1/2, beta) prior, start 0."""
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    if n < 1:
        raise ValueError("n must be a positive integer")
    if t < 0.0:
        raise ValueError("t must be >= 0")
    sq = math.sqrt(2.0 * beta)
    if x == 0.0:
        return DriftEval(math.inf, 0.0, "gamma_closed",
                         zero_limit=sq * _gamma_Q(n, beta, t, 1e-8))
    f = sq / abs(x) * _gamma_Q(n, beta, t, x)
    return DriftEval(f, -x * f, "gamma_closed")


def g_beta(beta: float, z: float) -> float:
    """Self-similar drift profile g(z) of the beta-prior filter.

    g(z) = U(beta, 3/2, z^2/2) / U(beta, 1/2, z^2/2); the arcsine case
    beta = 1/2 collapses to the Mills-ratio form, used directly.
    """
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    az = abs(z)
    if az == 0.0:
        return math.inf
    if beta == 0.5:
        return normal_pdf(az) / (az * normal_sf(az))
    y = 0.5 * z * z
    return tricomi_u(beta, 1.5, y) / tricomi_u(beta, 0.5, y)


def f_beta(beta: float, t: float, x: float) -> DriftEval:
    """Closed-form drift factor for a Beta(1/2, beta) prior, start 0."""
    if not 0.0 <= t < 1.0:
        raise ValueError(f"need 0 <= t < 1, got t={t}")
    horizon = 1.0 - t
    if x == 0.0:
        return DriftEval(math.inf, 0.0, "beta_closed",
                         zero_limit=drift_zero_limit(BetaHalfPrior(beta), t))
    z = x / math.sqrt(horizon)
    f = g_beta(beta, z) / horizon
    return DriftEval(f, -x * f, "beta_closed")


def killing_rate(prior: Prior, t: float) -> float:
    """Elastic killing rate q(t) of the surviving process at level 0."""
    lo, hi = prior.support
    if not 0.0 < t < hi:
        raise ValueError(f"t={t} must satisfy 0 < t < {hi}")
    if isinstance(prior, GammaHalfPrior) and prior.n == 1:
        return math.sqrt(2.0 * prior.beta)
    if isinstance(prior, BetaHalfPrior):
        from .priors import _beta_function_half
        return math.sqrt(2.0 * math.pi / (1.0 - t)) \
            / _beta_function_half(prior.beta)
    den = _support_integral(prior, t, 0.0, 0.0, a=0)
    return float(prior.density(t)) * math.sqrt(2.0 * math.pi * t) / den


def drift_zero_limit(prior: Prior, t: float) -> float:
    """Magnitude of the one-sided drift limit lim_{x -> 0+} x f(t, x).

    Closed forms for the gamma (n = 1) and beta families; a small-x
    numerical evaluation otherwise.
    """
    if isinstance(prior, GammaHalfPrior):
        sq = math.sqrt(2.0 * prior.beta)
        if prior.n == 1:
            return sq
        return sq * _gamma_Q(prior.n, prior.beta, t, 1e-8)
    if isinstance(prior, BetaHalfPrior):
        b = prior.beta
        gamma0 = math.sqrt(2.0) * math.exp(math.lgamma(b + 0.5)
                                           - math.lgamma(b))
        return gamma0 / math.sqrt(1.0 - t)
    x_eps = 1e-6
    ev = f_general(PosteriorState(t, x_eps, prior))
    return x_eps * ev.f_value
