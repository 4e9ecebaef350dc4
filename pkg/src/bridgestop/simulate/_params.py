"""Shared wire format between the Python and compiled stepping engines.

Both engines consume the same packed prior description and boundary
matrix and must draw from the random stream in exactly the same order,
so identical seeds give bit-identical results on either backend.  The
draw protocol is documented in ``_engine_py`` (the reference
implementation); the compiled engine replicates it operation for
operation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..priors import BetaHalfPrior, GammaHalfPrior, TabulatedPrior

__all__ = ["FixedPin", "PriorPack", "pack_prior", "StoppingRule",
           "constant_rule", "sqrt_rule", "callable_rule", "BLOCK_SIZE"]

BLOCK_SIZE = 1 << 16  # paths per RNG block; part of the determinism contract

KIND_FIXED = 0
KIND_GAMMA_HALF = 1
KIND_BETA_HALF = 2
KIND_TABLE = 3

_EMPTY = np.zeros(0)


@dataclass(frozen=True)
class FixedPin:
    """Degenerate pinning time (known horizon), for benchmark simulations."""

    theta: float

    def __post_init__(self):
        if self.theta <= 0.0:
            raise ValueError("theta must be positive")

    def mean(self) -> float:
        return self.theta

    @property
    def support(self) -> tuple[float, float]:
        return (self.theta, self.theta)


@dataclass(frozen=True)
class PriorPack:
    """Flat prior description digestible by the compiled kernel."""

    kind: int
    a: float = 0.0
    n_extra: int = 0
    grid: np.ndarray = field(default_factory=lambda: _EMPTY)
    cdf: np.ndarray = field(default_factory=lambda: _EMPTY)
    dens: np.ndarray = field(default_factory=lambda: _EMPTY)


def pack_prior(prior) -> PriorPack:
    if isinstance(prior, FixedPin):
        return PriorPack(KIND_FIXED, a=prior.theta)
    if isinstance(prior, GammaHalfPrior):
        return PriorPack(KIND_GAMMA_HALF, a=prior.beta, n_extra=prior.n - 1)
    if isinstance(prior, BetaHalfPrior):
        return PriorPack(KIND_BETA_HALF, a=prior.beta)
    if isinstance(prior, TabulatedPrior):
        return PriorPack(KIND_TABLE,
                         grid=np.ascontiguousarray(prior.grid),
                         cdf=np.ascontiguousarray(prior.cdf),
                         dens=np.ascontiguousarray(prior.dens))
    raise TypeError(f"unsupported prior type {type(prior).__name__}")


@dataclass(frozen=True)
class StoppingRule:
    """First-crossing stopping rule: stop at the first grid time with
    X on or above the boundary."""

    kind: str                  # "const" | "sqrt" | "table"
    level: float = 0.0         # const level or sqrt coefficient
    horizon: float = math.inf  # sqrt horizon
    times: np.ndarray | None = None
    values: np.ndarray | None = None

    def boundary(self, t) -> np.ndarray | float:
        """Boundary level at time(s) t."""
        t = np.asarray(t, dtype=float)
        if self.kind == "const":
            out = np.full_like(t, self.level)
        elif self.kind == "sqrt":
            out = self.level * np.sqrt(np.maximum(self.horizon - t, 0.0))
        else:
            out = np.interp(t, self.times, self.values)
        return out if out.ndim else float(out)

    def scaled(self, factor: float) -> "StoppingRule":
        if self.kind == "table":
            return StoppingRule("table", times=self.times,
                                values=self.values * factor)
        return StoppingRule(self.kind, level=self.level * factor,
                            horizon=self.horizon)

    def discretize(self, t0: float, dt: float) -> np.ndarray:
        """Boundary values on the step grid t0 + k dt.

        The engines extrapolate the final entry to all later times, so a
        constant rule needs a single entry and finite-horizon rules stop
        at their horizon.
        """
        if self.kind == "const":
            return np.array([self.level])
        if self.kind == "sqrt":
            if not math.isfinite(self.horizon):
                raise ValueError("sqrt rule needs a finite horizon")
            n = max(int(math.ceil((self.horizon - t0) / dt)) + 1, 1)
            ts = t0 + dt * np.arange(n + 1)
            return self.level * np.sqrt(np.maximum(self.horizon - ts, 0.0))
        n = max(int(math.ceil((float(self.times[-1]) - t0) / dt)) + 1, 1)
        ts = t0 + dt * np.arange(n + 1)
        return np.interp(ts, self.times, self.values)


def constant_rule(level: float) -> StoppingRule:
    return StoppingRule("const", level=level)


def sqrt_rule(coef: float, horizon: float = 1.0) -> StoppingRule:
    """b(t) = coef * sqrt(max(horizon - t, 0))."""
    return StoppingRule("sqrt", level=coef, horizon=horizon)


def callable_rule(fn, t0: float, horizon: float, dt: float) -> StoppingRule:
    """Tabulate an arbitrary boundary function on the step grid."""
    n = max(int(math.ceil((horizon - t0) / dt)) + 1, 1)
    ts = t0 + dt * np.arange(n + 1)
    vals = np.array([float(fn(float(t))) for t in ts])
    return StoppingRule("table", times=ts, values=vals)
