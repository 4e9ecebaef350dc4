"""Pinning-time priors: gamma and beta families plus tabulated densities.

Supported families (r is the pinning time):

* ``GammaHalfPrior(n, beta)`` -- Gamma(n - 1/2, beta) with density
  beta^a r^(a-1) e^(-beta r) / Gamma(a), a = n - 1/2, on (0, inf).
  With beta = 1/2 this is the chi-squared family with 2n - 1 degrees of
  freedom.  Mean a / beta.
* ``BetaHalfPrior(beta)`` -- Beta(1/2, beta) with density
  (1 - r)^(beta-1) / (sqrt(r) B(1/2, beta)) on (0, 1); beta = 1/2 is the
  arcsine law.  Mean 1 / (1 + 2 beta).  Time is fixed to the unit
  interval; rescale t -> t/T, x -> x/sqrt(T) on the caller side.
* ``TabulatedPrior(grid, density)`` -- piecewise-linear density on an
  ascending grid covering the whole support; renormalized at
  construction.

Sampling draw order is part of each family's contract (the Monte Carlo
engines replicate it exactly): see the ``sample_block`` docstrings.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = ["GammaHalfPrior", "BetaHalfPrior", "TabulatedPrior", "Prior",
           "load_tabulated_csv"]


def _beta_function_half(b: float) -> float:
    """B(1/2, b) = Gamma(1/2) Gamma(b) / Gamma(b + 1/2)."""
    return math.exp(math.lgamma(0.5) + math.lgamma(b) - math.lgamma(b + 0.5))


@dataclass(frozen=True)
class GammaHalfPrior:
    """theta ~ Gamma(n - 1/2, beta), rate parametrization, support (0, inf)."""

    n: int
    beta: float

    def __post_init__(self):
        if self.n < 1 or int(self.n) != self.n:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if self.beta <= 0.0:
            raise ValueError(f"beta must be positive, got {self.beta}")

    @property
    def alpha(self) -> float:
        return self.n - 0.5

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, math.inf)

    def density(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        pos = r > 0.0
        a = self.alpha
        lognorm = a * math.log(self.beta) - math.lgamma(a)
        rp = r[pos]
        out[pos] = np.exp(lognorm + (a - 1.0) * np.log(rp) - self.beta * rp)
        return out if out.ndim else float(out)

    def mean(self) -> float:
        return self.alpha / self.beta

    def sample_block(self, gen: np.random.Generator, m: int) -> np.ndarray:
        """Draw m pinning times.

        Draw order: m standard normals Z (the Gamma(1/2) half term Z^2/2),
        then n-1 vectors of m standard exponentials, summed; the total is
        divided by the rate beta.
        """
        z = gen.standard_normal(m)
        acc = 0.5 * (z * z)
        for _ in range(self.n - 1):
            acc = acc + gen.standard_exponential(m)
        return acc / self.beta

    def sample(self, gen: np.random.Generator) -> float:
        return float(self.sample_block(gen, 1)[0])


@dataclass(frozen=True)
class BetaHalfPrior:
    """theta ~ Beta(1/2, beta), support (0, 1)."""

    beta: float

    def __post_init__(self):
        if self.beta <= 0.0:
            raise ValueError(f"beta must be positive, got {self.beta}")

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, 1.0)

    def density(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        inside = (r > 0.0) & (r < 1.0)
        ri = r[inside]
        out[inside] = ((1.0 - ri) ** (self.beta - 1.0)
                       / (np.sqrt(ri) * _beta_function_half(self.beta)))
        return out if out.ndim else float(out)

    def mean(self) -> float:
        return 1.0 / (1.0 + 2.0 * self.beta)

    def sample_block(self, gen: np.random.Generator, m: int) -> np.ndarray:
        """Draw m pinning times.

        Draw order: m standard normals Z giving G1 = Z^2/2 ~ Gamma(1/2),
        then m standard-gamma(beta) variates G2; theta = G1 / (G1 + G2).
        """
        z = gen.standard_normal(m)
        g1 = 0.5 * (z * z)
        g2 = gen.standard_gamma(self.beta, m)
        return g1 / (g1 + g2)

    def sample(self, gen: np.random.Generator) -> float:
        return float(self.sample_block(gen, 1)[0])


class TabulatedPrior:
    """Piecewise-linear density tabulated on an ascending grid.

    The grid must include both endpoints of the support.  The density is
    renormalized at construction; a deviation beyond 1e-6 triggers a
    warning.  Sampling inverts the piecewise-quadratic CDF.
    """

    def __init__(self, grid, density):
        grid = np.asarray(grid, dtype=float)
        dens = np.asarray(density, dtype=float)
        if grid.ndim != 1 or grid.shape != dens.shape or len(grid) < 2:
            raise ValueError("grid and density must be equal-length 1-d "
                             "arrays with at least 2 points")
        if np.any(np.diff(grid) <= 0.0):
            raise ValueError("grid must be strictly ascending")
        if np.any(dens < 0.0) or not np.all(np.isfinite(dens)):
            raise ValueError("density values must be finite and >= 0")
        if grid[0] < 0.0:
            raise ValueError("support must lie in [0, inf)")
        h = np.diff(grid)
        total = float(np.sum(0.5 * h * (dens[:-1] + dens[1:])))
        if total <= 0.0:
            raise ValueError("density integrates to zero")
        if abs(total - 1.0) > 1e-6:
            warnings.warn(f"tabulated density integrates to {total:.8g}; "
                          f"renormalizing", stacklevel=2)
        self.grid = grid
        self.dens = dens / total
        seg = 0.5 * h * (self.dens[:-1] + self.dens[1:])
        self.cdf = np.concatenate([[0.0], np.cumsum(seg)])
        self.cdf[-1] = 1.0

    @property
    def support(self) -> tuple[float, float]:
        return (float(self.grid[0]), float(self.grid[-1]))

    def density(self, r):
        r = np.asarray(r, dtype=float)
        out = np.interp(r, self.grid, self.dens, left=0.0, right=0.0)
        return out if out.ndim else float(out)

    def mean(self) -> float:
        # exact first moment of the piecewise-linear density
        r0, r1 = self.grid[:-1], self.grid[1:]
        d0, d1 = self.dens[:-1], self.dens[1:]
        seg = (r1 - r0) * (d0 * (2.0 * r0 + r1) + d1 * (r0 + 2.0 * r1)) / 6.0
        return float(np.sum(seg))

    def inverse_cdf(self, u):
        """Quantile function; u may be scalar or array in [0, 1]."""
        u = np.asarray(u, dtype=float)
        i = np.clip(np.searchsorted(self.cdf, u, side="right") - 1,
                    0, len(self.grid) - 2)
        h = self.grid[i + 1] - self.grid[i]
        d0 = self.dens[i]
        slope = (self.dens[i + 1] - d0) / h
        du = u - self.cdf[i]
        # stable root of slope/2 s^2 + d0 s - du = 0
        disc = np.sqrt(d0 * d0 + 2.0 * slope * du)
        denom = d0 + disc
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(denom > 0.0, 2.0 * du / denom, 0.0)
        out = np.minimum(self.grid[i] + s, self.grid[i + 1])
        return out if out.ndim else float(out)

    def sample_block(self, gen: np.random.Generator, m: int) -> np.ndarray:
        """Draw order: m uniforms, mapped through ``inverse_cdf``."""
        return self.inverse_cdf(gen.random(m))

    def sample(self, gen: np.random.Generator) -> float:
        return float(self.sample_block(gen, 1)[0])


Prior = GammaHalfPrior | BetaHalfPrior | TabulatedPrior


def load_tabulated_csv(path) -> TabulatedPrior:
    """Read a two-column CSV (r, density); a non-numeric header is allowed."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) < 2:
                raise ValueError(f"{path}:{line_no + 1}: expected two columns")
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except ValueError:
                if line_no == 0:
                    continue  # header
                raise
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least two data rows")
    arr = np.array(rows)
    return TabulatedPrior(arr[:, 0], arr[:, 1])
