"""Reference stepping engine in vectorized NumPy.

This file defines the draw protocol that the compiled engine replicates
bit for bit.  For one block of paths:

1. Pinning times are drawn first (see ``draw_thetas``): the prior-family
   composition consumes whole vectors in a fixed order.
2. The bridge is stepped on the grid t_k = t0 + k dt with the exact
   Gaussian transition

       X_{k+1} | X_k ~ N( X_k (rem - dt)/rem,  dt (rem - dt)/rem ),
       rem = theta - t_k,

   drawing one standard normal per surviving path per step, in ascending
   path order.  Paths with theta <= t_{k+1} pin during the step (X = 0
   afterwards, no draw).  Paths leave the active set when pinned or when
   every stopping rule has fired; rules fire at the first grid time with
   X on or above their boundary value, the start point included.

All floating-point expressions are written exactly as the compiled
kernel computes them (the extension is built with FMA contraction off),
which is what makes cross-backend bit-equality possible.
"""

from __future__ import annotations

import numpy as np

from ._params import (KIND_BETA_HALF, KIND_FIXED, KIND_GAMMA_HALF,
                      KIND_TABLE, PriorPack)

name = "python"


def draw_thetas(gen: np.random.Generator, pack: PriorPack, m: int) -> np.ndarray:
    """Pinning times for one block; the draw order is the contract."""
    if pack.kind == KIND_FIXED:
        return np.full(m, pack.a)
    if pack.kind == KIND_GAMMA_HALF:
        z = gen.standard_normal(m)
        acc = 0.5 * (z * z)
        for _ in range(pack.n_extra):
            acc = acc + gen.standard_exponential(m)
        return acc / pack.a
    if pack.kind == KIND_BETA_HALF:
        z = gen.standard_normal(m)
        g1 = 0.5 * (z * z)
        g2 = gen.standard_gamma(pack.a, m)
        return g1 / (g1 + g2)
    if pack.kind == KIND_TABLE:
        u = gen.random(m)
        return _table_inverse_cdf(pack, u)
    raise ValueError(f"unknown prior kind {pack.kind}")


def _table_inverse_cdf(pack: PriorPack, u: np.ndarray) -> np.ndarray:
    grid, cdf, dens = pack.grid, pack.cdf, pack.dens
    i = np.clip(np.searchsorted(cdf, u, side="right") - 1, 0, len(grid) - 2)
    h = grid[i + 1] - grid[i]
    d0 = dens[i]
    slope = (dens[i + 1] - d0) / h
    du = u - cdf[i]
    disc = np.sqrt(d0 * d0 + 2.0 * slope * du)
    denom = d0 + disc
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(denom > 0.0, 2.0 * du / denom, 0.0)
    return np.minimum(grid[i] + s, grid[i + 1])


def run_stopping_block(bit_generator, pack: PriorPack, t0: float, x0: float,
                       dt: float, bounds: np.ndarray,
                       payoffs: np.ndarray, stopped: np.ndarray) -> None:
    """Simulate one block under R stopping rules with common paths.

    ``bounds`` is (R, L): entry [r, min(k, L-1)] is rule r's boundary at
    t0 + k dt.  ``payoffs``/``stopped`` are (n, R) outputs, zero-filled.
    """
    gen = np.random.Generator(bit_generator)
    n, n_rules = payoffs.shape
    last = bounds.shape[1] - 1

    theta = draw_thetas(gen, pack, n)

    unstopped = np.ones((n_rules, n), dtype=bool)
    for r in range(n_rules):
        if x0 >= bounds[r, 0]:
            payoffs[:, r] = x0
            stopped[:, r] = 1
            unstopped[r, :] = False

    live = unstopped.any(axis=0)
    idx = np.nonzero(live)[0]
    x = np.full(idx.shape, x0)
    theta = theta[idx]
    unstopped = unstopped[:, idx]

    k = 0
    while idx.size:
        k += 1
        t_prev = t0 + (k - 1) * dt
        t_k = t0 + k * dt

        alive = theta > t_k  # others pin during this step: payoff stays 0
        if not alive.all():
            idx, x, theta = idx[alive], x[alive], theta[alive]
            unstopped = unstopped[:, alive]
            if not idx.size:
                break

        z = gen.standard_normal(idx.size)
        rem = theta - t_prev
        a = (rem - dt) / rem
        x = x * a + np.sqrt(dt * a) * z

        kk = k if k < last else last
        for r in range(n_rules):
            hit = unstopped[r] & (x >= bounds[r, kk])
            if hit.any():
                j = idx[hit]
                payoffs[j, r] = x[hit]
                stopped[j, r] = 1
                unstopped[r, hit] = False

        live = unstopped.any(axis=0)
        if not live.all():
            idx, x, theta = idx[live], x[live], theta[live]
            unstopped = unstopped[:, live]


def snapshot_block(bit_generator, pack: PriorPack, t0: float, x0: float,
                   dt: float, k_query: int,
                   x_out: np.ndarray, theta_out: np.ndarray) -> None:
    """March every path to the grid time t0 + k_query dt.

    ``x_out`` gets X at the query time for surviving paths (theta beyond
    the query time) and 0 for pinned ones; callers derive survival from
    ``theta_out``.
    """
    gen = np.random.Generator(bit_generator)
    n = x_out.shape[0]
    theta = draw_thetas(gen, pack, n)
    theta_out[:] = theta

    idx = np.arange(n)
    x = np.full(n, x0)
    x_out[:] = 0.0

    for k in range(1, k_query + 1):
        t_prev = t0 + (k - 1) * dt
        t_k = t0 + k * dt
        alive = theta > t_k
        if not alive.all():
            idx, x, theta = idx[alive], x[alive], theta[alive]
            if not idx.size:
                return
        z = gen.standard_normal(idx.size)
        rem = theta - t_prev
        a = (rem - dt) / rem
        x = x * a + np.sqrt(dt * a) * z
    x_out[idx] = x


def compensator_block(bit_generator, pack: PriorPack, x0: float, dt: float,
                      k_mark: int, k_end: int, qvals: np.ndarray,
                      bandwidth: float, theta_out: np.ndarray,
                      local_out: np.ndarray) -> None:
    """Accumulate int q dl (narrow-band local-time estimate) per path.

    Paths start at (0, x0); the occupation sum runs over grid indices
    k_mark <= j < k_end while the path survives, with band indicator
    |X_j| <= bandwidth and weight qvals[j - k_mark] dt / (2 bandwidth).
    """
    gen = np.random.Generator(bit_generator)
    n = theta_out.shape[0]
    theta = draw_thetas(gen, pack, n)
    theta_out[:] = theta
    local_out[:] = 0.0

    idx = np.arange(n)
    x = np.full(n, x0)
    scale = dt / (2.0 * bandwidth)

    for j in range(k_end):
        if j >= k_mark:
            inband = np.abs(x) <= bandwidth
            if inband.any():
                local_out[idx[inband]] += qvals[j - k_mark] * scale
        k = j + 1
        t_prev = j * dt
        t_k = k * dt
        alive = theta > t_k
        if not alive.all():
            idx, x, theta = idx[alive], x[alive], theta[alive]
            if not idx.size:
                return
        z = gen.standard_normal(idx.size)
        rem = theta - t_prev
        a = (rem - dt) / rem
        x = x * a + np.sqrt(dt * a) * z
