"""Discrete urn analogue: sequential draws without replacement.

An urn holds n red and n black balls; all 2n are drawn one by one, each
red worth +1 and each black -1, and the player may stop at any time and
keep the running sum s.  With n known this is the classical problem
whose scaled value converges to the known-pinning bridge solution
(the cumulative sum over 2n draws converges to a bridge pinned at the
end).  With n unknown the player holds a prior over n and updates it
from the draws; by exchangeability the posterior, hence the optimal
policy, depends only on (k, s) = (draws made, current sum).

Both solvers run exact backward induction over (k, s).  States are
indexed by the red count i = (k + s) / 2, feasible when both color
counts fit the urn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["UrnPolicy", "solve_known_n", "solve_unknown_n"]


@dataclass(frozen=True)
class UrnPolicy:
    """Backward-induction values and stop/continue actions.

    ``layers[k][i]`` is the value at k draws with i reds drawn
    (s = 2i - k); infeasible states hold 0 and are never reached.
    """

    n_max: int
    layers: tuple[np.ndarray, ...]

    def _locate(self, k: int, s: int) -> int:
        if not 0 <= k <= 2 * self.n_max:
            raise ValueError(f"k={k} outside 0..{2 * self.n_max}")
        if (k + s) % 2 or abs(s) > k:
            raise ValueError(f"unreachable state (k={k}, s={s})")
        return (k + s) // 2

    def value(self, k: int, s: int) -> float:
        return float(self.layers[k][self._locate(k, s)])

    def action(self, k: int, s: int) -> str:
        # ties between stopping and continuing count as stop
        return "stop" if self.value(k, s) <= s else "continue"

    def boundary(self, k: int) -> int | None:
        """Minimal sum at which stopping is optimal after k draws."""
        layer = self.layers[k]
        ss = 2 * np.arange(k + 1) - k
        hit = np.nonzero(layer <= ss)[0]
        return int(ss[hit[0]]) if hit.size else None

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("k,s,action,value\n")
            for k, layer in enumerate(self.layers):
                for i, v in enumerate(layer):
                    s = 2 * i - k
                    if not self._feasible(k, i):
                        continue
                    act = "stop" if v <= s else "continue"
                    fh.write(f"{k},{s},{act},{v:.12g}\n")

    def _feasible(self, k: int, i: int) -> bool:
        return i <= self.n_max and k - i <= self.n_max


def solve_known_n(n: int) -> UrnPolicy:
    """Exact policy when the urn size n is known."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    if n > 5000:
        raise ValueError("n > 5000 exceeds the memory budget")
    layers: list[np.ndarray] = [np.zeros(1)] * (2 * n + 1)
    layers[2 * n] = np.zeros(2 * n + 1)
    for k in range(2 * n - 1, -1, -1):
        i = np.arange(k + 1)
        s = 2.0 * i - k
        nxt = layers[k + 1]
        p_red = (n - i) / (2.0 * n - k)
        feas = (i <= n) & (k - i <= n)
        p_red = np.where(feas, np.clip(p_red, 0.0, 1.0), 0.0)
        cont = p_red * nxt[i + 1] + (1.0 - p_red) * nxt[i]
        layers[k] = np.where(feas, np.maximum(s, cont), 0.0)
    return UrnPolicy(n, tuple(layers))


def _posterior(log_prior: np.ndarray, ns: np.ndarray, k: int,
               i_vec: np.ndarray) -> np.ndarray:
    """Posterior over n for each state (k, i); shape (len(i_vec), len(ns)).

    The draw-sequence likelihood depends only on the color counts:
    falling factorials of reds and blacks over the falling factorial of
    the urn size.
    """
    i = i_vec[:, None].astype(float)
    b = k - i
    n = ns[None, :].astype(float)
    feas = (i <= n) & (b <= n)
    with np.errstate(invalid="ignore"):
        log_l = (math.lgamma(1.0) + _lg(n + 1.0) - _lg(n - i + 1.0)
                 + _lg(n + 1.0) - _lg(n - b + 1.0)
                 - (_lg(2.0 * n + 1.0) - _lg(2.0 * n - k + 1.0)))
    logw = np.where(feas, log_prior[None, :] + log_l, -np.inf)
    m = logw.max(axis=1, keepdims=True)
    bad = ~np.isfinite(m[:, 0])
    m = np.where(np.isfinite(m), m, 0.0)
    w = np.exp(logw - m)
    tot = w.sum(axis=1, keepdims=True)
    w = np.where(tot > 0.0, w / np.where(tot == 0.0, 1.0, tot), 0.0)
    if np.any(bad & (i_vec <= k)):
        # states with zero posterior mass are unreachable; leave weight 0
        pass
    return w


def _lg(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    ok = x > 0.0
    out[ok] = np.vectorize(math.lgamma)(x[ok]) if x[ok].size < 32 \
        else _lgamma_vec(x[ok])
    return out


_lgamma_vec = np.vectorize(math.lgamma)


def solve_unknown_n(prior_over_n: dict[int, float]) -> UrnPolicy:
    """Exact Bayesian policy for a finite prior over the urn size.

    The posterior after any draw history depends only on (k, s); the
    next-draw probability mixes the hypergeometric rates over it.  Prior
    mass on sizes made infeasible by the observed counts is renormalized
    away; a state where all mass dies is unreachable and never valued.
    """
    if not prior_over_n:
        raise ValueError("prior must be non-empty")
    ns = np.array(sorted(prior_over_n), dtype=np.int64)
    ws = np.array([prior_over_n[int(n)] for n in ns], dtype=float)
    if np.any(ns < 1) or np.any(ws < 0.0) or ws.sum() <= 0.0:
        raise ValueError("prior must put non-negative mass on positive n")
    if ns[-1] > 2000:
        raise ValueError("n_max > 2000 exceeds the memory budget")
    ws = ws / ws.sum()
    log_prior = np.where(ws > 0.0, np.log(np.where(ws > 0, ws, 1.0)), -np.inf)
    n_max = int(ns[-1])

    layers: list[np.ndarray] = [np.zeros(1)] * (2 * n_max + 1)
    layers[2 * n_max] = np.zeros(2 * n_max + 1)
    for k in range(2 * n_max - 1, -1, -1):
        i = np.arange(k + 1)
        s = 2.0 * i - k
        nxt = layers[k + 1]
        post = _posterior(log_prior, ns, k, i)     # (k+1, m)
        n_f = ns[None, :].astype(float)
        remaining = 2.0 * n_f - k
        exhausted = remaining <= 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            p_red_n = np.where(exhausted, 0.0,
                               (n_f - i[:, None]) / np.where(exhausted, 1.0,
                                                             remaining))
        p_red_n = np.clip(p_red_n, 0.0, 1.0)
        draw_mass = post * ~exhausted
        p_red = (draw_mass * p_red_n).sum(axis=1)
        p_any = draw_mass.sum(axis=1)
        stay_mass = (post * exhausted).sum(axis=1)  # urn exhausted: keep s
        cont = (p_red * nxt[i + 1] + (p_any - p_red) * nxt[i]
                + stay_mass * s)
        layers[k] = np.maximum(s, cont)
    return UrnPolicy(n_max, tuple(layers))
