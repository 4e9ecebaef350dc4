"""Monte Carlo engine for the bridge with a random pinning time.

Simulation uses the primal model: draw the pinning time theta from its
prior (or from the posterior at the start state when t0 > 0), then step
the bridge conditional on theta with exact Gaussian transitions.  This
is equal in law to the filtered dynamics with elastic killing at zero
and avoids discretizing the local-time killing altogether.

Paths are simulated in fixed-size blocks, each on its own spawned
PCG64 stream, so results are bit-identical for a given ``SimConfig``
regardless of backend (compiled or NumPy) and worker count.  Stopping
rules are evaluated at grid times only (first crossing from below, the
start point included); several rules can share paths, which is what
``optimality_probe`` uses as common random numbers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .. import filtering
from ..numerics import block_sequences, generator
from ..priors import BetaHalfPrior, GammaHalfPrior, Prior, TabulatedPrior
from ._backend import backend_name, engine
from . import _engine_py
from ._params import (BLOCK_SIZE, FixedPin, PriorPack, StoppingRule,
                      callable_rule, constant_rule, pack_prior, sqrt_rule)

__all__ = ["SimConfig", "BridgePath", "McReport", "ProbeReport",
           "CompensatorReport", "FilterReport", "FixedPin", "StoppingRule",
           "constant_rule", "sqrt_rule", "callable_rule", "simulate_path",
           "estimate_value", "optimality_probe", "validate_compensator",
           "validate_filter", "backend_name", "BLOCK_SIZE"]


@dataclass(frozen=True)
class SimConfig:
    """What to simulate: path count, step, seed, start state and prior."""

    n_paths: int
    seed: int
    prior: Prior | FixedPin
    dt: float = 1e-4
    t0: float = 0.0
    x0: float = 0.0
    workers: int = 1

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.t0 < 0.0:
            raise ValueError("t0 must be >= 0")
        mean = self.prior.mean()
        horizon = mean - self.t0 if mean > self.t0 else mean
        if self.dt > horizon / 100.0:
            raise ValueError(f"dt={self.dt} too coarse for expected horizon "
                             f"{horizon:.4g}; need dt <= horizon/100")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class BridgePath:
    """One discretized path; values are 0 from the pinning time onward."""

    theta: float
    times: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class McReport:
    estimate: float
    std_error: float
    ci95: tuple[float, float]
    n_paths: int
    seed: int
    stopped_fraction: float


@dataclass(frozen=True)
class ProbeReport:
    """Common-random-number comparison of a rule against scaled variants.

    ``reports[0]`` is the candidate; ``reports[i]`` matches ``scales[i]``
    (scales[0] == 1.0).  ``gaps[i-1]`` = candidate - variant i, with the
    paired standard error; ``candidate_maximal`` says no variant beat the
    candidate by more than 1.96 paired standard errors.
    """

    scales: tuple[float, ...]
    reports: tuple[McReport, ...]
    gaps: tuple[float, ...]
    gap_std_errors: tuple[float, ...]
    candidate_maximal: bool


@dataclass(frozen=True)
class CompensatorReport:
    """Pinning frequency against the local-time compensator estimate."""

    empirical: float
    empirical_se: float
    pathwise: float
    pathwise_se: float
    n_surviving: int
    sigmas: float

    @property
    def consistent(self) -> bool:
        return self.sigmas <= 3.0


@dataclass(frozen=True)
class FilterReport:
    """Sample mean of 1/(theta - t) in an x-bin against the drift factor."""

    sample_mean: float
    sample_se: float
    model_value: float
    n_in_bin: int
    sigmas: float

    @property
    def consistent(self) -> bool:
        return self.sigmas <= 3.0

    @property
    def sufficient(self) -> bool:
        return self.n_in_bin >= 50


def _posterior_table(prior: Prior, t0: float, x0: float) -> TabulatedPrior:
    """Tabulate the pinning-time posterior at (t0, x0) for sampling.

    The grid is quadratically spaced toward t0, where the posterior
    density may blow up like (r - t0)^(-1/2); the first cell's mass is
    approximated linearly, an O(grid step) truncation that only affects
    paths pinning essentially immediately (payoff 0 either way).
    """
    hi = prior.support[1]
    if math.isinf(hi):
        hi = t0 + 60.0 / prior.beta + 3.0 * prior.mean()
    n = 8193
    s = np.linspace(0.0, math.sqrt(hi - t0), n + 1)[1:]
    grid = t0 + s * s
    state = filtering.PosteriorState(t0, x0, prior)
    dens = np.asarray(filtering.posterior_density(state, grid))
    if grid[-1] < hi:
        grid = np.append(grid, hi)
        dens = np.append(dens, 0.0)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return TabulatedPrior(grid, dens)


def _effective_pack(cfg: SimConfig) -> PriorPack:
    if cfg.t0 == 0.0 or isinstance(cfg.prior, FixedPin):
        if isinstance(cfg.prior, FixedPin) and cfg.prior.theta <= cfg.t0:
            raise ValueError("fixed pinning time must exceed t0")
        return pack_prior(cfg.prior)
    return pack_prior(_posterior_table(cfg.prior, cfg.t0, cfg.x0))


def _dispatch(fn_name: str, bit_generator, pack: PriorPack, *args) -> None:
    fn = getattr(engine, fn_name)
    if engine is _engine_py:
        fn(bit_generator, pack, *args)
    else:
        fn(bit_generator, pack.kind, pack.a, pack.n_extra,
           pack.grid, pack.cdf, pack.dens, *args)


def _run_blocks(cfg: SimConfig, fn_name: str, args_for_block) -> None:
    """Run one engine entry point over all blocks, optionally threaded."""
    n_blocks = (cfg.n_paths + BLOCK_SIZE - 1) // BLOCK_SIZE
    seqs = block_sequences(cfg.seed, n_blocks)

    def run(ib: int) -> None:
        lo = ib * BLOCK_SIZE
        hi = min(lo + BLOCK_SIZE, cfg.n_paths)
        bg = np.random.PCG64(seqs[ib])
        _dispatch(fn_name, bg, *args_for_block(lo, hi))

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            list(pool.map(run, range(n_blocks)))
    else:
        for ib in range(n_blocks):
            run(ib)


def _boundary_matrix(rules: list[StoppingRule], t0: float,
                     dt: float) -> np.ndarray:
    rows = [rule.discretize(t0, dt) for rule in rules]
    length = max(len(r) for r in rows)
    out = np.empty((len(rows), length))
    for i, row in enumerate(rows):
        out[i, :len(row)] = row
        out[i, len(row):] = row[-1]
    return np.ascontiguousarray(out)


def _as_rule(rule, cfg: SimConfig) -> StoppingRule:
    if isinstance(rule, StoppingRule):
        return rule
    if isinstance(rule, (int, float)):
        return constant_rule(float(rule))
    if callable(rule):
        hi = cfg.prior.support[1]
        if not math.isfinite(hi):
            raise ValueError("a callable rule over an unbounded horizon "
                             "must be wrapped with callable_rule(...)")
        return callable_rule(rule, cfg.t0, hi, cfg.dt)
    raise TypeError(f"cannot interpret {rule!r} as a stopping rule")


def _run_rules(cfg: SimConfig, rules: list[StoppingRule]):
    pack = _effective_pack(cfg)
    bounds = _boundary_matrix(rules, cfg.t0, cfg.dt)
    payoffs = np.zeros((cfg.n_paths, len(rules)))
    stopped = np.zeros((cfg.n_paths, len(rules)), dtype=np.uint8)

    def args(lo, hi):
        return (pack, cfg.t0, cfg.x0, cfg.dt, bounds,
                payoffs[lo:hi], stopped[lo:hi])

    _run_blocks(cfg, "run_stopping_block", args)
    return payoffs, stopped


def _column_report(cfg: SimConfig, col: np.ndarray,
                   stop_col: np.ndarray) -> McReport:
    est = float(col.mean())
    sd = float(col.std(ddof=1)) if len(col) > 1 else 0.0
    se = sd / math.sqrt(len(col))
    return McReport(est, se, (est - 1.96 * se, est + 1.96 * se),
                    cfg.n_paths, cfg.seed, float(stop_col.mean()))


def estimate_value(cfg: SimConfig, rule) -> McReport:
    """Mean payoff X_tau 1{tau < theta} under a first-crossing rule."""
    payoffs, stopped = _run_rules(cfg, [_as_rule(rule, cfg)])
    return _column_report(cfg, payoffs[:, 0], stopped[:, 0])


def optimality_probe(cfg: SimConfig, rule,
                     scales=(0.8, 1.25)) -> ProbeReport:
    """Compare a candidate boundary against scaled versions on shared paths."""
    base = _as_rule(rule, cfg)
    all_scales = (1.0,) + tuple(float(s) for s in scales)
    rules = [base.scaled(s) if s != 1.0 else base for s in all_scales]
    payoffs, stopped = _run_rules(cfg, rules)

    reports = tuple(_column_report(cfg, payoffs[:, r], stopped[:, r])
                    for r in range(len(rules)))
    gaps = []
    gap_ses = []
    for r in range(1, len(rules)):
        diff = payoffs[:, 0] - payoffs[:, r]
        gaps.append(float(diff.mean()))
        gap_ses.append(float(diff.std(ddof=1)) / math.sqrt(len(diff)))
    maximal = all(g >= -1.96 * se for g, se in zip(gaps, gap_ses))
    return ProbeReport(all_scales, reports, tuple(gaps), tuple(gap_ses),
                       maximal)


def simulate_path(cfg: SimConfig) -> BridgePath:
    """One exact-transition sample path on the step grid.

    The final grid point is the first one at or past the drawn pinning
    time, where the value is exactly 0.
    """
    gen = generator(cfg.seed)
    pack = _effective_pack(cfg)
    theta = float(_engine_py.draw_thetas(gen, pack, 1)[0])

    dt, t0 = cfg.dt, cfg.t0
    n_steps = int(math.ceil((theta - t0) / dt))
    times = t0 + dt * np.arange(n_steps + 1)
    values = np.zeros(n_steps + 1)
    x = cfg.x0
    values[0] = x
    for k in range(1, n_steps + 1):
        t_prev = t0 + (k - 1) * dt
        rem = theta - t_prev
        if rem <= dt:
            break  # pins during this step; remaining grid values stay 0
        a = (rem - dt) / rem
        x = x * a + math.sqrt(dt * a) * gen.standard_normal()
        values[k] = x
    return BridgePath(theta, times, values)


def validate_compensator(cfg: SimConfig, t: float,
                         window: float) -> CompensatorReport:
    """Pinning frequency in (t, t+window] vs the local-time compensator.

    Among paths surviving to t, compares the empirical pinning frequency
    with the pathwise estimate of int q(s) dl_s^0 accumulated with the
    narrow-band occupation estimator (bandwidth sqrt(dt)).
    """
    if cfg.t0 != 0.0:
        raise ValueError("compensator validation starts paths at t0 = 0")
    if isinstance(cfg.prior, FixedPin):
        raise ValueError("compensator validation needs a continuous prior")
    dt = cfg.dt
    k_mark = int(round(t / dt))
    k_end = int(round((t + window) / dt))
    if not 0 <= k_mark < k_end:
        raise ValueError("window must be positive and t >= 0")
    t_mark = k_mark * dt
    t_end = k_end * dt

    qvals = np.array([filtering.killing_rate(cfg.prior, (j + k_mark) * dt)
                      for j in range(k_end - k_mark)])
    bandwidth = math.sqrt(dt)

    pack = _effective_pack(cfg)
    theta = np.empty(cfg.n_paths)
    local = np.empty(cfg.n_paths)

    def args(lo, hi):
        return (pack, cfg.x0, dt, k_mark, k_end, qvals, bandwidth,
                theta[lo:hi], local[lo:hi])

    _run_blocks(cfg, "compensator_block", args)

    survived = theta > t_mark
    n_surv = int(survived.sum())
    if n_surv == 0:
        raise RuntimeError("no paths survived to the mark time")
    pinned = (survived & (theta <= t_end)).astype(float)[survived]
    lt = local[survived]
    emp, emp_se = float(pinned.mean()), float(pinned.std(ddof=1)) / math.sqrt(n_surv)
    pw, pw_se = float(lt.mean()), float(lt.std(ddof=1)) / math.sqrt(n_surv)
    sig = abs(emp - pw) / math.sqrt(emp_se ** 2 + pw_se ** 2)
    return CompensatorReport(emp, emp_se, pw, pw_se, n_surv, sig)


def _model_drift_factor(prior, t: float, x: float) -> float:
    if isinstance(prior, FixedPin):
        return 1.0 / (prior.theta - t)
    if isinstance(prior, GammaHalfPrior):
        return filtering.f_gamma(prior.n, prior.beta, t, x).f_value
    if isinstance(prior, BetaHalfPrior):
        return filtering.f_beta(prior.beta, t, x).f_value
    return filtering.f_general(filtering.PosteriorState(t, x, prior)).f_value


def validate_filter(cfg: SimConfig, t: float, x_bin) -> FilterReport:
    """Among survivors with X_t in the bin, check E[1/(theta - t)].

    The per-path pinning time is known to the simulator, so the sample
    mean of 1/(theta - t) over the bin is an oracle for the drift factor
    at the bin center.
    """
    lo_bin, hi_bin = float(x_bin[0]), float(x_bin[1])
    if lo_bin >= hi_bin:
        raise ValueError("x_bin must be an increasing interval")
    dt = cfg.dt
    k_query = int(round((t - cfg.t0) / dt))
    if k_query < 1:
        raise ValueError("query time must be past t0")
    t_q = cfg.t0 + k_query * dt

    pack = _effective_pack(cfg)
    xs = np.empty(cfg.n_paths)
    theta = np.empty(cfg.n_paths)

    def args(lo, hi):
        return (cfg.t0, cfg.x0, dt, k_query, xs[lo:hi], theta[lo:hi])

    def args_full(lo, hi):
        return (pack, *args(lo, hi))

    _run_blocks(cfg, "snapshot_block", args_full)

    inbin = (theta > t_q) & (xs >= lo_bin) & (xs <= hi_bin)
    n_in = int(inbin.sum())
    center = 0.5 * (lo_bin + hi_bin)
    model = _model_drift_factor(cfg.prior, t_q, center)
    if n_in < 2:
        return FilterReport(math.nan, math.nan, model, n_in, math.inf)
    vals = 1.0 / (theta[inbin] - t_q)
    mean = float(vals.mean())
    se = float(vals.std(ddof=1)) / math.sqrt(n_in)
    sig = abs(mean - model) / se if se > 0 else math.inf
    return FilterReport(mean, se, model, n_in, sig)
