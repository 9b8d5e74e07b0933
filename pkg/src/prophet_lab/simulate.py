"""Monte Carlo estimation of the gambler's reward, plus an exact oracle.

The engine is block-based: trials are partitioned into fixed-size blocks,
each block owns an RNG derived from (seed, block index), and block results
are reduced in block order.  Reports are therefore bit-identical for a given
seed regardless of how many worker threads execute the blocks.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .alpha import AlphaStrategy, Constant
from .distributions import (
    Instance,
    PermutationDraw,
    _discrete_support,
    prophet_value,
    quantile_max_batch,
    sample_instance_block,
)
from .thresholds import (
    ThresholdSchedule,
    build_blind,
    build_deterministic,
    run_stochastic_tta,
)

__all__ = [
    "SimReport",
    "monte_carlo",
    "monte_carlo_schedule",
    "exact_eval",
    "empirical_stop_cdf",
]

_BLOCK = 4096
_TIE_STREAM = 7919  # salt separating tie-break randomness from the trial stream


@dataclass(frozen=True)
class SimReport:
    trials: int
    mean_reward: float
    std_error: float
    prophet: float
    ratio: float
    ratio_ci_radius: float
    seed: int

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "mean_reward": self.mean_reward,
            "std_error": self.std_error,
            "prophet": self.prophet,
            "ratio": self.ratio,
            "ratio_ci_radius": self.ratio_ci_radius,
            "seed": self.seed,
        }

    @staticmethod
    def csv_header() -> str:
        return "trials,mean_reward,std_error,prophet,ratio,ratio_ci_radius,seed"

    def to_csv_row(self) -> str:
        return (
            f"{self.trials},{self.mean_reward!r},{self.std_error!r},"
            f"{self.prophet!r},{self.ratio!r},{self.ratio_ci_radius!r},{self.seed}"
        )


def default_threads() -> int:
    env = os.environ.get("PROPHET_LAB_THREADS")
    return max(1, int(env)) if env else 1


def _deterministic_block(instance, tau, accept_rows, seed, block_index, trials):
    """One block with fixed thresholds; returns (sum, sumsq, stop_counts)."""
    n = instance.n
    rng = np.random.default_rng([seed, block_index])
    X = sample_instance_block(instance, rng, trials)
    perm = rng.permuted(np.broadcast_to(np.arange(n), (trials, n)), axis=1)
    V = np.take_along_axis(X, perm, axis=1)
    stop = V > tau[None, :]
    if accept_rows:
        rng_tie = np.random.default_rng([seed, _TIE_STREAM, block_index])
        U = rng_tie.uniform(0.0, 1.0, (trials, len(accept_rows)))
        for col, (i, pvec) in enumerate(accept_rows.items()):
            tie = (V[:, i] == tau[i]) & (U[:, col] < pvec[perm[:, i]])
            stop[:, i] |= tie
    return _reduce_stops(stop, V, n)


def _blind_continuous_block(instance, alpha, seed, block_index, trials):
    n = instance.n
    rng = np.random.default_rng([seed, block_index])
    X = sample_instance_block(instance, rng, trials)
    perm = rng.permuted(np.broadcast_to(np.arange(n), (trials, n)), axis=1)
    u = np.sort(rng.uniform(0.0, 1.0, (trials, n)), axis=1)
    V = np.take_along_axis(X, perm, axis=1)
    q = np.asarray(alpha(u), dtype=float)
    tau = quantile_max_batch(instance, q)
    stop = V > tau
    return _reduce_stops(stop, V, n)


def _blind_general_block(instance, alpha, seed, block_index, trials):
    """Fallback trial loop for randomized schedules over atomic instances."""
    n = instance.n
    rng = np.random.default_rng([seed, block_index])
    X = sample_instance_block(instance, rng, trials)
    perms = rng.permuted(np.broadcast_to(np.arange(n), (trials, n)), axis=1)
    u = rng.uniform(0.0, 1.0, (trials, n))
    rng_tie = np.random.default_rng([seed, _TIE_STREAM, block_index])
    tie_seeds = rng_tie.integers(0, 2 ** 62, trials)
    s = ssq = 0.0
    counts = np.zeros(n + 1, dtype=np.int64)
    for t in range(trials):
        schedule = build_blind(instance, alpha, u[t])
        draw = PermutationDraw(order=perms[t], uniforms=u[t])
        out = run_stochastic_tta(schedule, draw, X[t], int(tie_seeds[t]))
        s += out.reward
        ssq += out.reward * out.reward
        counts[out.stop_index if out.stopped else n] += 1
    return s, ssq, counts


def _reduce_stops(stop, V, n):
    idx = np.argmax(stop, axis=1)
    any_stop = stop.any(axis=1)
    rewards = np.where(any_stop, V[np.arange(len(idx)), idx], 0.0)
    counts = np.bincount(np.where(any_stop, idx, n), minlength=n + 1)
    return float(np.sum(rewards)), float(np.sum(rewards * rewards)), counts


def _run_engine(instance, alpha, mode, trials, seed, threads):
    if mode not in ("blind", "deterministic"):
        raise ValueError("mode must be 'blind' or 'deterministic'")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n = instance.n
    threads = threads or default_threads()

    if mode == "deterministic" or (mode == "blind" and isinstance(alpha, Constant)):
        # Constant alpha gives every position the same quantile level, so the
        # randomized and deterministic schedules coincide.
        schedule = build_deterministic(instance, alpha)
        accept_rows = {}
        for i, acc in schedule.atom_accept.items():
            pvec = np.zeros(n)
            for j, p in acc.items():
                pvec[j] = p
            accept_rows[i] = pvec
        tau = schedule.tau

        def job(b, k):
            return _deterministic_block(instance, tau, accept_rows, seed, b, k)

    elif instance.is_continuous:

        def job(b, k):
            return _blind_continuous_block(instance, alpha, seed, b, k)

    else:

        def job(b, k):
            return _blind_general_block(instance, alpha, seed, b, k)

    blocks = [(b, min(_BLOCK, trials - b * _BLOCK)) for b in range((trials + _BLOCK - 1) // _BLOCK)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda bk: job(*bk), blocks))
    else:
        results = [job(*bk) for bk in blocks]
    # Block-ordered exact reduction: independent of worker count.
    total = math.fsum(r[0] for r in results)
    total_sq = math.fsum(r[1] for r in results)
    counts = np.sum([r[2] for r in results], axis=0)
    return total, total_sq, counts


def monte_carlo(
    instance: Instance,
    alpha: AlphaStrategy,
    mode: str = "blind",
    trials: int = 100_000,
    seed: int = 0,
    threads: int = None,
) -> SimReport:
    """Estimate E[reward] and the competitive ratio of a blind strategy."""
    total, total_sq, _ = _run_engine(instance, alpha, mode, trials, seed, threads)
    mean = total / trials
    var = max(0.0, total_sq / trials - mean * mean)
    std_err = math.sqrt(var / trials)
    prophet = prophet_value(instance)
    return SimReport(
        trials=trials,
        mean_reward=mean,
        std_error=std_err,
        prophet=prophet,
        ratio=mean / prophet,
        ratio_ci_radius=3.0 * std_err / prophet,
        seed=seed,
    )


def monte_carlo_schedule(
    instance: Instance,
    schedule: ThresholdSchedule,
    trials: int = 100_000,
    seed: int = 0,
    threads: int = None,
) -> SimReport:
    """Estimate the reward of an explicit threshold schedule (e.g. a fixed
    single threshold), bypassing the alpha-to-quantile construction."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n = instance.n
    accept_rows = {}
    for i, acc in schedule.atom_accept.items():
        pvec = np.zeros(n)
        for j, p in (acc or {}).items():
            pvec[j] = p
        accept_rows[i] = pvec
    threads = threads or default_threads()
    blocks = [(b, min(_BLOCK, trials - b * _BLOCK)) for b in range((trials + _BLOCK - 1) // _BLOCK)]

    def job(b, k):
        return _deterministic_block(instance, schedule.tau, accept_rows, seed, b, k)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda bk: job(*bk), blocks))
    else:
        results = [job(*bk) for bk in blocks]
    total = math.fsum(r[0] for r in results)
    total_sq = math.fsum(r[1] for r in results)
    mean = total / trials
    var = max(0.0, total_sq / trials - mean * mean)
    std_err = math.sqrt(var / trials)
    prophet = prophet_value(instance)
    return SimReport(
        trials=trials,
        mean_reward=mean,
        std_error=std_err,
        prophet=prophet,
        ratio=mean / prophet,
        ratio_ci_radius=3.0 * std_err / prophet,
        seed=seed,
    )


def empirical_stop_cdf(
    instance: Instance,
    alpha: AlphaStrategy,
    trials: int,
    seed: int = 0,
    mode: str = "blind",
    threads: int = None,
):
    """Estimated P(T <= k) for k = 1..n, with 3-sigma half-widths."""
    _, _, counts = _run_engine(instance, alpha, mode, trials, seed, threads)
    cdf = np.cumsum(counts[:-1]) / trials
    band = 3.0 * np.sqrt(np.maximum(cdf * (1.0 - cdf), 1.0 / trials) / trials)
    return cdf, band


_EXACT_MAX_N = 8
_EXACT_MAX_SUPPORT = 10 ** 6


def exact_eval(instance: Instance, alpha: AlphaStrategy, mode: str = "deterministic") -> float:
    """Exact E[reward] on purely atomic instances by enumerating all n!
    arrival orders, with tie acceptance folded in as branch weights."""
    if mode != "deterministic":
        raise ValueError("exact evaluation supports deterministic mode only")
    n = instance.n
    if n > _EXACT_MAX_N:
        raise ValueError(f"exact evaluation limited to n <= {_EXACT_MAX_N}")
    supports = [_discrete_support(d) for d in instance.dists]
    if any(s is None for s in supports):
        raise ValueError("exact evaluation needs finite-support variables")
    size = 1
    for vals, _ in supports:
        size *= vals.size
    if size > _EXACT_MAX_SUPPORT:
        raise ValueError("product support size guard exceeded")

    schedule = build_deterministic(instance, alpha)
    tau = schedule.tau
    total = 0.0
    for perm in itertools.permutations(range(n)):
        cont = 0.0  # value of reaching position i with nothing taken yet
        for i in range(n - 1, -1, -1):
            j = perm[i]
            vals, probs = supports[j]
            acc = schedule.atom_accept.get(i, {})
            e = 0.0
            for v, pv in zip(vals, probs):
                if v > tau[i]:
                    e += pv * v
                elif v == tau[i] and i in schedule.atom_accept:
                    p = acc.get(j, 0.0)
                    e += pv * (p * v + (1.0 - p) * cont)
                else:
                    e += pv * cont
            cont = e
        total += cont
    return total / math.factorial(n)
