"""Threshold schedules and the two stopping algorithms.

``build_blind`` / ``build_deterministic`` turn an alpha curve and an instance
into a nonincreasing threshold sequence via quantiles of the max law; the
walk itself is the strict-exceedance rule, with stochastic tie-breaking at
atoms of the max distribution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .alpha import AlphaStrategy
from .distributions import Instance, PermutationDraw, quantile_max

__all__ = [
    "ThresholdSchedule",
    "StopOutcome",
    "UnresolvedTieError",
    "build_blind",
    "build_deterministic",
    "run_tta",
    "run_stochastic_tta",
    "tie_break_probabilities",
]


class UnresolvedTieError(RuntimeError):
    """A realization tied a threshold with no registered acceptance rate."""


@dataclass
class ThresholdSchedule:
    """Thresholds tau_1..tau_n plus per-position atom acceptance maps.

    atom_accept maps a 0-based position i (whose threshold sits on an atom of
    the max law) to {variable index j: acceptance probability}.
    """

    tau: np.ndarray
    atom_accept: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.tau)

    def to_json(self) -> dict:
        return {
            "tau": [float(t) for t in self.tau],
            "atoms": [
                {"pos": int(i), "accept": {str(j): float(p) for j, p in acc.items()}}
                for i, acc in sorted(self.atom_accept.items())
            ],
        }

    @staticmethod
    def from_json(obj) -> "ThresholdSchedule":
        return ThresholdSchedule(
            tau=np.asarray(obj["tau"], dtype=float),
            atom_accept={
                int(a["pos"]): {int(j): float(p) for j, p in a["accept"].items()}
                for a in obj.get("atoms", [])
            },
        )


@dataclass(frozen=True)
class StopOutcome:
    stop_index: int  # 0-based position, or -1 for no stop
    reward: float

    @property
    def stopped(self) -> bool:
        return self.stop_index >= 0


def tie_break_probabilities(instance: Instance, tau: float, target_q: float) -> dict:
    """Acceptance probabilities resolving an atom of the max law at tau.

    Solves prod_j (F_j(tau-) + s * a_j) = target_q for the common smoothing
    parameter s in (0, 1), where a_j is variable j's atom mass at tau, then
    returns p(j) = (F_j(tau) - (F_j(tau-) + s a_j)) / a_j for atom-carrying j
    and p(j) = 0 otherwise.
    """
    f_left = np.array([float(d.cdf_left(tau)) for d in instance.dists])
    f_right = np.array([float(d.cdf(tau)) for d in instance.dists])
    a = f_right - f_left

    def product(s):
        return float(np.prod(f_left + s * a))

    if not product(0.0) < target_q < product(1.0):
        raise ValueError("target outside atom gap")
    lo, hi = 0.0, 1.0
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if product(mid) < target_q:
            lo = mid
        else:
            hi = mid
    s = 0.5 * (lo + hi)
    return {
        j: float((f_right[j] - (f_left[j] + s * a[j])) / a[j]) if a[j] > 0 else 0.0
        for j in range(instance.n)
        if a[j] > 0
    }


def _schedule_from_quantiles(instance: Instance, q_levels: np.ndarray) -> ThresholdSchedule:
    tau = np.empty(len(q_levels))
    atoms = {}
    for i, q in enumerate(q_levels):
        t, is_atom = quantile_max(instance, float(q))
        tau[i] = t
        if is_atom:
            atoms[i] = tie_break_probabilities(instance, t, float(q))
    # Nonincreasing alpha must give nonincreasing thresholds.
    assert np.all(np.diff(tau) <= 1e-9), "schedule monotonicity violated"
    return ThresholdSchedule(tau=tau, atom_accept=atoms)


def build_blind(instance: Instance, alpha: AlphaStrategy, uniforms) -> ThresholdSchedule:
    """Randomized schedule: tau_i inverts the max cdf at alpha(u_[i])."""
    u = np.sort(np.asarray(uniforms, dtype=float))
    if u.size != instance.n:
        raise ValueError("need one uniform per variable")
    return _schedule_from_quantiles(instance, np.asarray(alpha(u), dtype=float))


def build_deterministic(instance: Instance, alpha: AlphaStrategy) -> ThresholdSchedule:
    """Deterministic variant: the i-th uniform is replaced by i/n."""
    n = instance.n
    grid = np.arange(1, n + 1) / n
    return _schedule_from_quantiles(instance, np.asarray(alpha(grid), dtype=float))


def run_tta(schedule: ThresholdSchedule, draw: PermutationDraw, realizations) -> StopOutcome:
    """Stop at the first position whose value strictly exceeds its threshold."""
    realizations = np.asarray(realizations, dtype=float)
    if realizations.size != schedule.n:
        raise ValueError("need one realization per variable")
    for i in range(schedule.n):
        v = realizations[draw.order[i]]
        if v > schedule.tau[i]:
            return StopOutcome(stop_index=i, reward=float(v))
    return StopOutcome(stop_index=-1, reward=0.0)


def run_stochastic_tta(
    schedule: ThresholdSchedule, draw: PermutationDraw, realizations, seed: int
) -> StopOutcome:
    """Like run_tta, but a value equal to an atom threshold is accepted with
    the registered probability; reproducible from the tie-break seed."""
    realizations = np.asarray(realizations, dtype=float)
    if realizations.size != schedule.n:
        raise ValueError("need one realization per variable")
    rng = np.random.default_rng(seed)
    for i in range(schedule.n):
        j = int(draw.order[i])
        v = realizations[j]
        if v > schedule.tau[i]:
            return StopOutcome(stop_index=i, reward=float(v))
        if v == schedule.tau[i] and i in schedule.atom_accept:
            acc = schedule.atom_accept[i]
            if acc is None:
                raise UnresolvedTieError(f"unresolved tie at position {i} (value {v})")
            # Ties elsewhere (exact-solution thresholds) never stop: the
            # quantile identity already holds without randomization.
            p = acc.get(j, 0.0)
            if p > 0.0 and rng.uniform() < p:
                return StopOutcome(stop_index=i, reward=float(v))
    return StopOutcome(stop_index=-1, reward=0.0)
