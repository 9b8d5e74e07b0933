"""The named hard instances and their closed-form evaluations.

Four families: a nearly deterministic single variable, an i.i.d. spike
mixture, the classic single-fixed-threshold trap, and the spikes-plus-one-
deterministic-value instance whose optimal stopping value caps every
strategy at sqrt(3) - 1 in the limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .alpha import AlphaStrategy
from .bounds import _tables
from .distributions import (
    FiniteSupport,
    Instance,
    Mixture,
    PointMass,
    Uniform,
    _discrete_support,
)

__all__ = [
    "NamedInstance",
    "make_named",
    "blind_value_near_deterministic",
    "blind_value_iid_spike",
    "dp_value_hard_general",
    "dp_optimal_small",
]


@dataclass
class NamedInstance:
    tag: str
    params: dict
    instance: Instance
    closed_forms: dict


def make_named(tag: str, n: int = None, eps: float = None, a: float = None) -> NamedInstance:
    """Materialize one of the named hard instances.

    Tags: near_deterministic(eps), iid_spike(n, eps), single_threshold_trap(n),
    hard_general(n, a).
    """
    if tag == "near_deterministic":
        eps = 1e-3 if eps is None else eps
        if not 0.0 < eps < 0.5:
            raise ValueError("eps must lie in (0, 0.5)")
        inst = Instance([Uniform(1.0 - eps, 1.0 + eps)])
        return NamedInstance(tag, {"eps": eps}, inst, {"prophet": 1.0})

    if tag == "iid_spike":
        eps = 1e-3 if eps is None else eps
        if n is None or n < 2:
            raise ValueError("need n >= 2")
        if not 0.0 < eps < 0.5:
            raise ValueError("eps must lie in (0, 0.5)")
        d = Mixture([(eps, PointMass(1.0 / eps)), (1.0 - eps, Uniform(0.0, eps))])
        inst = Instance([d] * n)
        prophet = (1.0 - (1.0 - eps) ** n) / eps  # up to O(eps) from the U(0,eps) tail
        return NamedInstance(tag, {"n": n, "eps": eps}, inst, {"prophet_approx": prophet})

    if tag == "single_threshold_trap":
        if n is None or n < 2:
            raise ValueError("need n >= 2")
        spike = FiniteSupport([0.0, float(n)], [1.0 - 1.0 / n, 1.0 / n])
        inst = Instance([PointMass(1.0)] * (n - 1) + [spike])
        return NamedInstance(tag, {"n": n}, inst, {"prophet": 2.0 - 1.0 / n})

    if tag == "hard_general":
        if n is None or n < 2:
            raise ValueError("need n >= 2")
        a = math.sqrt(3.0) - 1.0 if a is None else a
        if not 0.0 <= a <= 1.0:
            raise ValueError("a must lie in [0, 1]")
        q = 1.0 - 1.0 / n ** 2
        spike = FiniteSupport([0.0, float(n)], [q, 1.0 / n ** 2])
        inst = Instance([spike] * n + [PointMass(a)])
        prophet = n * (1.0 - q ** n) + q ** n * a
        return NamedInstance(tag, {"n": n, "a": a}, inst, {"prophet": prophet})

    raise ValueError(f"unknown instance tag {tag!r}")


def blind_value_near_deterministic(alpha: AlphaStrategy, grid: int = 2048) -> float:
    """Limit value of a blind strategy on the nearly deterministic instance:
    the integral of (1 - alpha)."""
    _, _, A, _, _ = _tables(alpha, _even(grid))
    return float(A[-1])


def blind_value_iid_spike(alpha: AlphaStrategy, grid: int = 2048) -> float:
    """Limit value on the i.i.d. spike instance: int e^{int_0^s ln alpha}."""
    _, _, _, _, Ecum = _tables(alpha, _even(grid))
    return float(Ecum[-1])


def _even(grid):
    return max(64, int(grid))


def dp_value_hard_general(n: int, a: float):
    """Exact optimal stopping value on the spikes-plus-a instance, together
    with the first position at which accepting the sure value a is optimal.

    The only decision is whether to take a; it is taken at position i iff the
    continuation over the remaining spikes is below a.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0.0 <= a <= 1.0:
        raise ValueError("a must lie in [0, 1]")
    q = 1.0 - 1.0 / n ** 2
    # Continuation after rejecting a at position i: n + 1 - i spikes remain.
    cutoff = n + 2
    for i in range(1, n + 2):
        if n * (1.0 - q ** (n + 1 - i)) < a:
            cutoff = i
            break
    total = 0.0
    for i in range(1, n + 2):
        if i < cutoff:
            total += n * (1.0 - q ** n)
        else:
            total += n * (1.0 - q ** (i - 1)) + q ** (i - 1) * a
    return total / (n + 1), cutoff


_DP_MAX_N = 8
_DP_MAX_SUPPORT = 10 ** 6


def dp_optimal_small(instance: Instance) -> float:
    """Exact sup over all stopping times of E[reward], small finite instances.

    Backward induction over subsets of already-shown variables: with the set
    S revealed and rejected, the next arrival is uniform over the rest, and a
    value is accepted iff it beats the continuation.
    """
    n = instance.n
    if n > _DP_MAX_N:
        raise ValueError(f"optimal-stopping oracle limited to n <= {_DP_MAX_N}")
    supports = [_discrete_support(d) for d in instance.dists]
    if any(s is None for s in supports):
        raise ValueError("optimal-stopping oracle needs finite-support variables")
    size = 1
    for vals, _ in supports:
        size *= vals.size
    if size > _DP_MAX_SUPPORT:
        raise ValueError("product support size guard exceeded")

    cont = np.zeros(1 << n)
    full = (1 << n) - 1
    # Subsets in decreasing popcount order so continuations are ready.
    for mask in sorted(range(1 << n), key=lambda m: -bin(m).count("1")):
        if mask == full:
            continue
        rest = [j for j in range(n) if not mask & (1 << j)]
        acc = 0.0
        for j in rest:
            vals, probs = supports[j]
            c = cont[mask | (1 << j)]
            acc += float(np.dot(probs, np.maximum(vals, c)))
        cont[mask] = acc / len(rest)
    return float(cont[0])
