"""Nonnegative bounded distributions and product instances.

Everything downstream works off two objects: a ``Distribution`` (point mass,
uniform, finite support, or a mixture of those) and an ``Instance``, an
ordered collection of independent distributions exposing the law of their
maximum.  All supports are bounded and nonnegative.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

__all__ = [
    "Distribution",
    "PointMass",
    "Uniform",
    "FiniteSupport",
    "Mixture",
    "Instance",
    "PermutationDraw",
    "cdf_max",
    "quantile_max",
    "prophet_value",
    "sample_instance",
    "instance_to_json",
    "instance_from_json",
]

# Relative bracket width for bisection on continuous CDF pieces.
_BISECT_RTOL = 1e-12


class Distribution:
    """Common interface: cdf, left-limit cdf, quantile, sampling, atoms."""

    def cdf(self, t):
        raise NotImplementedError

    def cdf_left(self, t):
        """P(V < t); differs from cdf exactly at atoms."""
        raise NotImplementedError

    def quantile(self, q: float) -> float:
        """Left-continuous generalized inverse, inf{t : cdf(t) >= q}."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def support_min(self) -> float:
        raise NotImplementedError

    def support_max(self) -> float:
        raise NotImplementedError

    def atom_points(self) -> np.ndarray:
        """Values carrying positive mass, ascending."""
        return np.empty(0)

    def atom_mass(self, t: float) -> float:
        return float(self.cdf(t) - self.cdf_left(t))

    @property
    def is_continuous(self) -> bool:
        return self.atom_points().size == 0

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class PointMass(Distribution):
    value: float

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("values must be nonnegative")

    def cdf(self, t):
        return np.where(np.asarray(t, dtype=float) >= self.value, 1.0, 0.0)

    def cdf_left(self, t):
        return np.where(np.asarray(t, dtype=float) > self.value, 1.0, 0.0)

    def quantile(self, q):
        return self.value

    def sample(self, rng, size):
        return np.full(size, self.value)

    def mean(self):
        return self.value

    def support_min(self):
        return self.value

    def support_max(self):
        return self.value

    def atom_points(self):
        return np.array([self.value])

    def to_json(self):
        return {"kind": "point", "value": self.value}


@dataclass(frozen=True)
class Uniform(Distribution):
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("uniform needs lo < hi")
        if self.lo < 0:
            raise ValueError("values must be nonnegative")

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        return np.clip((t - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def cdf_left(self, t):
        return self.cdf(t)

    def quantile(self, q):
        return self.lo + q * (self.hi - self.lo)

    def sample(self, rng, size):
        return rng.uniform(self.lo, self.hi, size)

    def mean(self):
        return 0.5 * (self.lo + self.hi)

    def support_min(self):
        return self.lo

    def support_max(self):
        return self.hi

    def to_json(self):
        return {"kind": "uniform", "lo": self.lo, "hi": self.hi}


class FiniteSupport(Distribution):
    """Discrete law on finitely many points."""

    def __init__(self, values, probs):
        values = np.asarray(values, dtype=float)
        probs = np.asarray(probs, dtype=float)
        if values.ndim != 1 or values.shape != probs.shape or values.size == 0:
            raise ValueError("values and probs must be matching nonempty 1-d arrays")
        if np.any(probs <= 0):
            raise ValueError("probabilities must be positive")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to 1")
        if np.any(values < 0):
            raise ValueError("values must be nonnegative")
        order = np.argsort(values)
        self.values = values[order]
        self.probs = probs[order]
        if np.any(np.diff(self.values) == 0):
            raise ValueError("support values must be distinct")
        self._cum = np.cumsum(self.probs)
        self._cum[-1] = 1.0

    def cdf(self, t):
        idx = np.searchsorted(self.values, np.asarray(t, dtype=float), side="right")
        return np.concatenate(([0.0], self._cum))[idx]

    def cdf_left(self, t):
        idx = np.searchsorted(self.values, np.asarray(t, dtype=float), side="left")
        return np.concatenate(([0.0], self._cum))[idx]

    def quantile(self, q):
        idx = np.searchsorted(self._cum, q, side="left")
        idx = min(idx, self.values.size - 1)
        return float(self.values[idx])

    def sample(self, rng, size):
        u = rng.uniform(0.0, 1.0, size)
        return self.values[np.searchsorted(self._cum, u, side="left")]

    def mean(self):
        return float(np.dot(self.values, self.probs))

    def support_min(self):
        return float(self.values[0])

    def support_max(self):
        return float(self.values[-1])

    def atom_points(self):
        return self.values

    def __repr__(self):
        return f"FiniteSupport(values={self.values.tolist()}, probs={self.probs.tolist()})"

    def to_json(self):
        return {"kind": "finite", "values": self.values.tolist(), "probs": self.probs.tolist()}


class Mixture(Distribution):
    """Weighted mixture; atom mass at t is the weighted sum of component atoms."""

    def __init__(self, components):
        components = list(components)
        if not components:
            raise ValueError("mixture needs at least one component")
        self.weights = np.array([w for w, _ in components], dtype=float)
        self.parts = [d for _, d in components]
        if np.any(self.weights <= 0):
            raise ValueError("mixture weights must be positive")
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("mixture weights must sum to 1")

    @property
    def components(self):
        return list(zip(self.weights.tolist(), self.parts))

    def cdf(self, t):
        return sum(w * d.cdf(t) for w, d in zip(self.weights, self.parts))

    def cdf_left(self, t):
        return sum(w * d.cdf_left(t) for w, d in zip(self.weights, self.parts))

    def quantile(self, q):
        lo, hi = self.support_min(), self.support_max()
        return _generalized_inverse(self.cdf, self.atom_points(), self.cdf_left, lo, hi, q)[0]

    def sample(self, rng, size):
        idx = np.searchsorted(np.cumsum(self.weights), rng.uniform(0, 1, size), side="left")
        out = np.empty(size)
        for i, d in enumerate(self.parts):
            mask = idx == i
            k = int(mask.sum())
            if k:
                out[mask] = d.sample(rng, k)
        return out

    def mean(self):
        return float(sum(w * d.mean() for w, d in zip(self.weights, self.parts)))

    def support_min(self):
        return min(d.support_min() for d in self.parts)

    def support_max(self):
        return max(d.support_max() for d in self.parts)

    def atom_points(self):
        pts = np.concatenate([d.atom_points() for d in self.parts])
        return np.unique(pts)

    def __repr__(self):
        return f"Mixture({self.components!r})"

    def to_json(self):
        return {
            "kind": "mixture",
            "components": [
                {"weight": w, "dist": d.to_json()} for w, d in zip(self.weights, self.parts)
            ],
        }


def _generalized_inverse(cdf, atoms, cdf_left, lo, hi, q):
    """inf{t : cdf(t) >= q} plus an atom flag, for a monotone cdf on [lo, hi].

    The atom flag is set when cdf_left(tau) < q < cdf(tau), i.e. no exact
    solution of cdf(t) = q exists and q falls inside a jump.
    """
    if q <= 0.0:
        return -0.0, False
    # Jump scan first: atoms are the only places where cdf is discontinuous.
    for v in np.atleast_1d(atoms):
        cl, c = float(cdf_left(v)), float(cdf(v))
        if cl < q <= c:
            return float(v), bool(q < c and q > cl)
    if q >= 1.0:
        return float(hi), False
    a, b = float(lo), float(hi)
    if float(cdf(a)) >= q:
        return a, False
    while b - a > _BISECT_RTOL * max(1.0, abs(b)):
        m = 0.5 * (a + b)
        if float(cdf(m)) >= q:
            b = m
        else:
            a = m
    return b, False


@dataclass(frozen=True)
class Instance:
    """Ordered collection of independent distributions."""

    dists: tuple

    def __init__(self, dists):
        dists = tuple(dists)
        if not dists:
            raise ValueError("instance needs at least one distribution")
        object.__setattr__(self, "dists", dists)

    @property
    def n(self) -> int:
        return len(self.dists)

    def cdf_max(self, t):
        out = np.ones_like(np.asarray(t, dtype=float))
        for d in self.dists:
            out = out * d.cdf(t)
        return out

    def cdf_max_left(self, t):
        out = np.ones_like(np.asarray(t, dtype=float))
        for d in self.dists:
            out = out * d.cdf_left(t)
        return out

    def max_atom_points(self) -> np.ndarray:
        """Candidate atoms of the max law: union of member atoms with
        positive jump of the product cdf."""
        pts = np.unique(np.concatenate([d.atom_points() for d in self.dists]))
        if pts.size == 0:
            return pts
        gap = self.cdf_max(pts) - self.cdf_max_left(pts)
        return pts[gap > 0]

    def support_max(self) -> float:
        return max(d.support_max() for d in self.dists)

    def support_min(self) -> float:
        return min(d.support_min() for d in self.dists)

    @property
    def is_continuous(self) -> bool:
        return all(d.is_continuous for d in self.dists)

    @property
    def is_discrete(self) -> bool:
        return all(_discrete_support(d) is not None for d in self.dists)


@dataclass(frozen=True)
class PermutationDraw:
    """Arrival order plus the uniforms a randomized blind strategy consumes."""

    order: np.ndarray
    uniforms: np.ndarray = field(default=None)

    @staticmethod
    def draw(n: int, rng: np.random.Generator) -> "PermutationDraw":
        return PermutationDraw(order=rng.permutation(n), uniforms=rng.uniform(0, 1, n))


def cdf_max(instance: Instance, t) -> float:
    """P(max of the instance <= t)."""
    return instance.cdf_max(t)


def quantile_max(instance: Instance, q: float):
    """Threshold tau = inf{t : cdf_max(t) >= q} and an is-atom flag.

    The flag fires when q falls strictly inside a jump of the max cdf, i.e.
    no exact threshold exists and stochastic tie-breaking is needed.
    q = 0 returns the -0.0 accept-everything sentinel.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    return _generalized_inverse(
        instance.cdf_max,
        instance.max_atom_points(),
        instance.cdf_max_left,
        instance.support_min(),
        instance.support_max(),
        q,
    )


def quantile_max_batch(instance: Instance, q: np.ndarray) -> np.ndarray:
    """Vectorized quantile of the max law for continuous instances."""
    if not instance.is_continuous:
        raise ValueError("batch quantiles require a continuous instance")
    q = np.asarray(q, dtype=float)
    lo = np.full(q.shape, float(instance.support_min()))
    hi = np.full(q.shape, float(instance.support_max()))
    out = np.where(q <= 0.0, -0.0, hi)
    active = q > 0.0
    a, b = lo.copy(), hi.copy()
    for _ in range(64):
        m = 0.5 * (a + b)
        ge = instance.cdf_max(m) >= q
        b = np.where(ge, m, b)
        a = np.where(ge, a, m)
    out[active] = b[active]
    return out


def _discrete_support(d: Distribution):
    """(values, probs) if d is purely atomic, else None."""
    if isinstance(d, PointMass):
        return np.array([d.value]), np.array([1.0])
    if isinstance(d, FiniteSupport):
        return d.values, d.probs
    if isinstance(d, Mixture):
        vals, probs = [], []
        for w, part in zip(d.weights, d.parts):
            sub = _discrete_support(part)
            if sub is None:
                return None
            vals.append(sub[0])
            probs.append(w * sub[1])
        v = np.concatenate(vals)
        p = np.concatenate(probs)
        uv, inv = np.unique(v, return_inverse=True)
        up = np.zeros_like(uv)
        np.add.at(up, inv, p)
        return uv, up
    return None


def prophet_value(instance: Instance) -> float:
    """E[max], exact on purely atomic instances, adaptive quadrature otherwise.

    Exact branch: the max law lives on the union of member supports, so
    E[max] = sum v_k * (cdf_max(v_k) - cdf_max(v_{k-1})) over sorted values.
    """
    if instance.is_discrete:
        pts = np.unique(np.concatenate([_discrete_support(d)[0] for d in instance.dists]))
        cm = instance.cdf_max(pts)
        mass = np.diff(np.concatenate(([0.0], cm)))
        return float(np.dot(pts, mass))
    hi = instance.support_max()
    if not math.isfinite(hi):
        raise ValueError("infinite prophet value")
    # Break the integral at member support endpoints and atoms, where the
    # survival function of the max has kinks or jumps.
    brk = {0.0, hi}
    for d in instance.dists:
        brk.update((d.support_min(), d.support_max()))
        brk.update(float(v) for v in d.atom_points())
    brk = sorted(b for b in brk if 0.0 <= b <= hi)
    total = 0.0
    for a, b in zip(brk[:-1], brk[1:]):
        if b - a <= 0:
            continue
        val, _ = integrate.quad(lambda t: 1.0 - float(instance.cdf_max(t)), a, b,
                                epsabs=1e-9 / max(1, len(brk)), limit=200)
        total += val
    return total


def sample_instance(instance: Instance, seed: int) -> np.ndarray:
    """One realization per variable, reproducible from the seed."""
    rng = np.random.default_rng(seed)
    return np.array([d.sample(rng, 1)[0] for d in instance.dists])


def sample_instance_block(instance: Instance, rng: np.random.Generator, trials: int) -> np.ndarray:
    """(trials, n) realizations, one column per variable."""
    out = np.empty((trials, instance.n))
    for j, d in enumerate(instance.dists):
        out[:, j] = d.sample(rng, trials)
    return out


# ---------------------------------------------------------------------------
# JSON serialization (the CLI file format)

def dist_from_json(obj: dict) -> Distribution:
    kind = obj.get("kind")
    if kind == "point":
        return PointMass(float(obj["value"]))
    if kind == "uniform":
        return Uniform(float(obj["lo"]), float(obj["hi"]))
    if kind == "finite":
        return FiniteSupport(obj["values"], obj["probs"])
    if kind == "mixture":
        return Mixture(
            (float(c["weight"]), dist_from_json(c["dist"])) for c in obj["components"]
        )
    raise ValueError(f"unknown distribution kind: {kind!r}")


def instance_to_json(instance: Instance) -> dict:
    return {"dists": [d.to_json() for d in instance.dists]}


def instance_from_json(obj) -> Instance:
    if isinstance(obj, str):
        obj = json.loads(obj)
    return Instance(dist_from_json(d) for d in obj["dists"])
