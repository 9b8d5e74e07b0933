"""Nonincreasing acceptance curves alpha : [0,1] -> [0,1].

An alpha curve is the whole strategy: position x in the (normalized) arrival
sequence is mapped to the quantile level of the max law used as a threshold.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AlphaStrategy",
    "Constant",
    "AffineClipped",
    "PiecewiseConstant",
    "Tabulated",
    "parse_alpha",
]

_MONOTONE_GRID = 10_000


class AlphaStrategy:
    def __call__(self, x):
        raise NotImplementedError

    def breakpoints(self) -> np.ndarray:
        """Interior points where the curve jumps or kinks."""
        return np.empty(0)

    def check_valid(self):
        """Range in [0,1] and nonincreasing; grid-checked for the free-form kinds."""
        x = np.linspace(0.0, 1.0, _MONOTONE_GRID)
        y = np.asarray(self(x), dtype=float)
        if np.any(y < -1e-12) or np.any(y > 1 + 1e-12):
            raise ValueError("alpha must map into [0, 1]")
        if np.any(np.diff(y) > 1e-9):
            raise ValueError("alpha must be nonincreasing")

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(AlphaStrategy):
    p: float

    def __call__(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.p)

    def to_json(self):
        return {"kind": "constant", "p": self.p}


@dataclass(frozen=True)
class AffineClipped(AlphaStrategy):
    """alpha(x) = clip(intercept + slope * x, 0, 1); slope <= 0 keeps it nonincreasing."""

    intercept: float
    slope: float

    def __call__(self, x):
        return np.clip(self.intercept + self.slope * np.asarray(x, dtype=float), 0.0, 1.0)

    def breakpoints(self):
        # Clipping kinks, where the affine part crosses 0 or 1.
        pts = []
        if self.slope != 0:
            for level in (0.0, 1.0):
                x = (level - self.intercept) / self.slope
                if 0.0 < x < 1.0:
                    pts.append(x)
        return np.array(sorted(pts))

    def to_json(self):
        return {"kind": "affine", "intercept": self.intercept, "slope": self.slope}


class PiecewiseConstant(AlphaStrategy):
    """m equal-width constant pieces; level j applies on [(j-1)/m, j/m)."""

    def __init__(self, levels):
        levels = np.asarray(levels, dtype=float)
        if levels.ndim != 1 or levels.size == 0:
            raise ValueError("levels must be a nonempty 1-d array")
        if np.any(levels < 0) or np.any(levels > 1):
            raise ValueError("levels must lie in [0, 1]")
        if np.any(np.diff(levels) > 1e-12):
            raise ValueError("levels must be nonincreasing")
        self.levels = levels

    @property
    def m(self) -> int:
        return self.levels.size

    def __call__(self, x):
        idx = np.minimum((np.asarray(x, dtype=float) * self.m).astype(int), self.m - 1)
        return self.levels[idx]

    def breakpoints(self):
        return np.arange(1, self.m) / self.m

    def check_valid(self):
        pass  # exact by construction

    def __repr__(self):
        return f"PiecewiseConstant({self.levels.tolist()})"

    def to_json(self):
        return {"kind": "piecewise", "levels": self.levels.tolist()}


class Tabulated(AlphaStrategy):
    """Linear interpolation through (grid, values); flat extrapolation."""

    def __init__(self, grid, values):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
            raise ValueError("need matching 1-d grid/values with at least 2 points")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        self.grid = grid
        self.values = values

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self.grid, self.values)

    def breakpoints(self):
        inner = self.grid[(self.grid > 0) & (self.grid < 1)]
        return inner

    def __repr__(self):
        return f"Tabulated(<{self.grid.size} points>)"

    def to_json(self):
        return {"kind": "tabulated", "grid": self.grid.tolist(), "alpha": self.values.tolist()}


def alpha_from_json(obj) -> AlphaStrategy:
    if isinstance(obj, str):
        obj = json.loads(obj)
    kind = obj.get("kind", "tabulated")
    if kind == "constant":
        return Constant(float(obj["p"]))
    if kind == "affine":
        return AffineClipped(float(obj["intercept"]), float(obj["slope"]))
    if kind == "piecewise":
        return PiecewiseConstant(obj["levels"])
    if kind == "tabulated":
        return Tabulated(obj["grid"], obj["alpha"])
    raise ValueError(f"unknown alpha kind: {kind!r}")


def parse_alpha(text: str) -> AlphaStrategy:
    """CLI mini-syntax: constant:p | affine:a,b | pw:a1,...,am | tab:path."""
    kind, _, args = text.partition(":")
    if kind == "constant":
        out = Constant(float(args))
    elif kind == "affine":
        a, b = (float(v) for v in args.split(","))
        out = AffineClipped(a, b)
    elif kind == "pw":
        out = PiecewiseConstant([float(v) for v in args.split(",")])
    elif kind == "tab":
        with open(args) as fh:
            out = alpha_from_json(json.load(fh))
    else:
        raise ValueError(f"unknown alpha syntax {text!r}")
    out.check_valid()
    return out
