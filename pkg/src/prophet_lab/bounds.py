"""Closed-form guarantee functionals for blind strategies.

Contains the constant-level factor min{1-p, (1-p)/(-ln p)}, the finite-n
per-index guarantee f_j, its continuum (Riemann) limit, the stopping-time
cdf sandwich, and the refined piecewise-constant guarantee with the g
correction factor, plus the two-instance upper-bound objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .alpha import AlphaStrategy

__all__ = [
    "BoundReport",
    "constant_alpha_factor",
    "f_j_discrete",
    "f_discrete_report",
    "guarantee_limit",
    "equalizer_curve",
    "stop_cdf_bounds",
    "g_factor",
    "f_j_piecewise",
    "f_piecewise_report",
    "blind_upper_objective",
]

_LOG_FLOOR = 1e-300
_CONV_TOL = 1e-6


@dataclass(frozen=True)
class BoundReport:
    per_j: np.ndarray
    min_value: float
    argmin_j: int  # 1-based index, matching the j convention

    @staticmethod
    def from_values(per_j) -> "BoundReport":
        per_j = np.asarray(per_j, dtype=float)
        k = int(np.argmin(per_j))
        return BoundReport(per_j=per_j, min_value=float(per_j[k]), argmin_j=k + 1)

    def to_json(self) -> dict:
        return {
            "per_j": [float(v) for v in self.per_j],
            "min": self.min_value,
            "argmin": self.argmin_j,
        }


def constant_alpha_factor(p: float) -> float:
    """Guarantee of the constant strategy alpha = p: min{1-p, (1-p)/(-ln p)}."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return min(1.0 - p, (1.0 - p) / (-math.log(p)))


def f_j_discrete(alpha_levels, j: int) -> float:
    """Finite-n guarantee term for threshold index j (1-based, j in [n+1]).

    alpha_levels holds alpha(1/n)..alpha(n/n); the virtual level
    alpha((n+1)/n) = 0 closes the last case.
    """
    a = np.asarray(alpha_levels, dtype=float)
    n = a.size
    if not 1 <= j <= n + 1:
        raise ValueError("j must lie in [n+1]")
    a_j = a[j - 1] if j <= n else 0.0
    if j > 1 and a_j >= 1.0:
        raise ValueError("division by zero guarantee: alpha(j/n) = 1")
    first = float(np.sum(1.0 - a[: j - 1])) / (n * (1.0 - a_j))
    cum = np.cumsum(np.log(np.maximum(a, _LOG_FLOOR)))
    second = float(np.sum(np.exp(cum[j - 1 :] / n))) / n
    return first + second


def f_discrete_report(alpha_levels) -> BoundReport:
    a = np.asarray(alpha_levels, dtype=float)
    n = a.size
    return BoundReport.from_values([f_j_discrete(a, j) for j in range(1, n + 2)])


def stop_cdf_bounds(alpha_levels, k: int, n: int):
    """Sharp sandwich on P(T <= k) for threshold quantile levels alpha_1..alpha_n."""
    a = np.asarray(alpha_levels, dtype=float)
    if not 1 <= k <= n:
        raise ValueError("k must lie in [n]")
    lower = float(np.sum(1.0 - a[:k])) / n
    upper = 1.0 - float(np.exp(np.sum(np.log(np.maximum(a[:k], _LOG_FLOOR))) / n))
    return lower, upper


def g_factor(m: int, p: float, k: int) -> float:
    """Correction factor: 1/(1 - (k/m)(1-p)) up to k = m/2, then 2/(1+p)."""
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    if not 0 <= k <= m:
        raise ValueError("k must lie in {0..m}")
    if k <= m / 2:
        return 1.0 / (1.0 - (k / m) * (1.0 - p))
    return 2.0 / (1.0 + p)


def _ratio_term(a: np.ndarray, m: int) -> np.ndarray:
    """(1 - a^(1/m)) / (-ln a), with the 1/m limit at a -> 1."""
    la = np.log(np.maximum(a, _LOG_FLOOR))
    small = np.abs(la) < 1e-9
    safe = np.where(small, 1.0, la)
    out = -np.expm1(la / m) / (-safe)
    return np.where(small, 1.0 / m, out)


def f_j_piecewise(levels, j: int) -> float:
    """Per-index guarantee of an m-piece constant strategy, with the
    correction factor applied to the survival terms."""
    a = np.asarray(levels, dtype=float)
    m = a.size
    if not 1 <= j <= m + 1:
        raise ValueError("j must lie in [m+1]")
    if a[-1] <= 0.0:
        raise ValueError("log of zero: last level must be positive")
    prefix = np.exp(np.concatenate(([0.0], np.cumsum(np.log(a)))) / m)  # (prod_{l<k} a_l)^{1/m}
    ratio = _ratio_term(a, m)
    if j == 1:
        return float(np.sum(prefix[:-1] * ratio))
    if j == m + 1:
        return float(np.mean(1.0 - a))
    if a[j - 1] >= 1.0:
        raise ValueError("division by zero guarantee: alpha_j = 1")
    first = float(np.sum(1.0 - a[: j - 1])) / (m * (1.0 - a[j - 1]))
    ks = np.arange(j, m + 1)
    g = np.array([g_factor(m, a[0], int(k - 1)) for k in ks])
    second = float(np.sum(prefix[ks - 1] * g * ratio[ks - 1]))
    return first + second


def f_piecewise_report(levels) -> BoundReport:
    a = np.asarray(levels, dtype=float)
    m = a.size
    return BoundReport.from_values([f_j_piecewise(a, j) for j in range(1, m + 2)])


# ---------------------------------------------------------------------------
# Continuum limit machinery

def _panel_count(alpha: AlphaStrategy, grid_size: int) -> int:
    pieces = np.asarray(alpha.breakpoints()).size + 1
    n = max(int(grid_size), 64)
    return ((n + pieces - 1) // pieces) * pieces


def _tables(alpha: AlphaStrategy, panels: int):
    """Cumulative integrals on a uniform panel grid.

    Returns (x, a_right, A, L, Ecum) where x are the panel boundaries,
    a_right the right-limit of alpha at each boundary, A the cumulative
    integral of (1 - alpha), L of ln(alpha), and Ecum of exp(L).  Alpha is
    sampled one-sidedly inside each panel so jumps aligned with boundaries
    do not pollute the panel rule.
    """
    h = 1.0 / panels
    x = np.linspace(0.0, 1.0, panels + 1)
    eps = 1e-9 * h
    a_l = np.asarray(alpha(x[:-1] + eps), dtype=float)       # left endpoint, right limit
    a_q = np.asarray(alpha(x[:-1] + 0.25 * h), dtype=float)  # quarter point
    a_m = np.asarray(alpha(x[:-1] + 0.5 * h), dtype=float)   # midpoint
    a_r = np.asarray(alpha(x[1:] - eps), dtype=float)        # right endpoint, left limit

    def cum(f_l, f_m, f_r):
        panel = (h / 6.0) * (f_l + 4.0 * f_m + f_r)
        return np.concatenate(([0.0], np.cumsum(panel)))

    A = cum(1.0 - a_l, 1.0 - a_m, 1.0 - a_r)
    # True -inf at exact zeros so exp(cumulative log) is exactly 0 past them.
    with np.errstate(divide="ignore"):
        ln_l = np.log(a_l)
        ln_q = np.log(a_q)
        ln_m = np.log(a_m)
        ln_r = np.log(a_r)
    L = cum(ln_l, ln_m, ln_r)
    # L at midpoints via a Simpson step on the left half-panel.
    L_mid = L[:-1] + (h / 12.0) * (ln_l + 4.0 * ln_q + ln_m)
    Ecum = cum(np.exp(L[:-1]), np.exp(L_mid), np.exp(L[1:]))
    a_right = np.asarray(alpha(np.minimum(x + eps, 1.0)), dtype=float)
    return x, a_right, A, L, Ecum


def _limit_values(alpha: AlphaStrategy, panels: int):
    x, a_right, A, _, Ecum = _tables(alpha, panels)
    term1 = float(A[-1])  # integral of (1 - alpha)
    survival = Ecum[-1] - Ecum  # int_x^1 exp(int_0^y ln alpha)
    denom = 1.0 - a_right
    valid = denom > 1e-12
    if np.any(valid):
        inner = A[valid] / denom[valid] + survival[valid]
        inf_val = float(np.min(inner))
    else:
        inf_val = math.inf
    return term1, inf_val, float(Ecum[-1])


def guarantee_limit(alpha: AlphaStrategy, grid_size: int = 2048) -> float:
    """Continuum guarantee min{int(1-alpha), inf_x [...]}, panel rule with
    dyadic refinement until the value moves by less than 1e-6."""
    panels = _panel_count(alpha, grid_size)
    t1, inf_val, _ = _limit_values(alpha, panels)
    value = min(t1, inf_val)
    while panels < 2 ** 21:
        panels *= 2
        t1, inf_val, _ = _limit_values(alpha, panels)
        new = min(t1, inf_val)
        if abs(new - value) < _CONV_TOL:
            return new
        value = new
    return value


def equalizer_curve(alpha: AlphaStrategy, grid_size: int = 2048):
    """x and E(x) = int_0^x (1-alpha)/(1-alpha(x)) + int_x^1 e^{int ln alpha};
    NaN where alpha(x) = 1 makes the constraint vacuous."""
    panels = _panel_count(alpha, grid_size)
    x, a_right, A, _, Ecum = _tables(alpha, panels)
    survival = Ecum[-1] - Ecum
    denom = 1.0 - a_right
    E = np.where(denom > 1e-12, A / np.where(denom > 1e-12, denom, 1.0) + survival, np.nan)
    return x, E


def blind_upper_objective(alpha: AlphaStrategy, grid_size: int = 2048) -> float:
    """Two-instance upper bound min{1 - int alpha, int e^{int ln alpha}}."""
    panels = _panel_count(alpha, grid_size)
    t1, _, t2 = _limit_values(alpha, panels)
    value = min(t1, t2)
    while panels < 2 ** 21:
        panels *= 2
        t1, _, t2 = _limit_values(alpha, panels)
        new = min(t1, t2)
        if abs(new - value) < _CONV_TOL:
            return new
        value = new
    return value
