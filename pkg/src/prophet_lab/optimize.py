"""Search for good alpha curves, and for the blind upper bound.

Three independent pieces:

* ``optimize_piecewise`` -- maximin over m-piece constant strategies, in the
  multiplicative reparameterization a_k = prod_{l<=k} s_l that makes
  monotonicity automatic.
* ``solve_equalizing_ode`` -- Picard iteration for the curve that makes the
  continuum guarantee functional constant in the threshold index, via a
  frozen-coefficient second-order ODE solved by shooting.
* ``solve_control_family`` / ``sweep_upper_bound`` -- the two-parameter
  candidate family for the upper-bound objective, integrated to its terminal
  blow-down and scanned over a (K, t_bar) grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize as sopt
from scipy.integrate import solve_ivp

from .alpha import Tabulated
from .bounds import f_j_piecewise

__all__ = [
    "OdeSolution",
    "ControlFamilyPoint",
    "optimize_piecewise",
    "initial_equalizer_guess",
    "solve_equalizing_ode",
    "solve_control_family",
    "sweep_upper_bound",
    "sweep_upper_bound_detailed",
]


# ---------------------------------------------------------------------------
# Piecewise-constant maximin

def _min_f(levels):
    m = len(levels)
    return min(f_j_piecewise(levels, j) for j in range(1, m + 2))


def _coordinate_refine(levels, passes=6):
    """Cyclic golden-section ascent on each level within its monotone slot."""
    levels = np.asarray(levels, dtype=float).copy()
    m = levels.size
    best = _min_f(levels)
    for _ in range(passes):
        improved = False
        for k in range(m):
            lo = levels[k + 1] if k + 1 < m else 1e-6
            hi = levels[k - 1] if k > 0 else 1.0 - 1e-9

            def neg(v):
                trial = levels.copy()
                trial[k] = v
                return -_min_f(trial)

            res = sopt.minimize_scalar(neg, bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-10})
            if -res.fun > best + 1e-12:
                levels[k] = res.x
                best = -res.fun
                improved = True
        if not improved:
            break
    return levels, best


def _epigraph_solve(m, start):
    """max t s.t. f_j(levels) >= t, levels nonincreasing in (0, 1)."""

    def fs(a):
        return np.array([f_j_piecewise(a, j) for j in range(1, m + 2)])

    x0 = np.concatenate([start, [float(np.min(fs(start)))]])
    cons = [{"type": "ineq", "fun": lambda x: fs(x[:m]) - x[m]}]
    if m > 1:
        cons.append({"type": "ineq", "fun": lambda x: x[: m - 1] - x[1:m]})
    res = sopt.minimize(
        lambda x: -x[m],
        x0,
        method="SLSQP",
        bounds=[(1e-6, 1.0 - 1e-6)] * m + [(0.0, 1.0)],
        constraints=cons,
        options={"maxiter": 300, "ftol": 1e-12},
    )
    levels = np.minimum.accumulate(np.clip(res.x[:m], 1e-6, 1.0 - 1e-6))
    return levels, _min_f(levels)


def optimize_piecewise(m: int, restarts: int = 2, seed: int = 0):
    """Maximize min_j f_j over nonincreasing m-level strategies.

    The maximin is lifted to its epigraph (max t with every f_j >= t and
    monotone levels, solved by SLSQP) from a few seeds, then polished by
    coordinate-wise golden sections.  Deterministic given seed.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = np.random.default_rng(seed)
    x = (np.arange(m) + 0.5) / m
    seeds = [
        np.clip(0.78 - 0.55 * x, 0.05, 0.95),   # affine-ish, the known good shape
        np.full(m, 1.0 / math.e),
    ]
    for _ in range(max(0, restarts - len(seeds))):
        base = np.clip(0.78 - 0.55 * x + rng.normal(0, 0.05, m), 0.02, 0.98)
        seeds.append(np.minimum.accumulate(base))

    best_levels, best_val = None, -np.inf
    for start in seeds[: max(restarts, 1)]:
        levels, val = _epigraph_solve(m, start)
        levels, val = _coordinate_refine(levels, passes=2)
        if val > best_val:
            best_levels, best_val = levels, val
    return best_levels, best_val


# ---------------------------------------------------------------------------
# Equalizing ODE

@dataclass
class OdeSolution:
    """u(x) = int_0^x (1 - alpha), tabulated together with alpha = 1 - u'."""

    grid: np.ndarray
    u_values: np.ndarray
    alpha_values: np.ndarray
    residual: float

    def alpha(self) -> Tabulated:
        return Tabulated(self.grid, self.alpha_values)


def initial_equalizer_guess(grid_points: int = 512, m: int = 23, seed: int = 0) -> OdeSolution:
    """Seed curve from a small piecewise maximin, tapered to alpha(1) = 0."""
    levels, _ = optimize_piecewise(m, restarts=1, seed=seed)
    x = np.linspace(0.0, 1.0, grid_points + 1)
    a = np.interp(x, (np.arange(m) + 0.5) / m, levels)
    a *= 1.0 - x ** 8  # enforce the terminal condition alpha(1) = 0
    a = np.minimum.accumulate(np.clip(a, 0.0, 1.0))
    u = np.concatenate(([0.0], np.cumsum((1.0 - 0.5 * (a[1:] + a[:-1])) * np.diff(x))))
    return OdeSolution(grid=x, u_values=u, alpha_values=a, residual=np.inf)


def _frozen_k(grid, alpha_prev):
    """K(x) = 1 - exp(int_0^x ln alpha_prev), tabulated on the grid."""
    la = np.log(np.maximum(alpha_prev, 1e-300))
    mid = 0.5 * (la[1:] + la[:-1])
    L = np.concatenate(([0.0], np.cumsum(mid * np.diff(grid))))
    return 1.0 - np.exp(L)


def _shoot(grid, K_tab, c, x0=1e-8):
    """Integrate u'' = (u')^2 K(x) / u from u(x0)=c*x0, u'(x0)=c; returns
    (u, u') sampled on the grid."""

    def rhs(x, y):
        u, up = y
        K = np.interp(x, grid, K_tab)
        return [up, up * up * K / max(u, 1e-30)]

    sol = solve_ivp(rhs, (x0, 1.0), [c * x0, c], t_eval=np.clip(grid, x0, 1.0),
                    rtol=1e-9, atol=1e-12, method="RK45", dense_output=False)
    if not sol.success:
        raise RuntimeError(f"shooting integration failed: {sol.message}")
    return sol.y[0], sol.y[1]


def solve_equalizing_ode(init: OdeSolution, iterations: int = 11) -> OdeSolution:
    """Fixed-point iteration: freeze K at the previous curve, re-solve the
    frozen two-point problem u(0)=0, u'(1)=1 by bisecting the initial slope."""
    grid = init.grid
    alpha_prev = init.alpha_values
    u = init.u_values
    up = None
    for _ in range(iterations):
        K_tab = _frozen_k(grid, alpha_prev)
        lo, hi = 1e-6, 1.0 - 1e-9
        _, up_hi = _shoot(grid, K_tab, hi)
        if up_hi[-1] < 1.0:
            raise RuntimeError("shooting bracket failure: u'(1) < 1 at maximal slope")
        for _ in range(60):
            c = 0.5 * (lo + hi)
            u, up = _shoot(grid, K_tab, c)
            if up[-1] > 1.0:
                hi = c
            else:
                lo = c
        alpha_prev = np.clip(1.0 - up, 0.0, 1.0)
        alpha_prev = np.minimum.accumulate(alpha_prev)
        alpha_prev[-1] = 0.0
    upp = np.gradient(up, grid)
    K_tab = _frozen_k(grid, alpha_prev)
    defect = up * up * K_tab - upp * u
    return OdeSolution(grid=grid, u_values=u, alpha_values=alpha_prev,
                       residual=float(np.max(np.abs(defect[1:-1]))))


# ---------------------------------------------------------------------------
# Upper-bound control family

@dataclass
class ControlFamilyPoint:
    K: float
    t_bar: float
    beta_grid: np.ndarray
    beta_values: np.ndarray
    objective: float
    feasible: bool

    def alpha(self) -> Tabulated:
        if self.t_bar > 0:
            grid = np.concatenate(([0.0, self.t_bar * (1 - 1e-9)], self.beta_grid))
            vals = np.concatenate(([1.0, 1.0], self.beta_values))
        else:
            grid, vals = self.beta_grid, self.beta_values
        return Tabulated(grid, np.minimum.accumulate(np.clip(vals, 0.0, 1.0)))


def _integrate_family(K, t_bar, s, n_steps, store=False):
    """Vectorized fixed-step RK4 for g' = ln beta, beta' = -K e^g on
    [t_bar, 1], elementwise over flat arrays K, t_bar, s = ln beta(t_bar).

    Returns blow-down times (where beta first hits 0; inf if never), and the
    stored (g, beta) paths when requested.
    """
    K = np.asarray(K, dtype=float)
    t_bar = np.asarray(t_bar, dtype=float)
    s = np.asarray(s, dtype=float)
    h = (1.0 - t_bar) / n_steps
    g = np.zeros_like(K)
    beta = np.exp(s)
    alive = np.ones(K.shape, dtype=bool)
    blow = np.full(K.shape, np.inf)
    t = t_bar.copy()
    if store:
        g_path = np.zeros(K.shape + (n_steps + 1,))
        b_path = np.zeros(K.shape + (n_steps + 1,))
        g_path[..., 0] = g
        b_path[..., 0] = beta

    def deriv(g, beta):
        return np.log(np.maximum(beta, 1e-300)), -K * np.exp(np.minimum(g, 50.0))

    for step in range(n_steps):
        k1g, k1b = deriv(g, beta)
        k2g, k2b = deriv(g + 0.5 * h * k1g, beta + 0.5 * h * k1b)
        k3g, k3b = deriv(g + 0.5 * h * k2g, beta + 0.5 * h * k2b)
        k4g, k4b = deriv(g + h * k3g, beta + h * k3b)
        g_new = g + (h / 6.0) * (k1g + 2 * k2g + 2 * k3g + k4g)
        b_new = beta + (h / 6.0) * (k1b + 2 * k2b + 2 * k3b + k4b)
        died = alive & (b_new <= 0.0)
        if np.any(died):
            frac = np.where(died, beta / np.maximum(beta - b_new, 1e-300), 0.0)
            blow = np.where(died, t + frac * h, blow)
        g = np.where(alive & ~died, g_new, g)
        beta = np.where(alive & ~died, b_new, 0.0 * beta)
        alive = alive & ~died
        t = t + h
        if store:
            g_path[..., step + 1] = g
            b_path[..., step + 1] = beta
    if store:
        return blow, g_path, b_path
    return blow


def _solve_family_grid(K, t_bar, n_steps=2048, bisect_iters=60):
    """Shooting by bisection on the initial slope, vectorized over flat
    arrays of (K, t_bar) pairs.  Returns objectives, feasibility, paths."""
    K = np.asarray(K, dtype=float)
    t_bar = np.asarray(t_bar, dtype=float)
    s_lo = np.full(K.shape, -40.0)
    s_hi = np.zeros(K.shape)
    # Blow-down time grows with the starting level; hitting zero exactly at
    # t = 1 needs the largest admissible start (beta = 1) to survive that far.
    blow_hi = _integrate_family(K, t_bar, s_hi, n_steps)
    feasible = blow_hi >= 1.0
    for _ in range(bisect_iters):
        s_mid = 0.5 * (s_lo + s_hi)
        blow = _integrate_family(K, t_bar, s_mid, n_steps)
        early = blow < 1.0  # died too soon: raise the start
        s_lo = np.where(early, s_mid, s_lo)
        s_hi = np.where(early, s_hi, s_mid)
    s = 0.5 * (s_lo + s_hi)
    blow, g_path, b_path = _integrate_family(K, t_bar, s, n_steps, store=True)
    h = (1.0 - t_bar) / n_steps
    # trapezoid on the stored paths
    int_beta = (np.sum(b_path, axis=-1) - 0.5 * (b_path[..., 0] + b_path[..., -1])) * h
    eg = np.exp(g_path)
    int_eg = (np.sum(eg, axis=-1) - 0.5 * (eg[..., 0] + eg[..., -1])) * h
    term1 = 1.0 - (t_bar + int_beta)  # 1 - int alpha
    term2 = t_bar + int_eg            # int e^{int ln alpha}
    objective = np.minimum(term1, term2)
    return objective, feasible, s, b_path, g_path


def solve_control_family(K: float, t_bar: float, n_steps: int = 2048) -> ControlFamilyPoint:
    """Solve the candidate-curve ODE for one (K, t_bar) pair."""
    if not 0.0 <= K <= 3.0:
        raise ValueError("K must lie in [0, 3]")
    if not 0.0 <= t_bar <= 1.0 / 3.0 + 1e-12:
        raise ValueError("t_bar must lie in [0, 1/3]")
    obj, feas, _, b_path, _ = _solve_family_grid(
        np.array([K]), np.array([t_bar]), n_steps=n_steps
    )
    grid = np.linspace(t_bar, 1.0, n_steps + 1)
    return ControlFamilyPoint(
        K=K,
        t_bar=t_bar,
        beta_grid=grid,
        beta_values=b_path[0],
        objective=float(obj[0]) if feas[0] else -np.inf,
        feasible=bool(feas[0]),
    )


def sweep_upper_bound_detailed(grid_K=None, grid_t=None, n_steps: int = 2048):
    """Max objective over the (K, t_bar) grid; returns (sup, K*, t_bar*)."""
    if grid_K is None:
        grid_K = np.linspace(0.0, 3.0, 61)
    if grid_t is None:
        grid_t = np.linspace(0.0, 1.0 / 3.0, 21)
    KK, TT = np.meshgrid(np.asarray(grid_K, dtype=float),
                         np.asarray(grid_t, dtype=float), indexing="ij")
    obj, feas, _, _, _ = _solve_family_grid(KK.ravel(), TT.ravel(), n_steps=n_steps)
    obj = np.where(feas, obj, -np.inf)
    best = int(np.argmax(obj))
    return float(obj[best]), float(KK.ravel()[best]), float(TT.ravel()[best])


def sweep_upper_bound(grid_K=None, grid_t=None, n_steps: int = 2048) -> float:
    sup, _, _ = sweep_upper_bound_detailed(grid_K, grid_t, n_steps=n_steps)
    return sup
