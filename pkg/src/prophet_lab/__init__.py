"""Blind multi-threshold stopping strategies for the prophet secretary
problem: evaluation, simulation, optimization, and hard instances."""

from .alpha import (
    AffineClipped,
    AlphaStrategy,
    Constant,
    PiecewiseConstant,
    Tabulated,
    parse_alpha,
)
from .adversarial import (
    NamedInstance,
    blind_value_iid_spike,
    blind_value_near_deterministic,
    dp_optimal_small,
    dp_value_hard_general,
    make_named,
)
from .bounds import (
    BoundReport,
    blind_upper_objective,
    constant_alpha_factor,
    equalizer_curve,
    f_j_discrete,
    f_j_piecewise,
    g_factor,
    guarantee_limit,
    stop_cdf_bounds,
)
from .distributions import (
    Distribution,
    FiniteSupport,
    Instance,
    Mixture,
    PermutationDraw,
    PointMass,
    Uniform,
    cdf_max,
    instance_from_json,
    instance_to_json,
    prophet_value,
    quantile_max,
    sample_instance,
)
from .optimize import (
    ControlFamilyPoint,
    OdeSolution,
    initial_equalizer_guess,
    optimize_piecewise,
    solve_control_family,
    solve_equalizing_ode,
    sweep_upper_bound,
)
from .simulate import SimReport, empirical_stop_cdf, exact_eval, monte_carlo
from .thresholds import (
    StopOutcome,
    ThresholdSchedule,
    UnresolvedTieError,
    build_blind,
    build_deterministic,
    run_stochastic_tta,
    run_tta,
    tie_break_probabilities,
)

__version__ = "0.1.0"
