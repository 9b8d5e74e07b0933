"""Monte Carlo engine: oracle agreement, determinism, stop-time frequencies."""

import json
import math

import numpy as np
import pytest

from prophet_lab.alpha import AffineClipped, Constant
from prophet_lab.distributions import (
    FiniteSupport,
    Instance,
    PointMass,
    Uniform,
)
from prophet_lab.simulate import (
    SimReport,
    empirical_stop_cdf,
    exact_eval,
    monte_carlo,
    monte_carlo_schedule,
)
from prophet_lab.thresholds import build_deterministic


def _random_finite_instance(rng, n):
    dists = []
    for _ in range(n):
        k = int(rng.integers(2, 4))
        vals = np.sort(rng.uniform(0.0, 3.0, k))
        while np.any(np.diff(vals) < 1e-6):
            vals = np.sort(rng.uniform(0.0, 3.0, k))
        probs = rng.dirichlet(np.ones(k))
        dists.append(FiniteSupport(vals.tolist(), probs.tolist()))
    return Instance(dists)


def test_exact_eval_single_point_mass():
    inst = Instance([PointMass(1.0)])
    assert exact_eval(inst, Constant(0.0)) == pytest.approx(1.0, abs=1e-12)


def test_exact_eval_two_variable_hand_sum():
    # Two fair coins on {0,1} with alpha = 0.5: the level falls inside the
    # max-cdf jump at 1, acceptance rate 1 - s with (1/2 + s/2)^2 = 1/2.
    inst = Instance([FiniteSupport([0.0, 1.0], [0.5, 0.5])] * 2)
    p = 1.0 - (math.sqrt(2.0) - 1.0)  # per-variable acceptance at the tie
    # Both permutations are symmetric: reward = 1 iff some coin shows 1 and
    # its tie is accepted; two independent chances.
    expected = 1.0 - (1.0 - 0.5 * p) ** 2
    assert exact_eval(inst, Constant(0.5)) == pytest.approx(expected, abs=1e-9)


def test_monte_carlo_matches_exact_on_random_instances():
    rng = np.random.default_rng(7)
    for trial in range(6):
        inst = _random_finite_instance(rng, int(rng.integers(2, 5)))
        alpha = Constant(float(rng.uniform(0.2, 0.8)))
        rep = monte_carlo(inst, alpha, mode="deterministic", trials=40_000, seed=trial)
        exact = exact_eval(inst, alpha)
        assert abs(rep.mean_reward - exact) <= max(3 * rep.std_error, 1e-9)


def test_reports_bit_identical_across_threads():
    inst = Instance([Uniform(0, 1), Uniform(0, 2), Uniform(0.5, 1.5)])
    alpha = AffineClipped(0.53, -0.38)
    reports = [
        monte_carlo(inst, alpha, mode="blind", trials=30_000, seed=5, threads=t)
        for t in (1, 2, 4)
    ]
    blobs = {json.dumps(r.to_json(), sort_keys=True) for r in reports}
    assert len(blobs) == 1


def test_thread_env_var_default(monkeypatch):
    monkeypatch.setenv("PROPHET_LAB_THREADS", "3")
    inst = Instance([Uniform(0, 1)] * 2)
    a = monte_carlo(inst, Constant(0.5), trials=8_192, seed=1)
    b = monte_carlo(inst, Constant(0.5), trials=8_192, seed=1, threads=1)
    assert a.to_json() == b.to_json()


def test_monte_carlo_schedule_matches_deterministic_mode():
    inst = Instance([FiniteSupport([0.0, 1.0], [0.5, 0.5]), Uniform(0, 1)])
    alpha = Constant(0.6)
    sched = build_deterministic(inst, alpha)
    a = monte_carlo(inst, alpha, mode="deterministic", trials=20_000, seed=2)
    b = monte_carlo_schedule(inst, sched, trials=20_000, seed=2)
    assert a.to_json() == b.to_json()


def test_blind_mode_on_atomic_instance():
    """The per-trial fallback path: sane range and a plausible ratio."""
    inst = Instance([FiniteSupport([0.0, 1.0, 2.0], [0.3, 0.4, 0.3]),
                     FiniteSupport([0.5, 1.5], [0.5, 0.5])])
    rep = monte_carlo(inst, AffineClipped(0.53, -0.38), mode="blind",
                      trials=4_000, seed=3)
    assert 0.0 <= rep.mean_reward <= inst.support_max()
    assert rep.ratio <= 1.0 + 3 * rep.std_error / rep.prophet
    assert rep.ratio >= 0.5  # the affine strategy guarantees > 0.657 in the limit


def test_empirical_stop_cdf_monotone():
    inst = Instance([Uniform(0, 1)] * 5)
    cdf, band = empirical_stop_cdf(inst, AffineClipped(0.53, -0.38), 20_000, seed=4)
    assert cdf.shape == (5,) and band.shape == (5,)
    assert np.all(np.diff(cdf) >= 0)
    assert np.all((cdf >= 0) & (cdf <= 1))


def test_empirical_stop_cdf_never_stops_at_alpha_one():
    inst = Instance([Uniform(0, 1)] * 3)
    cdf, _ = empirical_stop_cdf(inst, Constant(1.0), 5_000, seed=0)
    assert np.all(cdf == 0.0)


def test_sim_report_serialization():
    rep = SimReport(trials=10, mean_reward=1.5, std_error=0.1, prophet=2.0,
                    ratio=0.75, ratio_ci_radius=0.15, seed=9)
    assert rep.to_json()["ratio"] == 0.75
    header = SimReport.csv_header().split(",")
    row = rep.to_csv_row().split(",")
    assert len(header) == len(row)
    assert row[header.index("seed")] == "9"


def test_validation_errors():
    inst = Instance([Uniform(0, 1)])
    with pytest.raises(ValueError):
        monte_carlo(inst, Constant(0.5), trials=0)
    with pytest.raises(ValueError):
        monte_carlo(inst, Constant(0.5), mode="nope")
    with pytest.raises(ValueError):
        exact_eval(Instance([Uniform(0, 1)]), Constant(0.5))
    with pytest.raises(ValueError):
        exact_eval(Instance([PointMass(1.0)] * 9), Constant(0.5))
