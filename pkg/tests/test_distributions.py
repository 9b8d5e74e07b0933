"""Distribution primitives: cdfs, quantiles, max law, prophet value."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prophet_lab.distributions import (
    FiniteSupport,
    Instance,
    Mixture,
    PointMass,
    Uniform,
    cdf_max,
    instance_from_json,
    instance_to_json,
    prophet_value,
    quantile_max,
    quantile_max_batch,
    sample_instance_block,
)

TWO_POINT = FiniteSupport([1.0, 2.0], [0.5, 0.5])


def test_uniform_cdf_quantile_roundtrip():
    d = Uniform(2.0, 6.0)
    assert d.cdf(2.0) == 0.0
    assert d.cdf(6.0) == 1.0
    assert d.cdf(4.0) == pytest.approx(0.5)
    for q in (0.0, 0.25, 0.5, 0.99, 1.0):
        assert d.cdf(d.quantile(q)) == pytest.approx(q, abs=1e-9)


def test_point_mass_cdf_left_limit():
    d = PointMass(3.0)
    assert d.cdf(3.0) == 1.0
    assert d.cdf_left(3.0) == 0.0
    assert d.cdf(2.999) == 0.0
    assert d.mean() == 3.0


def test_finite_support_cdf_and_atoms():
    d = TWO_POINT
    assert d.cdf(0.5) == 0.0
    assert d.cdf(1.0) == pytest.approx(0.5)
    assert d.cdf_left(2.0) == pytest.approx(0.5)
    assert d.cdf(2.0) == 1.0
    assert d.mean() == pytest.approx(1.5)
    assert set(np.asarray(d.atom_points()).tolist()) == {1.0, 2.0}


def test_mixture_cdf_is_convex_combination():
    d = Mixture([(0.3, PointMass(1.0)), (0.7, Uniform(0.0, 2.0))])
    assert d.cdf(1.0) == pytest.approx(0.3 + 0.7 * 0.5)
    assert d.cdf_left(1.0) == pytest.approx(0.7 * 0.5)
    assert d.mean() == pytest.approx(0.3 * 1.0 + 0.7 * 1.0)


@given(st.floats(0.01, 0.99))
@settings(max_examples=40, deadline=None)
def test_generalized_inverse_property(q):
    """F(Q(q)) >= q and F(Q(q)-) <= q for a distribution with atoms and a
    continuous part."""
    d = Mixture([(0.4, FiniteSupport([0.5, 1.5], [0.5, 0.5])),
                 (0.6, Uniform(0.0, 2.0))])
    t = d.quantile(q)
    assert d.cdf(t) >= q - 1e-9
    assert d.cdf_left(t) <= q + 1e-9


def test_cdf_max_is_product():
    inst = Instance([TWO_POINT, TWO_POINT])
    assert cdf_max(inst, 1.9) == pytest.approx(0.25)
    assert cdf_max(inst, 2.0) == 1.0
    assert inst.cdf_max_left(2.0) == pytest.approx(0.25)


def test_quantile_max_flags_atoms():
    inst = Instance([TWO_POINT, TWO_POINT])
    tau, is_atom = quantile_max(inst, 0.5)
    assert tau == 2.0 and is_atom
    tau, is_atom = quantile_max(inst, 0.1)
    assert tau == 1.0 and is_atom


def test_quantile_max_continuous():
    inst = Instance([Uniform(0.0, 1.0), Uniform(0.0, 1.0)])
    tau, is_atom = quantile_max(inst, 0.49)
    assert not is_atom
    assert tau == pytest.approx(math.sqrt(0.49))
    taus = quantile_max_batch(inst, np.array([[0.25, 0.81]]))
    assert np.allclose(taus, [[0.5, 0.9]], atol=1e-9)


def test_prophet_value_discrete_exact():
    # max of two iid {1, 2} fair coins: P(max = 2) = 3/4.
    inst = Instance([TWO_POINT, TWO_POINT])
    assert prophet_value(inst) == pytest.approx(1.75, abs=1e-12)


def test_prophet_value_continuous():
    inst = Instance([Uniform(0.0, 1.0), Uniform(0.0, 1.0)])
    assert prophet_value(inst) == pytest.approx(2.0 / 3.0, abs=1e-7)


def test_sampling_matches_means():
    inst = Instance([Uniform(0.0, 2.0), TWO_POINT])
    rng = np.random.default_rng(0)
    X = sample_instance_block(inst, rng, 200_000)
    assert X.shape == (200_000, 2)
    assert np.mean(X[:, 0]) == pytest.approx(1.0, abs=0.01)
    assert np.mean(X[:, 1]) == pytest.approx(1.5, abs=0.01)


def test_json_roundtrip():
    inst = Instance([
        Uniform(0.0, 1.0),
        PointMass(2.0),
        FiniteSupport([0.0, 3.0], [0.25, 0.75]),
        Mixture([(0.5, PointMass(1.0)), (0.5, Uniform(0.0, 0.5))]),
    ])
    blob = json.dumps(instance_to_json(inst))
    back = instance_from_json(json.loads(blob))
    assert back.n == inst.n
    for t in (0.0, 0.5, 1.0, 2.0, 3.0):
        assert cdf_max(back, t) == pytest.approx(cdf_max(inst, t), abs=1e-12)


def test_instance_validation():
    with pytest.raises(ValueError):
        FiniteSupport([1.0, 2.0], [0.5, 0.6])  # probabilities must sum to 1
    with pytest.raises(ValueError):
        Uniform(2.0, 1.0)
