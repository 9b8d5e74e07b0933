"""Acceptance-curve kinds: evaluation, monotonicity, parsing."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prophet_lab.alpha import (
    AffineClipped,
    Constant,
    PiecewiseConstant,
    Tabulated,
    parse_alpha,
)
from prophet_lab.alpha import alpha_from_json


def test_constant_evaluation():
    a = Constant(0.4)
    assert np.all(a(np.linspace(0, 1, 5)) == 0.4)
    a.check_valid()


def test_affine_clipping_and_breakpoints():
    a = AffineClipped(1.2, -1.5)
    x = np.array([0.0, 0.1, 0.5, 0.9, 1.0])
    assert np.allclose(a(x), np.clip(1.2 - 1.5 * x, 0, 1))
    bp = a.breakpoints()
    assert np.allclose(bp, [(1.2 - 1.0) / 1.5, 1.2 / 1.5])
    a.check_valid()


@given(st.floats(0.0, 1.0), st.floats(-2.0, 0.0))
@settings(max_examples=50, deadline=None)
def test_affine_always_nonincreasing(intercept, slope):
    a = AffineClipped(intercept, slope)
    y = a(np.linspace(0, 1, 257))
    assert np.all(np.diff(y) <= 1e-12)


def test_piecewise_indexing():
    a = PiecewiseConstant([0.9, 0.5, 0.2])
    assert a(0.0) == 0.9
    assert a(0.34) == 0.5
    assert a(0.999) == 0.2
    assert a(1.0) == 0.2  # last piece is closed on the right
    assert np.allclose(a.breakpoints(), [1 / 3, 2 / 3])


def test_piecewise_rejects_increasing_levels():
    with pytest.raises(ValueError):
        PiecewiseConstant([0.3, 0.5])
    with pytest.raises(ValueError):
        PiecewiseConstant([1.2, 0.5])


def test_tabulated_interpolation():
    a = Tabulated([0.0, 0.5, 1.0], [1.0, 0.6, 0.0])
    assert a(0.25) == pytest.approx(0.8)
    assert a(0.75) == pytest.approx(0.3)
    a.check_valid()


def test_check_valid_flags_increasing_tabulated():
    a = Tabulated([0.0, 1.0], [0.2, 0.8])
    with pytest.raises(ValueError):
        a.check_valid()


def test_parse_alpha_mini_syntax(tmp_path):
    assert isinstance(parse_alpha("constant:0.5"), Constant)
    aff = parse_alpha("affine:0.53,-0.38")
    assert aff.intercept == 0.53 and aff.slope == -0.38
    pw = parse_alpha("pw:0.8,0.5,0.2")
    assert np.allclose(pw.levels, [0.8, 0.5, 0.2])
    path = tmp_path / "alpha.json"
    path.write_text(json.dumps({"kind": "tabulated", "grid": [0, 1], "alpha": [0.7, 0.1]}))
    tab = parse_alpha(f"tab:{path}")
    assert tab(0.5) == pytest.approx(0.4)
    with pytest.raises(ValueError):
        parse_alpha("nope:1,2")


def test_json_roundtrip():
    for a in (Constant(0.3), AffineClipped(0.53, -0.38),
              PiecewiseConstant([0.7, 0.2]), Tabulated([0, 0.5, 1], [0.9, 0.5, 0.1])):
        back = alpha_from_json(a.to_json())
        x = np.linspace(0, 1, 101)
        assert np.allclose(back(x), a(x))
