import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meshfree_options import ModelParams, bs_put_exact, norm_cdf, put_payoff

# risk-neutral integration of the discounted payoff (mpmath, 30 digits)
CASE1_EXACT = [
    1.7987145993497515,
    1.3659592006764345,
    0.98804194982472536,
    0.67855318509537574,
    0.44197197805138848,
    0.27322488736606022,
    0.16063752392149675,
    0.090081105268620672,
    0.04834439498590458,
]


@pytest.mark.parametrize("s, expected", [(10, 0.0), (8, 2.0), (12, 0.0), (0, 10.0)])
def test_put_payoff(s, expected):
    assert put_payoff(s, 10.0) == expected


def test_put_payoff_rejects_negative_price():
    with pytest.raises(ValueError):
        put_payoff(-1.0, 10.0)


def test_boundary_value_at_zero(case1):
    assert bs_put_exact(0.0, 0.0, case1) == pytest.approx(10 * math.exp(-0.025), abs=1e-12)
    assert bs_put_exact(0.0, 0.0, case1) == pytest.approx(9.75310, abs=1e-5)


def test_far_field_vanishes(case1):
    assert bs_put_exact(1e6, 0.0, case1) < 1e-12


def test_matches_risk_neutral_integration(case1, case1_points):
    np.testing.assert_allclose(bs_put_exact(case1_points, 0.0, case1), CASE1_EXACT, atol=1e-12)
    assert bs_put_exact(10.0, 0.0, case1) == pytest.approx(0.4420, abs=1e-4)


def test_rejects_maturity_and_beyond(case1):
    with pytest.raises(ValueError):
        bs_put_exact(10.0, case1.maturity, case1)


def test_norm_cdf_against_erfc():
    x = np.linspace(-8, 8, 33)
    expected = [0.5 * math.erfc(-v / math.sqrt(2)) for v in x]
    np.testing.assert_allclose(norm_cdf(x), expected, rtol=0, atol=1e-15)


@pytest.mark.parametrize(
    "field, value",
    [("sigma", 0.0), ("r", -0.1), ("strike", 0.0), ("maturity", 0.0), ("s_max", 5.0), ("xi", 0.0), ("theta", 1.5)],
)
def test_params_validation(case1, field, value):
    kwargs = dict(sigma=0.2, r=0.05, strike=10.0, maturity=0.5, s_max=50.0, xi=1.0)
    kwargs[field] = value
    with pytest.raises(ValueError):
        ModelParams(**kwargs)


@settings(max_examples=60, deadline=None)
@given(
    s=st.floats(0.0, 60.0),
    t=st.floats(0.0, 0.49),
)
def test_put_bounds(case1, s, t):
    v = bs_put_exact(s, t, case1)
    disc = case1.strike * math.exp(-case1.r * (case1.maturity - t))
    assert max(disc - s, 0.0) - 1e-12 <= v <= disc + 1e-12
    assert put_payoff(s, case1.strike) <= case1.strike


def test_convex_and_nonincreasing(case1):
    s = np.linspace(0.0, 50.0, 2001)
    v = bs_put_exact(s, 0.0, case1)
    assert np.all(np.diff(v) <= 1e-14)
    assert np.all(v[:-2] - 2 * v[1:-1] + v[2:] >= -1e-9)
