import numpy as np
import pytest

from meshfree_options import (
    Grid,
    ModelParams,
    SinhTransform,
    TimeScheme,
    evaluate_at,
    price_american_richardson,
    price_bermudan,
    price_european,
    put_payoff,
)
from meshfree_options.assembly import make_basis
from meshfree_options.linalg import SolverConfig
from meshfree_options.stepper import march

SCHEMES = ["LBIE", "LRPI"]
WIDE = SolverConfig(max_iterations=5000)


@pytest.mark.parametrize("scheme", SCHEMES)
def test_initial_level_is_payoff(scheme, case1):
    seen = {}
    sol = march(scheme, case1, 16, 4, on_step=lambda k, v: seen.setdefault(k, v.copy()))
    assert sorted(seen) == [0, 1, 2, 3, 4]
    g = sol.grid
    payoff = put_payoff(SinhTransform(case1).s_of_x(g.nodes), case1.strike)
    first = sol.basis.evaluate(g.nodes).dense(g.n_nodes) @ seen[4] if scheme == "LBIE" else seen[4]
    np.testing.assert_allclose(first, payoff, atol=1e-10)


@pytest.mark.parametrize("scheme", SCHEMES)
def test_payoff_fit_at_strike(scheme, case1):
    seen = {}
    n = 32
    sol = march(scheme, case1, n, 1, on_step=lambda k, v: seen.setdefault(k, v.copy()))
    fake = type(sol)(sol.scheme, case1, sol.grid, 0, seen[1], sol.basis)
    assert abs(evaluate_at(fake, [case1.strike])[0]) <= 10 * sol.grid.h**2


@pytest.mark.parametrize("scheme", SCHEMES)
def test_bermudan_dominates_european(scheme, case2):
    pts = np.arange(60.0, 150.0, 5.0)
    eu = evaluate_at(price_european(scheme, case2, 64, 32, solver=WIDE), pts)
    am = evaluate_at(price_bermudan(scheme, case2, 64, 32, solver=WIDE), pts)
    assert np.all(am >= eu - 1e-10)
    assert am[0] > eu[0] + 1.0


@pytest.mark.parametrize("scheme", SCHEMES)
def test_single_step_bermudan_above_payoff(scheme, case2):
    sol = price_bermudan(scheme, case2, 32, 1, solver=WIDE)
    s = SinhTransform(case2).s_of_x(sol.grid.nodes)
    assert np.all(sol.nodal_prices >= put_payoff(s, case2.strike) - 1e-9)


@pytest.mark.parametrize("scheme", SCHEMES)
@pytest.mark.parametrize("american", [False, True])
def test_prices_stay_within_bounds(scheme, american, case1):
    lows, highs = [], []

    def record(k, v):
        prices = v if scheme == "LRPI" else phi @ v
        lows.append(prices.min())
        highs.append(prices.max())

    g = Grid(64)
    phi = make_basis(scheme, g).evaluate(g.nodes).dense(g.n_nodes)
    march(scheme, case1, 64, 32, american=american, on_step=record)
    assert min(lows) >= -1e-6
    assert max(highs) <= case1.strike + 1e-6


@pytest.mark.parametrize("scheme", SCHEMES)
def test_zero_asset_price_gives_boundary_value(scheme, case1):
    eu = price_european(scheme, case1, 32, 16)
    np.testing.assert_allclose(evaluate_at(eu, [0.0]), case1.strike * np.exp(-case1.r * case1.maturity), atol=1e-9)
    am = price_bermudan(scheme, case1, 32, 16)
    np.testing.assert_allclose(evaluate_at(am, [0.0]), case1.strike, atol=1e-9)


def test_lrpi_evaluation_at_nodes_returns_nodal_values(case1):
    sol = price_european("LRPI", case1, 32, 16)
    s = SinhTransform(case1).s_of_x(sol.grid.nodes)
    np.testing.assert_allclose(evaluate_at(sol, s), sol.values, atol=1e-10)


def test_lbie_nodal_prices_match_evaluation(case1):
    sol = price_european("LBIE", case1, 32, 16)
    s = SinhTransform(case1).s_of_x(sol.grid.nodes)
    np.testing.assert_allclose(evaluate_at(sol, s), sol.nodal_prices, atol=1e-12)


def test_evaluation_outside_domain_rejected(case1):
    sol = price_european("LRPI", case1, 16, 4)
    with pytest.raises(ValueError):
        evaluate_at(sol, [case1.s_max + 1.0])


@pytest.mark.parametrize("scheme", SCHEMES)
def test_time_self_convergence_is_second_order(scheme, case1):
    pts = [9.0, 10.0, 11.0]
    v = [evaluate_at(price_european(scheme, case1, 32, m), pts) for m in (32, 64, 128)]
    ratio = np.abs(v[0] - v[1]).max() / np.abs(v[1] - v[2]).max()
    assert 3.0 <= ratio <= 5.0


def test_richardson_on_identical_inputs_is_fixed_point(case1):
    # a price that does not depend on the number of exercise dates is left unchanged
    p = ModelParams.test_case_1(strike=1e-9)
    sol = price_american_richardson("LRPI", p, 16, 4)
    coarse = price_bermudan("LRPI", p, 16, 4)
    np.testing.assert_allclose(sol.values, coarse.values, atol=1e-9)


@pytest.mark.slow
def test_richardson_improves_bermudan(case2):
    pts = np.arange(80.0, 125.0, 5.0)
    fine = evaluate_at(price_bermudan("LBIE", case2, 256, 1024, solver=WIDE), pts)
    plain = evaluate_at(price_bermudan("LBIE", case2, 256, 64, solver=WIDE), pts)
    extrapolated = evaluate_at(price_american_richardson("LBIE", case2, 256, 64, solver=WIDE), pts)
    assert np.abs(extrapolated - fine).max() < np.abs(plain - fine).max()


def test_input_validation(case1):
    with pytest.raises(ValueError):
        march("LBIE", case1, 4, 4)
    with pytest.raises(ValueError):
        march("LBIE", case1, 16, 0)
    with pytest.raises(ValueError):
        march("FEM", case1, 16, 4)
    with pytest.raises(ValueError):
        march("LBIE", case1, 16, 4, constraint_space="other")


def test_time_scheme_warns_outside_stable_set():
    with pytest.warns(UserWarning):
        TimeScheme(0.7, 10, 1.0)
    assert TimeScheme(0.5, 10, 1.0).dt == pytest.approx(0.1)
    with pytest.raises(ValueError):
        TimeScheme(1.5, 10, 1.0)


def test_iterations_recorded(case1):
    sol = price_european("LBIE", case1, 32, 8)
    assert len(sol.iterations) == 8 and all(i >= 0 for i in sol.iterations)
