from __future__ import annotations

import json
import math

import numpy as np
import numpy.testing as npt
import pytest
from helpers import finite_input, max_principle_input
from hypothesis import given, settings
from hypothesis import strategies as st

from discfrac.coefficients import lambda_coeffs
from discfrac.continuous import get_function
from discfrac.fracops import (
    ConvergenceError,
    DirichletProblem,
    HypothesisError,
    TailError,
    compose_check,
    frac_apply,
    frac_left,
    frac_neg_apply,
    frac_neg_right,
    frac_right,
    max_principle_check,
    regularity_report,
    solve_dirichlet,
)
from discfrac.grid import (
    CallbackTail,
    ConstantTail,
    Grid,
    GridFunction,
    ZeroTail,
    constant,
    delta_right_apply,
    geometric,
    indicator,
    restrict,
    shift,
)

SMALL = lambda_coeffs(0.5, 2000)


# -- pointwise powers -------------------------------------------------------------------


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
@pytest.mark.parametrize("c", [0.0, 1.0, -3.7])
def test_constant_maps_to_zero(alpha, c):
    u = constant(Grid(0.5, -3, 3), c)
    for n in (-3, 0, 7):
        assert frac_right(u, alpha, n).value == 0.0
        assert frac_left(u, alpha, n).value == 0.0


@pytest.mark.parametrize("n", [-2, 0, 3, 10])
def test_geometric_eigen_right(n):
    u = geometric(Grid(1.0, -2, 10), 0.5)
    res = frac_right(u, 0.3, n)
    npt.assert_allclose(res.value, 0.5**n * 0.5**0.3, rtol=1e-13)
    assert res.truncation_bound < 1e-300 or res.truncation_bound <= 1e-12 * abs(res.value)


def test_eigen_value_frozen():
    u = geometric(Grid(1.0, 0, 3), 0.5)
    assert frac_right(u, 0.3, 0).value == pytest.approx(0.81225239635623558, rel=1e-15)


def test_geometric_eigen_left():
    u = geometric(Grid(1.0, -5, 5), 2.0)
    for n in (-5, 0, 5):
        npt.assert_allclose(frac_left(u, 0.3, n).value, 2.0**n * 0.5**0.3, rtol=1e-13)


def test_indicator_at_itself():
    u = indicator(Grid(1.0, -4, 4), 2)
    assert frac_right(u, 0.4, 2).value == 1.0
    assert frac_left(u, 0.4, 2).value == 1.0


def test_scaling_in_h_exact():
    r, a = 0.6, 0.35
    g1 = geometric(Grid(1.0, 0, 20), r)
    # the same sequence r^n on a finer mesh
    gh = GridFunction(
        Grid(0.1, 0, 20),
        g1.values,
        CallbackTail(lambda x: r ** np.rint(np.asarray(x) / 0.1), decay=r),
        ZeroTail(),
    )
    for n in (0, 5, 20):
        assert frac_right(gh, a, n).value == 0.1 ** (-a) * frac_right(g1, a, n).value


def test_periodic_tail_bound_covers_longer_table():
    u = restrict(get_function("cos"), Grid(0.1, -10, 10))
    short = frac_right(u, 0.5, 0, SMALL)
    long = frac_right(u, 0.5, 0)
    assert short.truncation_bound > 0
    assert abs(short.value - long.value) <= short.truncation_bound + long.truncation_bound


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(-15, 15), st.floats(0.05, 0.95))
def test_translation_equivariance(seed, k, alpha):
    u = finite_input(np.random.default_rng(seed))
    v = shift(u, k)
    table = lambda_coeffs(alpha, 500)
    for n in range(u.n_lo - 3, u.n_hi + 2):
        assert frac_right(v, alpha, n - k, table).value == frac_right(u, alpha, n, table).value


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-5, 5, allow_subnormal=False), st.floats(-5, 5, allow_subnormal=False))
def test_linearity(seed, a, b):
    rng = np.random.default_rng(seed)
    grid = Grid(1.0, 0, 30)
    u = GridFunction(grid, rng.normal(size=31))
    v = GridFunction(grid, rng.normal(size=31))
    w = GridFunction(grid, a * u.values + b * v.values)
    for n in (0, 10, 30):
        lhs = frac_right(w, 0.5, n, SMALL).value
        rhs = a * frac_right(u, 0.5, n, SMALL).value + b * frac_right(v, 0.5, n, SMALL).value
        scale = abs(a) * np.sum(np.abs(u.values)) + abs(b) * np.sum(np.abs(v.values))
        assert abs(lhs - rhs) <= 1e-12 * scale


# -- window application ---------------------------------------------------------------------


@pytest.mark.parametrize("side", ["right", "left"])
def test_apply_direct_matches_fft(side):
    u = restrict(get_function("cos"), Grid(0.2, -20, 20))
    a = frac_apply(u, 0.4, lambda_coeffs(0.4, 5000), side=side, method="direct")
    b = frac_apply(u, 0.4, lambda_coeffs(0.4, 5000), side=side, method="fft")
    npt.assert_allclose(a.values, b.values, atol=1e-11)


def test_apply_tails():
    u = constant(Grid(1.0, 0, 5), 2.0)
    w = frac_apply(u, 0.5)
    assert isinstance(w.tail_right, ZeroTail)
    g = geometric(Grid(1.0, 0, 5), 0.5)
    wg = frac_apply(g, 0.5)
    npt.assert_allclose(wg(8), 0.5**8 * 0.5**0.5, rtol=1e-12)


def test_apply_rejects_unknown_method():
    with pytest.raises(ValueError):
        frac_apply(indicator(Grid(1.0, 0, 2)), 0.5, method="spectral")


def test_commutation_with_difference():
    u = geometric(Grid(1.0, 0, 20), 0.7)
    table = lambda_coeffs(0.4, 10**4)
    a = delta_right_apply(frac_apply(u, 0.4, table)).values
    b = frac_apply(delta_right_apply(u), 0.4, table).values
    npt.assert_allclose(a, b, rtol=0, atol=1e-12)


def test_table_mismatch_rejected():
    with pytest.raises(ValueError):
        frac_right(indicator(Grid(1.0, 0, 2)), 0.3, 0, lambda_coeffs(0.4, 10))


# -- negative powers ------------------------------------------------------------------------


def test_neg_geometric():
    u = geometric(Grid(1.0, 0, 4), 0.5)
    for n in (0, 2, 6):
        npt.assert_allclose(frac_neg_right(u, 0.5, n).value, 0.5**n * math.sqrt(2), rtol=1e-12)


def test_neg_zero():
    u = GridFunction(Grid(1.0, 0, 3), np.zeros(4))
    assert frac_neg_right(u, 0.5, 0).value == 0.0


def test_neg_then_positive_inverts():
    u = indicator(Grid(1.0, -5, 5), 0)
    v = frac_neg_apply(u, 0.3, window=(-30, 5))
    back = [frac_right(v, 0.3, n).value for n in range(-30, 6)]
    npt.assert_allclose(back, u.take(-30, 5), atol=1e-14)


def test_neg_rejects_constant_tail():
    with pytest.raises(TailError):
        frac_neg_right(constant(Grid(1.0, 0, 2), 1.0), 0.5, 0)
    with pytest.raises(TailError):
        frac_neg_right(restrict(get_function("cos"), Grid(1.0, 0, 2)), 0.5, 0)


def test_neg_non_convergence():
    u = geometric(Grid(1.0, 0, 2), 0.999999)
    with pytest.raises(ConvergenceError):
        frac_neg_right(u, 0.5, 0, M_max=1024)


# -- composition ---------------------------------------------------------------------------


def test_compose_geometric():
    res = compose_check(geometric(Grid(1.0, 0, 10), 0.5), 0.25, 0.25)
    assert res.residual <= 1e-8


def test_compose_constant():
    res = compose_check(constant(Grid(1.0, 0, 5), 3.0), 0.25, 0.5, M=1000)
    assert res.residual <= 1e-13


@pytest.mark.parametrize("seed", range(5))
def test_compose_random_finite(seed):
    u = finite_input(np.random.default_rng(seed))
    res = compose_check(u, 0.3, 0.4, M=4000)
    assert res.residual <= res.truncation_bound


def test_compose_rejects_sum_above_one():
    with pytest.raises(ValueError):
        compose_check(indicator(Grid(1.0, 0, 1)), 0.6, 0.5)


# -- maximum principle ----------------------------------------------------------------------


def test_max_principle_zero():
    v = max_principle_check(GridFunction(Grid(1.0, 0, 5), np.zeros(6)), 0, 0.5)
    assert v.value == 0.0 and v.holds and v.ray_vanishes and v.rigidity_consistent


def test_max_principle_single_term():
    u = indicator(Grid(1.0, 0, 10), 3)
    v = max_principle_check(u, 0, 0.5)
    assert v.value == -0.0625 and v.holds and not v.value_vanishes
    assert json.loads(v.to_json()) == {"verdict": "holds", "value": -0.0625, "truncation_bound": 0.0}


def test_max_principle_hypothesis_errors():
    with pytest.raises(HypothesisError):
        max_principle_check(indicator(Grid(1.0, 0, 3), 0), 0, 0.5)
    with pytest.raises(HypothesisError):
        max_principle_check(GridFunction(Grid(1.0, 0, 3), [0, 1, -1, 0]), 0, 0.5)
    with pytest.raises(HypothesisError):
        max_principle_check(GridFunction(Grid(1.0, 0, 1), [0, 0], ConstantTail(-1.0)), 0, 0.5)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.1, 0.5, 0.9]))
def test_max_principle_fuzz(seed, alpha):
    u, j0 = max_principle_input(np.random.default_rng(seed))
    v = max_principle_check(u, j0, alpha, lambda_coeffs(alpha, 3000))
    assert v.holds
    assert v.rigidity_consistent


# -- Dirichlet problem ---------------------------------------------------------------------


def eigen_problem(alpha: float, r: float, j0: int, j1: int, h: float = 1.0) -> DirichletProblem:
    g = geometric(Grid(h, j1, j1), r)
    f = (1 - r) ** alpha * r ** np.arange(j0, j1) / h**alpha
    return DirichletProblem(alpha, j0, j1, f, g)


def test_dirichlet_zero():
    g = GridFunction(Grid(1.0, 5, 5), [0.0])
    sol = solve_dirichlet(DirichletProblem(0.5, 0, 5, np.zeros(5), g))
    npt.assert_array_equal(sol.u.values, 0.0)


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("h", [1.0, 0.25])
def test_dirichlet_eigen(alpha, h):
    sol = solve_dirichlet(eigen_problem(alpha, 0.5, 0, 20, h))
    npt.assert_allclose(sol.u.take(0, 19), 0.5 ** np.arange(20), rtol=0, atol=1e-10)
    assert sol.max_residual <= 1e-10


def test_dirichlet_single_equation():
    sol = solve_dirichlet(eigen_problem(0.5, 0.3, 4, 5))
    npt.assert_allclose(sol.u(4), 0.3**4, rtol=1e-12)


def test_dirichlet_constant_tail():
    # u = c everywhere solves f = 0 with g = c, since constants are annihilated
    g = constant(Grid(1.0, 10, 10), 2.0)
    sol = solve_dirichlet(DirichletProblem(0.4, 0, 10, np.zeros(10), g))
    # rounding of 10**5-term sums
    npt.assert_allclose(sol.u.take(0, 9), 2.0, rtol=1e-10)


def test_dirichlet_rejects_unbounded_g():
    g = GridFunction(Grid(1.0, 3, 3), [1.0], CallbackTail(lambda x: x))
    with pytest.raises(TailError):
        DirichletProblem(0.5, 0, 3, np.zeros(3), g)


def test_dirichlet_shape_checked():
    with pytest.raises(ValueError):
        DirichletProblem(0.5, 0, 3, np.zeros(2), GridFunction(Grid(1.0, 3, 3), [0.0]))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.25, 0.5, 0.75]))
def test_dirichlet_positivity(seed, alpha):
    rng = np.random.default_rng(seed)
    width = int(rng.integers(1, 30))
    f = rng.uniform(0, 1, size=width) * (rng.uniform(size=width) < 0.5)
    g = GridFunction(Grid(1.0, width, width), [0.0])
    sol = solve_dirichlet(DirichletProblem(alpha, 0, width, f, g), lambda_coeffs(alpha, 2000))
    assert np.min(sol.u.take(0, width - 1)) >= -sol.slack


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_comparison_principle(seed):
    rng = np.random.default_rng(seed)
    width, alpha = 15, 0.6
    fv = rng.normal(size=width)
    fu = fv + rng.uniform(0, 1, size=width)
    gv_vals = rng.normal(size=8)
    gu_vals = gv_vals + rng.uniform(0, 1, size=8)
    grid = Grid(1.0, width, width + 7)
    table = lambda_coeffs(alpha, 2000)
    u = solve_dirichlet(DirichletProblem(alpha, 0, width, fu, GridFunction(grid, gu_vals)), table)
    v = solve_dirichlet(DirichletProblem(alpha, 0, width, fv, GridFunction(grid, gv_vals)), table)
    assert np.all(u.u.values >= v.u.values - (u.slack + v.slack) - 1e-12)


# -- regularity -----------------------------------------------------------------------------


def test_regularity_constant():
    r = regularity_report(constant(Grid(0.1, 0, 10), 1.0), 0.5, 1.0)
    assert r.seminorm_in == 0.0 and r.seminorm_out == 0.0 and r.ratio == 0.0


@pytest.mark.parametrize("fid, h, alpha, beta", [("cos", 0.1, 0.5, 1.0), ("abs_sin_0.8", 0.05, 0.3, 0.8)])
def test_regularity_finite(fid, h, alpha, beta):
    u = restrict(get_function(fid), Grid(h, -20, 20))
    r = regularity_report(u, alpha, beta, lambda_coeffs(alpha, 10**4))
    assert 0 < r.ratio < 50
    assert r.window == (-20, 20)


def test_regularity_ratio_stable_across_h():
    ratios = []
    for h in (0.1, 0.05, 0.025):
        n = int(round(1 / h))
        u = restrict(get_function("cos"), Grid(h, -n, n))
        ratios.append(regularity_report(u, 0.5, 1.0, lambda_coeffs(0.5, 10**4)).ratio)
    assert max(ratios) / min(ratios) < 1.5


def test_regularity_rejects_order():
    with pytest.raises(ValueError):
        regularity_report(indicator(Grid(1.0, 0, 3)), 0.5, 0.4)
