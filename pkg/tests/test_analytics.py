import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from snmcache.analytics import (
    RateFunctionCtx,
    che_curve_point,
    che_error_bound,
    che_error_bound_at,
    chernoff_r,
    clt_scale,
    convergence_check,
    eviction_time_che,
    expected_distinct_g,
    g_quadrature,
    g_rect_closed,
    hit_prob_che,
    hit_prob_quadrature,
    in_prob_che,
    ld_deviation_exponents,
    normal_approx_bounds,
    rate_function,
)
from snmcache.errors import ModelError
from snmcache.model import DeterministicVolume, ParetoVolume, RectangularProfile, SnmModel, TabulatedProfile, study_model
from snmcache.simulation import empirical_distinct_count

E1 = math.exp(-1.0)


def mp_g_rect(t, L, z):
    """Brute-force g for a deterministic volume: int over entry offsets of P(>= 1 request in window)."""
    mpmath.mp.dps = 20
    H = lambda u: min(max(u, 0), L) / L
    f = lambda u: 1 - mpmath.exp(-z * (H(u + t) - H(u)))
    # window [u, u + t] relative to entry; kinks where an end crosses 0 or L
    return float(mpmath.quad(f, sorted({-t, L - t, 0.0, L})))


# -- g ----------------------------------------------------------------------


def test_g_at_zero_is_zero(unit_model):
    assert expected_distinct_g(0.0, unit_model) == 0.0
    assert expected_distinct_g(1e-12, unit_model) == pytest.approx(1e-12, rel=1e-6)


def test_g_example_t2(unit_model):
    assert expected_distinct_g(2.0, unit_model) == pytest.approx(1 + E1, rel=1e-12)
    assert g_rect_closed(2.0, 1.0, DeterministicVolume(1.0)) == pytest.approx(1.367879441171, rel=1e-11)


@pytest.mark.parametrize("L", [1.0, 7.5, 30.0])
def test_g_at_lifespan(L):
    assert g_rect_closed(L, L, DeterministicVolume(1.0)) == pytest.approx(2 * L * E1, rel=1e-12)


@settings(max_examples=25)
@given(st.floats(0.01, 10.0), st.floats(0.2, 5.0), st.floats(0.1, 6.0))
def test_g_closed_matches_brute_force(t, L, z):
    assert g_rect_closed(t, L, DeterministicVolume(z)) == pytest.approx(mp_g_rect(t, L, z), rel=1e-8)


@pytest.mark.parametrize("t", [0.5, 3.0, 29.9, 30.0, 45.0, 120.0])
@pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0])
def test_g_closed_vs_quadrature(t, alpha):
    model = study_model(100.0, 30.0, alpha)
    assert g_rect_closed(t, 30.0, model.volume) == pytest.approx(g_quadrature(t, model), rel=1e-9)


def test_g_tabulated_flat_matches_rectangular():
    flat = SnmModel(1.0, TabulatedProfile((0.0, 2.0), (0.5, 0.5)), ParetoVolume(1.5, 2.0))
    rect = SnmModel(1.0, RectangularProfile(2.0), ParetoVolume(1.5, 2.0))
    for t in [0.3, 2.0, 5.0]:
        assert expected_distinct_g(t, flat) == pytest.approx(expected_distinct_g(t, rect), rel=1e-9)


@given(st.floats(0.01, 100.0), st.floats(0.01, 100.0))
def test_g_increasing_and_subadditive(s, t):
    model = study_model(1.0, 30.0, 2.0)
    g = lambda x: expected_distinct_g(x, model)
    assert g(s + t) > max(g(s), g(t))
    # a window can see at most the contents seen by its two halves
    assert g(s + t) <= g(s) + g(t) + 1e-9


def test_g_matches_monte_carlo_distinct_count():
    model = study_model(20.0, 30.0, 2.0)
    counts = empirical_distinct_count(model, 45.0, 2000, seed=11)
    se = counts.std(ddof=1) / math.sqrt(counts.size)
    assert abs(counts.mean() / 20.0 - expected_distinct_g(45.0, model)) <= 3 * se / 20.0


# -- t_C --------------------------------------------------------------------


def test_eviction_time_examples(unit_model):
    assert eviction_time_che(1 + E1, unit_model) == pytest.approx(2.0, rel=1e-9)
    assert eviction_time_che(2 * E1, unit_model) == pytest.approx(1.0, rel=1e-9)
    lam10 = SnmModel(10.0, RectangularProfile(1.0), DeterministicVolume(1.0))
    assert eviction_time_che(10 * (1 + E1), lam10) == pytest.approx(2.0, rel=1e-9)


@given(st.floats(1.0, 5000.0), st.floats(1.0, 5000.0))
def test_eviction_time_monotone_and_inverts_g(c1, c2):
    model = study_model(100.0, 30.0, 2.0)
    t1, t2 = eviction_time_che(c1, model), eviction_time_che(c2, model)
    assert 100.0 * expected_distinct_g(t1, model) == pytest.approx(c1, rel=1e-8)
    if c1 < c2 * (1 - 1e-9):
        assert t1 < t2


def test_eviction_time_rejects_nonpositive(unit_model):
    with pytest.raises(ModelError):
        eviction_time_che(0.0, unit_model)


# -- in / hit probabilities -------------------------------------------------


def test_in_prob_examples(unit_model):
    assert in_prob_che(0.75, 1.0, 0.5, unit_model) == pytest.approx(1 - math.exp(-0.5), rel=1e-12)
    assert in_prob_che(1.6, 1.0, 0.5, unit_model) == 0.0
    for z in [0.5, 1.0, 4.0]:
        assert in_prob_che(1.0, z, 1.0, unit_model) == pytest.approx(1 - math.exp(-z), rel=1e-12)
        assert in_prob_che(1.0, z, 3.0, unit_model) == pytest.approx(1 - math.exp(-z), rel=1e-12)


def test_hit_prob_limits(unit_model, desk_model):
    assert hit_prob_che(1e-12, unit_model) == pytest.approx(0.0, abs=1e-11)
    assert hit_prob_che(1e-12, desk_model) == pytest.approx(0.0, abs=1e-11)
    for theta in [1.0, 2.0, 50.0]:
        assert hit_prob_che(theta, unit_model) == pytest.approx(E1, rel=1e-12)


def test_hit_prob_saturates_for_pareto(pareto):
    model = SnmModel(1.0, RectangularProfile(1.0), pareto)
    # one miss per content that is ever requested
    expected = 1 - pareto.one_minus_mgf(-1.0) / 3.0
    assert hit_prob_che(1.0, model) == pytest.approx(expected, rel=1e-12)
    assert hit_prob_che(7.0, model) == pytest.approx(expected, rel=1e-12)
    mpmath.mp.dps = 25
    oracle = 1 - (1 - float(2 * mpmath.expint(3, 1.5))) / 3
    assert expected == pytest.approx(oracle, rel=1e-9)


@pytest.mark.parametrize("theta", [0.01, 1.0, 10.0, 29.99, 30.0, 60.0])
def test_hit_prob_closed_vs_quadrature(theta, desk_model):
    assert hit_prob_che(theta, desk_model) == pytest.approx(hit_prob_quadrature(theta, desk_model), rel=1e-9)


@given(st.floats(0.001, 60.0), st.floats(0.001, 60.0))
def test_hit_prob_monotone_in_theta(a, b):
    model = study_model(100.0, 30.0, 2.0)
    lo, hi = sorted((a, b))
    assert 0.0 <= hit_prob_che(lo, model) <= hit_prob_che(hi, model) + 1e-15 <= 1.0 + 1e-15


def test_hit_prob_tabulated_uses_quadrature():
    model = SnmModel(1.0, TabulatedProfile.normalized([0, 1, 2], [0, 1, 0]), DeterministicVolume(2.0))
    # theta past the support: every request after the first hits
    assert hit_prob_che(5.0, model) == pytest.approx(1 - (1 - math.exp(-2)) / 2, rel=1e-9)


# -- error bound -------------------------------------------------------------


def test_chernoff_r_values():
    assert chernoff_r(1.0) == 0.0
    assert chernoff_r(2.0) == pytest.approx(2 * math.log(2) - 1, rel=1e-14)
    assert chernoff_r(0.0) == 1.0
    assert np.allclose(chernoff_r(np.array([0.0, 1.0, 2.0])), [1.0, 0.0, 2 * math.log(2) - 1])


@given(st.floats(1e-6, 50.0))
def test_chernoff_r_nonnegative_and_stable(x):
    r = chernoff_r(x)
    assert r >= 0.0
    assert r == pytest.approx(1 - x + x * math.log(x), abs=1e-12 * max(1.0, x * abs(math.log(x))))


def test_error_bound_decreasing_in_C(desk_model):
    bounds = [che_error_bound(C, 0.2, desk_model)[0] for C in (50, 100, 200)]
    assert bounds[0] > bounds[1] > bounds[2]


def test_error_bound_grid_minimum(desk_model):
    grid = np.geomspace(1e-3, 0.5, 32)
    best, d = che_error_bound(100, None, desk_model, grid=grid)
    assert d in grid
    assert best == min(che_error_bound_at(100, float(x), desk_model) for x in grid)


def test_error_bound_poisson_terms_match_rate_function(desk_model):
    # exp(-mu R(C/mu)) with mu = lam g equals exp(-C I(g/C))
    C, delta = 100.0, 0.3
    t_c = eviction_time_che(C, desk_model)
    ctx = RateFunctionCtx(desk_model.lam)
    total = che_error_bound_at(C, delta, desk_model, t_c=t_c)
    up, lo = ld_deviation_exponents(C, delta, desk_model, t_c=t_c)
    p = [hit_prob_che(t_c * s, desk_model) for s in (1 - delta, 1, 1 + delta)]
    spread = max(abs(p[0] - p[1]), abs(p[2] - p[1]))
    assert total == pytest.approx(math.exp(-up) + math.exp(-lo) + spread, rel=1e-10)
    assert ctx.lam == 100.0


@pytest.mark.parametrize("delta", [0.0, 1.0, -0.1])
def test_error_bound_rejects_bad_delta(delta, desk_model):
    with pytest.raises(ModelError):
        che_error_bound(100, delta, desk_model)


# -- rate function and LD exponents ----------------------------------------


def test_rate_function_values():
    ctx = RateFunctionCtx(100.0)
    assert rate_function(1 / 100.0, ctx) == pytest.approx(0.0, abs=1e-15)
    assert rate_function(2 / 100.0, ctx) == pytest.approx(1 - math.log(2), rel=1e-13)
    assert rate_function(0.0, ctx) == math.inf
    assert np.all(rate_function(np.array([0.0, 0.01]), ctx) == np.array([math.inf, 0.0]))
    with pytest.raises(ValueError):
        rate_function(-1.0, ctx)


@given(st.floats(1e-8, 10.0))
def test_rate_function_convex_nonnegative(x):
    ctx = RateFunctionCtx(3.0)
    assert rate_function(x, ctx) >= 0.0


def test_ld_exponents_closed_form_chain(unit_model):
    C = 1 + E1
    up, lo = ld_deviation_exponents(C, 0.5, unit_model)
    # t_C = 2, so the upper threshold is 3 and g(3) = 2 for L = 1, z = 1
    assert expected_distinct_g(3.0, unit_model) == pytest.approx(2.0, rel=1e-14)
    mpmath.mp.dps = 30
    Cm = 1 + mpmath.e ** -1
    x = 2 / Cm
    assert up == pytest.approx(float(Cm * (x - 1 - mpmath.log(x))), rel=1e-10)
    g1 = g_rect_closed(1.0, 1.0, DeterministicVolume(1.0))
    assert lo == pytest.approx(float(Cm * (g1 / Cm - 1 - mpmath.log(g1 / Cm))), rel=1e-10)


@given(st.floats(10.0, 2000.0), st.floats(0.01, 0.9))
def test_ld_exponents_positive(C, delta):
    up, lo = ld_deviation_exponents(C, delta, study_model(100.0, 30.0, 2.0))
    assert up > 0 and lo > 0


def test_ld_exponents_vanish_as_delta_shrinks(desk_model):
    vals = [max(ld_deviation_exponents(100.0, d, desk_model)) for d in (1e-1, 1e-2, 1e-3)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 1e-3


# -- CLT scale and normal bounds -------------------------------------------


def test_clt_scale_values(unit_model):
    assert clt_scale(4.0, unit_model) == pytest.approx(2 / math.sqrt(1 - E1), rel=1e-13)
    assert clt_scale(4.0, unit_model) == pytest.approx(2.515533, rel=1e-6)


@given(st.floats(1e-3, 1e4))
def test_clt_scale_square_root(x):
    model = study_model(100.0, 30.0, 2.0)
    assert clt_scale(4 * x, model) / clt_scale(x, model) == pytest.approx(2.0, rel=1e-14)


def test_clt_relative_scale_vanishes(desk_model):
    ratios = [clt_scale(t, desk_model) / t for t in (eviction_time_che(C, desk_model) for C in (1e2, 1e4, 1e6))]
    assert ratios[0] > ratios[1] > ratios[2]
    assert ratios[2] < 1e-2


def test_normal_bounds_values():
    # lam g(t) = 100 at t = 2 with lam = 100 / (1 + e^-1)
    model = SnmModel(100.0 / (1 + E1), RectangularProfile(1.0), DeterministicVolume(1.0))
    w, k = normal_approx_bounds(2.0, model)
    assert w == pytest.approx(0.1, rel=1e-12)
    assert k == pytest.approx(2 * math.sqrt(0.1), rel=1e-12)
    assert k == pytest.approx(0.632456, rel=1e-6)


@given(st.floats(0.01, 100.0), st.floats(0.01, 100.0))
def test_wasserstein_decreasing(t1, t2):
    model = study_model(100.0, 30.0, 2.0)
    lo, hi = sorted((t1, t2))
    if hi > lo * (1 + 1e-9):
        assert normal_approx_bounds(lo, model)[0] > normal_approx_bounds(hi, model)[0]


# -- curve points ------------------------------------------------------------


def test_curve_point_and_convergence(desk_model):
    p = che_curve_point(100, desk_model)
    assert p.t_c == pytest.approx(eviction_time_che(100, desk_model))
    assert p.wasserstein == pytest.approx(0.1, rel=1e-9)
    conv = convergence_check(100, desk_model, t_c=p.t_c)
    assert conv["g_rel"] <= 1e-8 and conv["p_rel"] <= 1e-8


def test_desk_curve_monotone(desk_model):
    ps = [che_curve_point(C, desk_model).p_hit_che for C in (10, 20, 50, 100, 200, 300, 500)]
    assert all(b > a for a, b in zip(ps, ps[1:]))
