import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from snmcache.errors import ModelError
from snmcache.model import (
    DeterministicVolume,
    ParetoVolume,
    RectangularProfile,
    SnmModel,
    TabulatedProfile,
    study_model,
    profile_from_dict,
    profile_intensity,
    sample_volume,
    volume_from_dict,
    volume_mgf,
    volume_mgf_deriv,
)

mpmath.mp.dps = 30


def mp_pareto_mgf(theta, a, alpha):
    # brute-force alpha a^alpha int_a^inf e^{theta z} z^{-1-alpha} dz
    f = lambda z: mpmath.e ** (theta * z) * z ** (-1 - alpha)
    return float(alpha * a**alpha * mpmath.quad(f, [a, 10 * a, mpmath.inf]))


def mp_pareto_mgf_deriv(theta, a, alpha):
    f = lambda z: mpmath.e ** (theta * z) * z ** (-alpha)
    return float(alpha * a**alpha * mpmath.quad(f, [a, 10 * a, mpmath.inf]))


# -- profiles --------------------------------------------------------------


@pytest.mark.parametrize(
    "t,z,L,expected",
    [(-1.0, 5.0, 1.0, 0.0), (0.5, 2.0, 1.0, 2.0), (15.0, 3.0, 30.0, 0.1)],
)
def test_profile_intensity_examples(t, z, L, expected):
    assert profile_intensity(t, z, RectangularProfile(L)) == pytest.approx(expected, rel=1e-15)


def test_profile_intensity_rejects_nonpositive_volume():
    with pytest.raises(ModelError):
        profile_intensity(0.5, 0.0, RectangularProfile(1.0))


@pytest.mark.parametrize("L", [0.0, -1.0, math.inf, math.nan])
def test_rectangular_rejects_bad_lifespan(L):
    with pytest.raises(ModelError):
        RectangularProfile(L)


@given(st.floats(-5, 40, allow_nan=False), st.floats(0.1, 30))
def test_rectangular_scalar_and_array_paths_agree(t, L):
    p = RectangularProfile(L)
    assert p.density(t) == p.density(np.array([t]))[0]
    assert p.cumulative(t) == pytest.approx(p.cumulative(np.array([t]))[0], abs=1e-15)
    assert 0.0 <= p.cumulative(t) <= 1.0


def test_tabulated_validation():
    with pytest.raises(ModelError, match="start"):
        TabulatedProfile((1.0, 2.0), (1.0, 1.0))
    with pytest.raises(ModelError, match="increasing"):
        TabulatedProfile((0.0, 1.0, 1.0), (1.0, 1.0, 1.0))
    with pytest.raises(ModelError, match=">= 0"):
        TabulatedProfile((0.0, 1.0, 2.0), (1.5, -0.5, 1.0))
    with pytest.raises(ModelError, match="mass"):
        TabulatedProfile((0.0, 1.0), (2.0, 2.0))


def test_tabulated_cumulative_matches_quadrature():
    p = TabulatedProfile.normalized([0, 1, 3, 6], [0, 2, 1, 0])
    from scipy.integrate import quad

    for t in [0.3, 1.0, 2.2, 4.9, 6.0, 7.0]:
        ref = quad(p.density, 0, min(t, 6), points=[1, 3])[0]
        assert p.cumulative(t) == pytest.approx(ref, abs=1e-10)
        assert p.cumulative(np.array([t]))[0] == pytest.approx(ref, abs=1e-10)


def test_tabulated_flat_equals_rectangular():
    tab = TabulatedProfile((0.0, 2.0), (0.5, 0.5))
    rect = RectangularProfile(2.0)
    ts = np.linspace(-1, 3, 41)
    assert np.allclose(tab.cumulative(ts), rect.cumulative(ts))
    assert np.allclose(tab.density(ts[(ts != 0) & (ts != 2)]), rect.density(ts[(ts != 0) & (ts != 2)]))


def test_tabulated_sampler_follows_density():
    p = TabulatedProfile.normalized([0, 1, 2], [0, 1, 0])
    rng = np.random.default_rng(3)
    owner, ages = p.sample_requests(rng, np.full(20000, 5.0))
    assert ages.size / 20000 == pytest.approx(5.0, rel=0.02)
    # triangular law on [0, 2]: mean 1, P(age < 0.5) = 1/8
    assert ages.mean() == pytest.approx(1.0, abs=0.01)
    assert np.mean(ages < 0.5) == pytest.approx(0.125, abs=0.005)


# -- volumes ---------------------------------------------------------------


@pytest.mark.parametrize("vol", [DeterministicVolume(2.0), ParetoVolume(1.5, 2.0), ParetoVolume(1.0, 1.5)])
def test_mgf_at_zero_is_one(vol):
    assert volume_mgf(0.0, vol) == 1.0
    assert volume_mgf_deriv(0.0, vol) == pytest.approx(vol.mean)


def test_deterministic_closed_forms():
    assert volume_mgf(-1.0, DeterministicVolume(1.0)) == pytest.approx(0.367879441171, rel=1e-11)
    assert volume_mgf_deriv(-2.0, DeterministicVolume(0.5)) == pytest.approx(0.183939720586, rel=1e-11)


def test_pareto_mgf_against_high_precision_quadrature(pareto):
    assert volume_mgf(-1.0, pareto) == pytest.approx(mp_pareto_mgf(-1, 1.5, 2), rel=1e-10)


def test_pareto_deriv_at_zero_is_mean(pareto):
    assert volume_mgf_deriv(0.0, pareto) == pytest.approx(3.0, rel=1e-15)


def test_pareto_deriv_oracle_and_finite_difference(pareto):
    d = volume_mgf_deriv(-1.0, pareto)
    assert d == pytest.approx(mp_pareto_mgf_deriv(-1, 1.5, 2), rel=1e-10)
    h = 1e-4
    fd = (volume_mgf(-1.0 + h, pareto) - volume_mgf(-1.0 - h, pareto)) / (2 * h)
    assert abs(fd - d) <= 1e-6


@given(st.floats(1.1, 4.0), st.floats(0.2, 5.0), st.floats(1e-4, 30.0))
def test_pareto_mgf_matches_exponential_integral(alpha, a, c):
    # phi(-c/a) = alpha E_{1+alpha}(c), phi'(-c/a) = alpha a E_alpha(c)
    v = ParetoVolume(a, alpha)
    theta = -c / a
    assert v.mgf(theta) == pytest.approx(float(alpha * mpmath.expint(1 + alpha, c)), rel=1e-8, abs=1e-14)
    assert v.mgf_deriv(theta) == pytest.approx(float(alpha * a * mpmath.expint(alpha, c)), rel=1e-8, abs=1e-14)
    assert 0.0 < v.mgf(theta) <= 1.0


def test_pareto_one_minus_mgf_is_accurate_near_zero(pareto):
    # 1 - phi(theta) ~ E[Z] |theta| for small |theta|; no cancellation
    theta = -1e-9
    assert pareto.one_minus_mgf(theta) == pytest.approx(3.0 * 1e-9, rel=1e-6)


def test_pareto_rejects_positive_theta(pareto):
    with pytest.raises(ModelError):
        pareto.mgf(0.1)


@pytest.mark.parametrize("a,alpha", [(0.0, 2.0), (1.0, 1.0), (1.0, 0.5), (-1.0, 2.0)])
def test_pareto_parameter_validation(a, alpha):
    with pytest.raises(ModelError):
        ParetoVolume(a, alpha)


def test_sample_volume_deterministic():
    rng = np.random.default_rng(0)
    assert sample_volume(DeterministicVolume(3.0), rng) == 3.0
    assert np.all(sample_volume(DeterministicVolume(3.0), rng, 5) == 3.0)


def test_sample_volume_pareto_mean_and_support(pareto):
    rng = np.random.default_rng(12345)
    z = sample_volume(pareto, rng, 1_000_000)
    assert z.min() >= 1.5
    # alpha = 2 has infinite variance, so use the sample sd as a rough yardstick
    se = z.std() / math.sqrt(z.size)
    assert abs(z.mean() - 3.0) <= 3 * se


def test_from_mean_matches_numerical_study_scale():
    assert ParetoVolume.from_mean(3.0, 2.0).scale == pytest.approx(1.5)
    assert study_model().volume.mean == pytest.approx(3.0)


# -- model / dict round-trips ---------------------------------------------


@pytest.mark.parametrize(
    "prof", [RectangularProfile(30.0), TabulatedProfile.normalized([0, 1, 2], [0, 1, 0])]
)
def test_profile_dict_round_trip(prof):
    assert profile_from_dict(prof.to_dict()) == prof


@pytest.mark.parametrize("vol", [DeterministicVolume(2.0), ParetoVolume(1.5, 2.0)])
def test_volume_dict_round_trip(vol):
    assert volume_from_dict(vol.to_dict()) == vol


def test_unknown_kinds_rejected():
    with pytest.raises(ModelError):
        profile_from_dict({"kind": "gaussian"})
    with pytest.raises(ModelError):
        volume_from_dict({"kind": "lognormal"})


@pytest.mark.parametrize("lam", [0.0, -1.0, math.inf])
def test_model_rejects_bad_rate(lam):
    with pytest.raises(ModelError):
        SnmModel(lam, RectangularProfile(1.0), DeterministicVolume(1.0))
