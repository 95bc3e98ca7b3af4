"""Che's approximation for LRU caches fed by shot-noise traffic.

Central quantity: ``g(t)``, the mean number of distinct contents requested in
a window of length ``t`` per unit catalogue rate. The characteristic time
``t_C`` solves ``lam * g(t_C) = C``; the hit probability under the
approximation is evaluated at ``t_C``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ModelError
from .model import RectangularProfile, SnmModel, VolumeSpec
from .numerics import DEFAULT_NUMERICS, NumericsConfig, integrate

DELTA_GRID = np.geomspace(1e-3, 0.5, 32)


@dataclass(frozen=True)
class CheCurvePoint:
    cache_size: float
    t_c: float
    p_hit_che: float
    err_bound: float
    delta_star: float
    wasserstein: float
    kolmogorov: float


@dataclass(frozen=True)
class RateFunctionCtx:
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ModelError("rate function needs lambda > 0")


# ---------------------------------------------------------------------------
# g(t)


def g_rect_closed(t: float, L: float, volume: VolumeSpec, cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
    """Closed form of ``g`` for the rectangular profile of lifespan ``L``.

    ``2(t^L) + (t v L - t^L)(1 - phi(-(t^L)/L)) - 2 E[(L/Z)(1 - exp(-(t^L) Z/L))]``
    with ``^``/``v`` the min/max. The expectation is exact for a deterministic
    volume and a one-dimensional quadrature otherwise.
    """
    if not L > 0:
        raise ModelError("lifespan must be > 0")
    if t <= 0:
        return 0.0
    s, big = min(t, L), max(t, L)
    c = s / L
    tail = volume.expect(lambda z: -math.expm1(-c * z) / z, cfg)
    return 2.0 * s + (big - s) * volume.one_minus_mgf(-c, cfg) - 2.0 * L * tail


def g_quadrature(t: float, model: SnmModel, cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
    """General multiplicative-profile ``g`` by nested quadrature.

    Uses the split ``int_0^t [1 - phi(-H(u))] du + int_0^inf [1 - phi(H(u) - H(u + t))] du``.
    Both integrands are constant (first) or zero (second) past the end of the
    profile support, so the outer integrals are exact on a finite range.
    """
    if t <= 0:
        return 0.0
    prof, vol = model.profile, model.volume
    H = prof.cumulative
    S = prof.support_end
    bps = prof.breakpoints

    head = integrate(lambda u: vol.one_minus_mgf(-H(u), cfg), 0.0, min(t, S), cfg, bps)
    if t > S:
        head += (t - S) * vol.one_minus_mgf(-1.0, cfg)
    second_bps = list(bps) + [b - t for b in bps]
    tail = integrate(lambda u: vol.one_minus_mgf(H(u) - H(u + t), cfg), 0.0, S, cfg, second_bps)
    return head + tail


def expected_distinct_g(t: float, model: SnmModel, cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
    """Mean number of distinct contents requested in ``[0, t]``, divided by lambda.

    Rectangular profiles use :func:`g_rect_closed`; anything else goes through
    :func:`g_quadrature`.
    """
    if isinstance(model.profile, RectangularProfile):
        return g_rect_closed(t, model.profile.lifespan, model.volume, cfg)
    return g_quadrature(t, model, cfg)


def g_asymptotic_slope(model: SnmModel, cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
    """``lim g(t)/t = 1 - phi(-1)``."""
    return model.volume.one_minus_mgf(-1.0, cfg)


def eviction_time_che(C: float, model: SnmModel, cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
    """Characteristic time ``t_C = g^{-1}(C / lam)``.

    The bracket starts at ``C / (lam E[Z])``, a lower bound since
    ``g(t) <= E[Z] t``, and doubles until ``lam g`` exceeds ``C``; Brent's
    method then refines inside it.
    """
    if not C > 0:
        raise ModelError("cache size must be > 0")
    slope = g_asymptotic_slope(model, cfg)
    if not slope > 0:
        raise ModelError("degenerate model: 1 - phi(-1) = 0, g is bounded")
    target = C / model.lam

    def resid(t):
        return expected_distinct_g(t, model, cfg) - target

    lo = 0.0
    hi = target / model.volume.mean
    cap = cfg.truncation_horizon_factor * max(model.lifespan, target / slope)
    while resid(hi) < 0:
        lo, hi = hi, 2.0 * hi
        if hi > cap:
            raise ModelError(f"could not bracket t_C for C={C:g}")
    if resid(hi) == 0:
        return hi
    return brentq(resid, lo, hi, xtol=1e-300, rtol=max(cfg.root_rel_tol / 8, 1e-15), maxiter=500)


# ---------------------------------------------------------------------------
# in / hit probabilities


def in_prob_che(age: float, z: float, theta: float, model: SnmModel) -> float:
    """Probability a content of the given age and volume had a request in the last ``theta``."""
    if not theta > 0:
        raise ModelError("theta must be > 0")
    H = model.profile.cumulative
    mass = z * (H(age) - H(age - theta))
    return -math.expm1(-mass)


def hit_prob_quadrature(theta: float, model: SnmModel, cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
    """``1 - E[Z]^{-1} int_0^inf h(u) phi'(-(H(u) - H(u - theta))) du`` by nested quadrature."""
    if theta <= 0:
        return 0.0
    prof, vol = model.profile, model.volume
    h, H = prof.density, prof.cumulative
    bps = list(prof.breakpoints) + [b + theta for b in prof.breakpoints]
    val = integrate(lambda u: h(u) * vol.mgf_deriv(H(u - theta) - H(u), cfg), 0.0, prof.support_end, cfg, bps)
    return min(1.0, max(0.0, 1.0 - val / vol.mean))


def hit_prob_rect_closed(theta: float, L: float, volume: VolumeSpec, cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
    """Rectangular-profile reduction: ``1 - [(1 - phi(-c)) + (1 - c) phi'(-c)] / E[Z]``, ``c = min(theta, L)/L``."""
    if theta <= 0:
        return 0.0
    c = min(theta, L) / L
    miss = volume.one_minus_mgf(-c, cfg) + (1.0 - c) * volume.mgf_deriv(-c, cfg)
    return min(1.0, max(0.0, 1.0 - miss / volume.mean))


def hit_prob_che(theta: float, model: SnmModel, cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
    """Hit probability when every content is kept exactly ``theta`` after its last request."""
    if isinstance(model.profile, RectangularProfile):
        return hit_prob_rect_closed(theta, model.profile.lifespan, model.volume, cfg)
    return hit_prob_quadrature(theta, model, cfg)


# ---------------------------------------------------------------------------
# error bound and large deviations


def chernoff_r(x):
    """``R(x) = 1 - x + x log x``, written as ``(1+y) log1p(y) - y`` with ``y = x - 1``."""
    if np.ndim(x) == 0:
        if x == 0:
            return 1.0
        y = x - 1.0
        return (1.0 + y) * math.log1p(y) - y
    x = np.asarray(x, dtype=float)
    y = x - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (1.0 + y) * np.log1p(y) - y
    return np.where(x == 0, 1.0, out)


def _poisson_tail_term(mean: float, C: float) -> float:
    return math.exp(-mean * chernoff_r(C / mean))


def che_error_bound_at(C: float, delta: float, model: SnmModel, cfg: NumericsConfig = DEFAULT_NUMERICS, t_c: float | None = None) -> float:
    """Non-asymptotic bound on ``|p_hit - p_hit_che(t_C)|`` for one ``delta``."""
    if not 0 < delta < 1:
        raise ModelError("delta must lie in (0, 1)")
    if t_c is None:
        t_c = eviction_time_che(C, model, cfg)
    t_lo, t_hi = t_c * (1.0 - delta), t_c * (1.0 + delta)
    m_lo = model.lam * expected_distinct_g(t_lo, model, cfg)
    m_hi = model.lam * expected_distinct_g(t_hi, model, cfg)
    p0 = hit_prob_che(t_c, model, cfg)
    spread = max(abs(hit_prob_che(t_lo, model, cfg) - p0), abs(hit_prob_che(t_hi, model, cfg) - p0))
    return _poisson_tail_term(m_lo, C) + _poisson_tail_term(m_hi, C) + spread


def che_error_bound(
    C: float,
    delta: float | None,
    model: SnmModel,
    cfg: NumericsConfig = DEFAULT_NUMERICS,
    t_c: float | None = None,
    grid=DELTA_GRID,
) -> tuple[float, float]:
    """Error bound and the ``delta`` that produced it.

    With ``delta=None`` the bound is minimised over ``grid`` (first minimiser
    wins on ties).
    """
    if not C > 0:
        raise ModelError("cache size must be > 0")
    if t_c is None:
        t_c = eviction_time_che(C, model, cfg)
    if delta is not None:
        return che_error_bound_at(C, delta, model, cfg, t_c), float(delta)
    best, best_d = math.inf, float(grid[0])
    for d in grid:
        b = che_error_bound_at(C, float(d), model, cfg, t_c)
        if b < best:
            best, best_d = b, float(d)
    return best, best_d


def rate_function(x, ctx: RateFunctionCtx):
    """``I(x) = lam x - 1 - log(lam x)``, ``I(0) = inf``."""
    if np.ndim(x) == 0:
        if x < 0:
            raise ValueError("rate function is defined on x >= 0")
        if x == 0:
            return math.inf
        y = ctx.lam * x - 1.0
        return y - math.log1p(y)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("rate function is defined on x >= 0")
    y = ctx.lam * x - 1.0
    with np.errstate(divide="ignore"):
        return np.where(x == 0, np.inf, y - np.log1p(y))


def ld_deviation_exponents(C: float, delta: float, model: SnmModel, cfg: NumericsConfig = DEFAULT_NUMERICS, t_c: float | None = None) -> tuple[float, float]:
    """Exponents ``C I(g(t_C(1 +/- delta))/C)`` of ``P(T_C > t_C(1+delta))`` and ``P(T_C <= t_C(1-delta))``."""
    if not 0 < delta < 1:
        raise ModelError("delta must lie in (0, 1)")
    if t_c is None:
        t_c = eviction_time_che(C, model, cfg)
    ctx = RateFunctionCtx(model.lam)
    upper = C * rate_function(expected_distinct_g(t_c * (1 + delta), model, cfg) / C, ctx)
    lower = C * rate_function(expected_distinct_g(t_c * (1 - delta), model, cfg) / C, ctx)
    return float(upper), float(lower)


# ---------------------------------------------------------------------------
# normal approximation


def clt_scale(x: float, model: SnmModel, cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
    """Fluctuation scale ``f(x) = sqrt(x / (lam (1 - phi(-1))))`` of ``T_C`` around ``t_C``."""
    slope = g_asymptotic_slope(model, cfg)
    if not slope > 0:
        raise ModelError("degenerate model: phi(-1) = 1")
    return math.sqrt(x / (model.lam * slope))


def normal_approx_bounds(t: float, model: SnmModel, cfg: NumericsConfig = DEFAULT_NUMERICS) -> tuple[float, float]:
    """Wasserstein bound ``1/sqrt(lam g(t))`` and the implied Kolmogorov bound ``2 sqrt(W)``."""
    if not t > 0:
        raise ModelError("t must be > 0")
    w = 1.0 / math.sqrt(model.lam * expected_distinct_g(t, model, cfg))
    return w, 2.0 * math.sqrt(w)


def che_curve_point(C: float, model: SnmModel, cfg: NumericsConfig = DEFAULT_NUMERICS, delta: float | None = None, grid=DELTA_GRID) -> CheCurvePoint:
    t_c = eviction_time_che(C, model, cfg)
    p = hit_prob_che(t_c, model, cfg)
    bound, d = che_error_bound(C, delta, model, cfg, t_c=t_c, grid=grid)
    w, k = normal_approx_bounds(t_c, model, cfg)
    return CheCurvePoint(float(C), t_c, p, bound, d, w, k)


def convergence_check(C: float, model: SnmModel, cfg: NumericsConfig = DEFAULT_NUMERICS, t_c: float | None = None) -> dict:
    """Cross-path discrepancies at ``t_C``: dispatching vs general quadrature routes.

    Returns relative differences for ``lam g(t_C)`` against ``C`` (using the
    general quadrature) and for the hit probability.
    """
    if t_c is None:
        t_c = eviction_time_che(C, model, cfg)
    gq = g_quadrature(t_c, model, cfg)
    pq = hit_prob_quadrature(t_c, model, cfg)
    p = hit_prob_che(t_c, model, cfg)
    return {
        "g_rel": abs(model.lam * gq - C) / C,
        "p_rel": abs(pq - p) / max(abs(p), 1e-300),
    }


__all__ = [
    "CheCurvePoint",
    "RateFunctionCtx",
    "g_rect_closed",
    "g_quadrature",
    "expected_distinct_g",
    "g_asymptotic_slope",
    "eviction_time_che",
    "in_prob_che",
    "hit_prob_quadrature",
    "hit_prob_rect_closed",
    "hit_prob_che",
    "chernoff_r",
    "che_error_bound_at",
    "che_error_bound",
    "rate_function",
    "ld_deviation_exponents",
    "clt_scale",
    "normal_approx_bounds",
    "che_curve_point",
    "convergence_check",
]
