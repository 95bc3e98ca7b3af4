"""Shot-noise traffic model: popularity profiles, content volumes, catalogue rate.

A content entering the catalogue at time ``xi`` with volume ``z`` is requested
as an inhomogeneous Poisson process with intensity ``z * h(t - xi)``; the
entry times form a homogeneous Poisson process of rate ``lam``.
"""
from __future__ import annotations

import bisect
import functools
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import ModelError
from .numerics import DEFAULT_NUMERICS, NumericsConfig, integrate

_MASS_TOL = 1e-6


def _is_scalar(t) -> bool:
    return isinstance(t, (int, float, np.floating, np.integer))


# ---------------------------------------------------------------------------
# popularity profiles


@dataclass(frozen=True)
class RectangularProfile:
    """Uniform popularity over the lifespan: ``h(t) = 1/L`` on ``[0, L]``."""

    lifespan: float
    kind = "rectangular"
    multiplicative = True

    def __post_init__(self):
        if not (self.lifespan > 0 and math.isfinite(self.lifespan)):
            raise ModelError("rectangular lifespan must be a finite positive number")

    @property
    def support_end(self) -> float:
        return float(self.lifespan)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return (0.0, float(self.lifespan))

    def density(self, t):
        L = self.lifespan
        if _is_scalar(t):
            return 1.0 / L if 0.0 <= t <= L else 0.0
        t = np.asarray(t, dtype=float)
        return np.where((t >= 0.0) & (t <= L), 1.0 / L, 0.0)

    def cumulative(self, t):
        L = self.lifespan
        if _is_scalar(t):
            return 0.0 if t <= 0.0 else (1.0 if t >= L else t / L)
        return np.clip(np.asarray(t, dtype=float) / L, 0.0, 1.0)

    def sample_requests(self, rng: np.random.Generator, volumes: np.ndarray):
        """Request ages for contents with the given volumes.

        Returns ``(owner, ages)``: ``owner[j]`` indexes ``volumes`` and
        ``ages[j]`` is the time since entry of request ``j``.
        """
        counts = rng.poisson(volumes)
        owner = np.repeat(np.arange(len(volumes)), counts)
        ages = rng.uniform(0.0, self.lifespan, owner.size)
        return owner, ages

    def to_dict(self) -> dict:
        return {"kind": self.kind, "lifespan": float(self.lifespan)}


@dataclass(frozen=True)
class TabulatedProfile:
    """Piecewise-linear profile through ``(times[i], values[i])``, zero outside.

    The grid must start at ``t = 0`` and the trapezoidal mass must equal one;
    use :meth:`normalized` to rescale an arbitrary nonnegative shape.
    """

    times: tuple[float, ...]
    values: tuple[float, ...]
    kind = "tabulated"
    multiplicative = True

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.size < 2 or t.size != v.size:
            raise ModelError("tabulated profile needs >= 2 matching (t, h) pairs")
        if t[0] != 0.0:
            raise ModelError("tabulated profile grid must start at t = 0")
        if np.any(np.diff(t) <= 0) or not np.all(np.isfinite(t)):
            raise ModelError("tabulated profile grid must be strictly increasing")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ModelError("tabulated profile values must be finite and >= 0")
        seg = 0.5 * (v[1:] + v[:-1]) * np.diff(t)
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        if abs(cum[-1] - 1.0) > _MASS_TOL:
            raise ModelError(f"tabulated profile mass is {cum[-1]:.9g}, expected 1")
        object.__setattr__(self, "times", tuple(float(x) for x in t))
        object.__setattr__(self, "values", tuple(float(x) for x in v))
        object.__setattr__(self, "_t", t)
        object.__setattr__(self, "_v", v)
        object.__setattr__(self, "_cum", cum / cum[-1])

    @classmethod
    def normalized(cls, times, values) -> "TabulatedProfile":
        t = np.asarray(times, dtype=float)
        v = np.asarray(values, dtype=float)
        mass = float(np.sum(0.5 * (v[1:] + v[:-1]) * np.diff(t)))
        if not mass > 0:
            raise ModelError("tabulated profile has zero mass")
        return cls(tuple(t), tuple(v / mass))

    @property
    def support_end(self) -> float:
        return self.times[-1]

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self.times

    def density(self, t):
        if _is_scalar(t):
            if t < 0.0 or t > self.times[-1]:
                return 0.0
            return float(np.interp(t, self._t, self._v))
        t = np.asarray(t, dtype=float)
        out = np.interp(t, self._t, self._v)
        return np.where((t >= 0.0) & (t <= self.times[-1]), out, 0.0)

    def _cum_scalar(self, t: float) -> float:
        ts = self.times
        if t <= 0.0:
            return 0.0
        if t >= ts[-1]:
            return 1.0
        j = bisect.bisect_right(ts, t) - 1
        dt = t - ts[j]
        width = ts[j + 1] - ts[j]
        v0, v1 = self.values[j], self.values[j + 1]
        return float(self._cum[j] + v0 * dt + 0.5 * (v1 - v0) * dt * dt / width)

    def cumulative(self, t):
        if _is_scalar(t):
            return self._cum_scalar(float(t))
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, 0.0, self.times[-1])
        j = np.clip(np.searchsorted(self._t, tc, side="right") - 1, 0, self._t.size - 2)
        dt = tc - self._t[j]
        width = self._t[j + 1] - self._t[j]
        v0, v1 = self._v[j], self._v[j + 1]
        out = self._cum[j] + v0 * dt + 0.5 * (v1 - v0) * dt * dt / width
        return np.clip(out, 0.0, 1.0)

    def sample_requests(self, rng: np.random.Generator, volumes: np.ndarray):
        # thinning against the constant envelope max(h) on the support
        hmax = float(self._v.max())
        span = self.times[-1]
        counts = rng.poisson(np.asarray(volumes) * hmax * span)
        owner = np.repeat(np.arange(len(volumes)), counts)
        ages = rng.uniform(0.0, span, owner.size)
        keep = rng.uniform(0.0, hmax, owner.size) < self.density(ages)
        return owner[keep], ages[keep]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "times": list(self.times), "values": list(self.values)}


ProfileSpec = Union[RectangularProfile, TabulatedProfile]


# ---------------------------------------------------------------------------
# content volumes


@dataclass(frozen=True)
class DeterministicVolume:
    value: float
    kind = "deterministic"

    def __post_init__(self):
        if not (self.value > 0 and math.isfinite(self.value)):
            raise ModelError("deterministic volume must be a finite positive number")

    @property
    def mean(self) -> float:
        return float(self.value)

    @property
    def lower_bound(self) -> float:
        return float(self.value)

    def mgf(self, theta: float, cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
        return math.exp(theta * self.value)

    def one_minus_mgf(self, theta: float, cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
        return -math.expm1(theta * self.value)

    def mgf_deriv(self, theta: float, cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
        return self.value * math.exp(theta * self.value)

    def expect(self, fn: Callable[[float], float], cfg: NumericsConfig = DEFAULT_NUMERICS, points=None) -> float:
        return float(fn(self.value))

    def sample(self, rng: np.random.Generator, size=None):
        if size is None:
            return float(self.value)
        return np.full(size, float(self.value))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "value": float(self.value)}


@functools.lru_cache(maxsize=8192)
def _pareto_j(alpha: float, c: float, cfg: NumericsConfig) -> float:
    # J(c) = int_0^1 v**(alpha - 2) exp(-c / v) dv, the one primitive behind
    # both 1 - phi and phi' of the Pareto law (z = scale / v).
    if c == 0:
        return 1.0 / (alpha - 1.0)
    e = alpha - 2.0
    pts = [p for p in (0.1 * c, c) if 0 < p < 1]
    return integrate(lambda v: v**e * math.exp(-c / v), 0.0, 1.0, cfg, pts)


@dataclass(frozen=True)
class ParetoVolume:
    """Pareto law with density ``alpha * scale**alpha / z**(1 + alpha)`` on ``z >= scale``.

    Expectations are integrated in ``v = scale / z``, which maps the infinite
    tail onto ``(0, 1]`` with density ``alpha * v**(alpha - 1)`` and needs no
    truncation. With ``c = scale * |theta|``,
    ``phi'(theta) = alpha * scale * J(c)`` and
    ``1 - phi(theta) = 1 - exp(-c) + c * J(c)``, where
    ``J(c) = int_0^1 v**(alpha-2) exp(-c/v) dv``.
    """

    scale: float
    alpha: float
    kind = "pareto"

    def __post_init__(self):
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ModelError("pareto scale must be a finite positive number")
        if not (self.alpha > 1 and math.isfinite(self.alpha)):
            raise ModelError("pareto exponent must be > 1 (finite mean)")

    @classmethod
    def from_mean(cls, mean: float, alpha: float) -> "ParetoVolume":
        return cls(scale=mean * (alpha - 1.0) / alpha, alpha=alpha)

    @property
    def mean(self) -> float:
        return self.alpha * self.scale / (self.alpha - 1.0)

    @property
    def lower_bound(self) -> float:
        return float(self.scale)

    def _c(self, theta: float) -> float:
        if theta > 0:
            raise ModelError("Pareto MGF diverges for theta > 0")
        return -self.scale * theta

    def expect(self, fn: Callable[[float], float], cfg: NumericsConfig = DEFAULT_NUMERICS, points=None) -> float:
        a, al = self.scale, self.alpha
        return integrate(lambda v: fn(a / v) * al * v ** (al - 1.0), 0.0, 1.0, cfg, points)

    def mgf(self, theta: float, cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
        if self._c(theta) == 0:
            return 1.0
        return 1.0 - self.one_minus_mgf(theta, cfg)

    def one_minus_mgf(self, theta: float, cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
        c = self._c(theta)
        if c == 0:
            return 0.0
        return -math.expm1(-c) + c * _pareto_j(self.alpha, c, cfg)

    def mgf_deriv(self, theta: float, cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
        c = self._c(theta)
        if c == 0:
            return self.mean
        return self.alpha * self.scale * _pareto_j(self.alpha, c, cfg)

    def sample(self, rng: np.random.Generator, size=None):
        # 1 - U lies in (0, 1], keeping the sample finite
        u = 1.0 - rng.random(size)
        return self.scale * u ** (-1.0 / self.alpha)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "scale": float(self.scale), "alpha": float(self.alpha)}


VolumeSpec = Union[DeterministicVolume, ParetoVolume]


@dataclass(frozen=True)
class SnmModel:
    """Catalogue arrival rate plus the profile and volume law of every content."""

    lam: float
    profile: ProfileSpec
    volume: VolumeSpec
    time_unit: str = "day"

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ModelError("catalogue rate lambda must be a finite positive number")

    @property
    def lifespan(self) -> float:
        return self.profile.support_end

    def to_dict(self) -> dict:
        return {
            "lambda": float(self.lam),
            "time_unit": self.time_unit,
            "profile": self.profile.to_dict(),
            "volume": self.volume.to_dict(),
        }


def study_model(lam: float = 100_000.0, lifespan: float = 30.0, alpha: float = 2.0, mean: float = 3.0) -> SnmModel:
    """Rectangular profile with Pareto volumes of the given mean (the numerical-study family)."""
    return SnmModel(lam, RectangularProfile(lifespan), ParetoVolume.from_mean(mean, alpha))


def profile_from_dict(d: dict) -> ProfileSpec:
    kind = d.get("kind")
    if kind == "rectangular":
        return RectangularProfile(float(d["lifespan"]))
    if kind == "tabulated":
        return TabulatedProfile(tuple(d["times"]), tuple(d["values"]))
    raise ModelError(f"unknown profile kind {kind!r}")


def volume_from_dict(d: dict) -> VolumeSpec:
    kind = d.get("kind")
    if kind == "deterministic":
        return DeterministicVolume(float(d["value"]))
    if kind == "pareto":
        return ParetoVolume(float(d["scale"]), float(d["alpha"]))
    raise ModelError(f"unknown volume kind {kind!r}")


# ---------------------------------------------------------------------------
# functional surface


def profile_intensity(t: float, z: float, profile: ProfileSpec) -> float:
    """Request intensity ``z * h(t)`` of a content of age ``t`` and volume ``z``."""
    if not z > 0:
        raise ModelError("volume must be > 0")
    return z * profile.density(t)


def volume_mgf(theta: float, volume: VolumeSpec, cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
    """``E[exp(theta Z)]`` for ``theta <= 0``."""
    return volume.mgf(theta, cfg)


def volume_mgf_deriv(theta: float, volume: VolumeSpec, cfg: NumericsConfig = DEFAULT_NUMERICS) -> float:
    """``E[Z exp(theta Z)]`` for ``theta <= 0``."""
    return volume.mgf_deriv(theta, cfg)


def sample_volume(volume: VolumeSpec, rng: np.random.Generator, size=None):
    return volume.sample(rng, size)
