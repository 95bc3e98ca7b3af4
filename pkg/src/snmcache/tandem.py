"""Second-cache hit probability for two LRU caches in series under Che's approximation.

A request at time ``t`` for a content of age ``tau`` hits cache 2 iff it
misses cache 1 (no request in the last ``t_C1``) and some earlier request in
``(tau - t_C2, tau - t_C1]`` was itself a cache-1 miss (gap to its
predecessor above ``t_C1``), i.e. it was inserted in cache 2 recently enough.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import ModelError
from .model import ProfileSpec, SnmModel
from .numerics import DEFAULT_NUMERICS, NumericsConfig, integrate
from .simulation import stream


@dataclass(frozen=True)
class TandemQuery:
    age: float
    volume: float
    t_c1: float
    t_c2: float

    def __post_init__(self):
        if not (self.t_c1 > 0 and self.t_c2 > 0):
            raise ModelError("characteristic times must be > 0")
        if not self.volume > 0:
            raise ModelError("volume must be > 0")


@dataclass(frozen=True)
class TandemBounds:
    k: int
    lower: float
    upper: float

    @property
    def exact(self) -> bool:
        return self.k <= 1


def tandem_k(t_c1: float, t_c2: float) -> int:
    """0 when ``t_c2 <= t_c1``, else the integer ``k`` with ``k t_c1 < t_c2 <= (k+1) t_c1``."""
    if not (t_c1 > 0 and t_c2 > 0):
        raise ModelError("characteristic times must be > 0")
    if t_c2 <= t_c1:
        return 0
    k = max(1, math.ceil(t_c2 / t_c1) - 1)
    # guard the float division at cell edges
    while k * t_c1 >= t_c2:
        k -= 1
    while (k + 1) * t_c1 < t_c2:
        k += 1
    return k


def tandem_cells(q: TandemQuery) -> list[tuple[float, float]]:
    """The ``k`` equal cells partitioning ``(age - t_c2, age - t_c1]`` in age coordinates."""
    k = tandem_k(q.t_c1, q.t_c2)
    if k == 0:
        return []
    start = q.age - q.t_c2
    width = (q.t_c2 - q.t_c1) / k
    edges = [start + i * width for i in range(k)] + [q.age - q.t_c1]
    return list(zip(edges[:-1], edges[1:]))


def tandem_bounds(q: TandemQuery, profile: ProfileSpec, cfg: NumericsConfig = DEFAULT_NUMERICS) -> TandemBounds:
    """Bonferroni lower and union upper bound on the second-cache hit probability.

    ``upper = P(no request in the last t_C1) * min(1, sum_i P(B_i))`` and
    ``lower`` subtracts ``sum_{i<j} P(B_i) P(B_j)`` inside the bracket; both
    are equal when ``k = 1``.
    """
    k = tandem_k(q.t_c1, q.t_c2)
    if k == 0:
        return TandemBounds(0, 0.0, 0.0)
    z, t1 = q.volume, q.t_c1
    h, H = profile.density, profile.cumulative
    lead = math.exp(-z * (H(q.age) - H(q.age - t1)))

    def dens(s):
        # density of a request at age s preceded by a silent window of t_C1
        return z * h(s) * math.exp(-z * (H(s) - H(s - t1)))

    bps = list(profile.breakpoints) + [b + t1 for b in profile.breakpoints]
    cells = [integrate(dens, lo, hi, cfg, bps) for lo, hi in tandem_cells(q)]
    total = sum(cells)
    pairs = sum(a * b for a, b in combinations(cells, 2))
    # a cell is no wider than t_C1, so it holds at most one qualifying request
    # and each term is a probability; their sum can still pass 1 when k > 1
    upper = lead * min(1.0, total)
    lower = min(upper, max(0.0, lead * (total - pairs)))
    return TandemBounds(k, lower, upper)


def tandem_event(ages_sorted: np.ndarray, age: float, t_c1: float, t_c2: float) -> bool:
    """Evaluate the second-cache hit event on one content's sorted request ages (probe excluded)."""
    if t_c2 <= t_c1:
        return False
    a = ages_sorted
    if np.any((a > age - t_c1) & (a <= age)):
        return False
    gaps = np.diff(a, prepend=-np.inf)
    return bool(np.any((a > age - t_c2) & (a <= age - t_c1) & (gaps > t_c1)))


def _mc_block(q: TandemQuery, profile: ProfileSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    z = np.full(n, q.volume)
    owner, ages = profile.sample_requests(rng, z)
    order = np.lexsort((ages, owner))
    owner, ages = owner[order], ages[order]
    first = np.ones(owner.size, dtype=bool)
    first[1:] = owner[1:] != owner[:-1]
    gaps = np.where(first, np.inf, np.diff(ages, prepend=0.0))
    recent = (ages > q.age - q.t_c1) & (ages <= q.age)
    qualifying = (ages > q.age - q.t_c2) & (ages <= q.age - q.t_c1) & (gaps > q.t_c1)
    blocked = np.bincount(owner[recent], minlength=n) > 0
    found = np.bincount(owner[qualifying], minlength=n) > 0
    return found & ~blocked


def tandem_hit_mc(q: TandemQuery, profile: ProfileSpec, n: int, seed: int, block: int = 100_000) -> tuple[float, float]:
    """Monte-Carlo estimate of the second-cache hit probability and its standard error.

    Each replication draws the content's whole request process from its
    profile; the probe request itself is not part of the sample.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if q.t_c2 <= q.t_c1:
        return 0.0, 0.0
    hits, done, b = 0, 0, 0
    while done < n:
        m = min(block, n - done)
        hits += int(_mc_block(q, profile, m, stream(seed, b)).sum())
        done += m
        b += 1
    p = hits / n
    return p, math.sqrt(p * (1.0 - p) / n)


def tandem_hit_aggregate(model: SnmModel, t_c1: float, t_c2: float, cfg: NumericsConfig = DEFAULT_NUMERICS) -> tuple[float, float]:
    """Request-weighted average of the per-content bounds over age and volume.

    Weight of (age ``u``, volume ``z``) is ``z h(u)``, normalised by ``E[Z]``.
    """
    if tandem_k(t_c1, t_c2) == 0:
        return 0.0, 0.0
    prof, vol = model.profile, model.volume
    memo: dict = {}

    def bounds(u, z):
        key = (u, z)
        if key not in memo:
            memo[key] = tandem_bounds(TandemQuery(u, z, t_c1, t_c2), prof, cfg)
        return memo[key]

    def averaged(which):
        def over_age(u):
            hu = prof.density(u)
            if hu == 0.0:
                return 0.0
            return hu * vol.expect(lambda z: z * getattr(bounds(u, z), which), cfg) / vol.mean

        bps = sorted({b + s for b in prof.breakpoints for s in (0.0, t_c1, t_c2)})
        return integrate(over_age, 0.0, prof.support_end, cfg, bps)

    return averaged("lower"), averaged("upper")
