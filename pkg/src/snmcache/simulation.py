"""Monte-Carlo ground truth: SNM trace generation, exact LRU, eviction times.

Every replication or sample ``i`` draws from its own stream
``default_rng(SeedSequence([seed, i]))`` so results do not depend on how the
work is split across processes.
"""
from __future__ import annotations

import math
from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DegenerateInputError, ModelError, NumericsError
from .model import SnmModel


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent generator for replication ``index`` under ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), int(index)]))


def pool_map(fn: Callable, items: Iterable, jobs: int = 1) -> list:
    """Ordered map, optionally over a process pool."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


# ---------------------------------------------------------------------------
# traces


@dataclass(frozen=True)
class TraceConfig:
    window_start: float
    window_end: float
    warmup_end: float
    seed: int = 0
    replication: int = 0

    def __post_init__(self):
        if not self.window_start <= self.warmup_end <= self.window_end:
            raise ValueError("need window_start <= warmup_end <= window_end")


@dataclass(frozen=True)
class RequestTrace:
    """Time-sorted request events plus the entry time and volume of each content.

    ``content_id`` indexes ``entry_times`` / ``volumes``.
    """

    times: np.ndarray
    content_ids: np.ndarray
    entry_times: np.ndarray
    volumes: np.ndarray
    config: TraceConfig

    def __len__(self):
        return int(self.times.size)


def _first_per_owner(owner: np.ndarray, times: np.ndarray):
    """Earliest time per owner; returns ``(owners, first_times)``."""
    order = np.lexsort((times, owner))
    o, t = owner[order], times[order]
    uniq, idx = np.unique(o, return_index=True)
    return uniq, t[idx]


def _contents(model: SnmModel, rng: np.random.Generator, lo: float, hi: float):
    n = rng.poisson(model.lam * (hi - lo))
    xi = np.sort(rng.uniform(lo, hi, n))
    z = np.asarray(model.volume.sample(rng, n), dtype=float)
    owner, ages = model.profile.sample_requests(rng, z)
    return xi, z, owner, xi[owner] + ages


def generate_trace(model: SnmModel, config: TraceConfig) -> RequestTrace:
    """Stationary SNM requests falling in ``[window_start, window_end]``.

    Contents are seeded from ``window_start - lifespan`` so the window already
    sees the stationary regime.
    """
    empty = np.empty(0)
    if config.window_end == config.window_start:
        return RequestTrace(empty, np.empty(0, dtype=np.int64), empty, empty, config)
    if config.warmup_end - config.window_start < model.lifespan:
        raise ModelError("warm-up shorter than one profile lifespan")
    rng = stream(config.seed, config.replication)
    xi, z, owner, times = _contents(model, rng, config.window_start - model.lifespan, config.window_end)
    keep = (times >= config.window_start) & (times <= config.window_end)
    times, ids = times[keep], owner[keep].astype(np.int64)
    order = np.lexsort((ids, times))
    return RequestTrace(times[order], ids[order], xi, z, config)


def write_trace_csv(trace: RequestTrace, path) -> None:
    lines = ["time,content_id"]
    lines += [f"{t:.9f},{c}" for t, c in zip(trace.times.tolist(), trace.content_ids.tolist())]
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# LRU engine


class LRUCache:
    """Exact LRU over hashable ids; ``request`` returns True on a hit."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = int(capacity)
        self._d: OrderedDict = OrderedDict()

    def request(self, key) -> bool:
        d = self._d
        if key in d:
            d.move_to_end(key)
            return True
        d[key] = None
        if len(d) > self.capacity:
            d.popitem(last=False)
        return False

    def __contains__(self, key):
        return key in self._d

    def __len__(self):
        return len(self._d)

    def recency(self) -> list:
        """Cached ids, most recently used first."""
        return list(reversed(self._d))


@dataclass(frozen=True)
class SimResult:
    requests: int
    hits: int
    hit_ratio: float
    std_err: float = math.nan
    replications: int = 1
    per_replication: tuple = field(default=(), repr=False)


def _run_lru(ids: list, times: list, capacity: int, warmup_end: float) -> tuple[int, int]:
    d: OrderedDict = OrderedDict()
    hits = requests = 0
    for t, key in zip(times, ids):
        if key in d:
            d.move_to_end(key)
            hit = True
        else:
            d[key] = None
            if len(d) > capacity:
                d.popitem(last=False)
            hit = False
        if t >= warmup_end:
            requests += 1
            hits += hit
    return requests, hits


def simulate_lru(trace: RequestTrace, C: int) -> SimResult:
    """Replay ``trace`` through an LRU cache of ``C`` slots; only post-warm-up requests count."""
    if C < 1:
        raise ValueError("cache size must be >= 1")
    requests, hits = _run_lru(trace.content_ids.tolist(), trace.times.tolist(), int(C), trace.config.warmup_end)
    if requests == 0:
        raise DegenerateInputError("no requests after warm-up")
    return SimResult(requests, hits, hits / requests)


def simulate_tandem_lru(trace: RequestTrace, C1: int, C2: int) -> SimResult:
    """Two LRU caches in series; reports the second cache's hit ratio on the first's misses.

    Diagnostic only: no analytical claim is attached to this number.
    """
    first, second = LRUCache(C1), LRUCache(C2)
    requests = hits = 0
    warm = trace.config.warmup_end
    for t, key in zip(trace.times.tolist(), trace.content_ids.tolist()):
        if first.request(key):
            continue
        hit = second.request(key)
        if t >= warm:
            requests += 1
            hits += hit
    if requests == 0:
        raise DegenerateInputError("no first-cache misses after warm-up")
    return SimResult(requests, hits, hits / requests)


def _pooled(results: Sequence[SimResult]) -> SimResult:
    requests = sum(r.requests for r in results)
    hits = sum(r.hits for r in results)
    ratios = np.array([r.hit_ratio for r in results])
    se = float(ratios.std(ddof=1) / math.sqrt(len(ratios))) if len(ratios) > 1 else math.nan
    return SimResult(requests, hits, hits / requests, se, len(results), tuple(results))


def _replicate_curve(rep: int, model, config, sizes):
    trace = generate_trace(model, TraceConfig(config.window_start, config.window_end, config.warmup_end, config.seed, rep))
    return [simulate_lru(trace, C) for C in sizes]


def simulate_hit_curve(model: SnmModel, config: TraceConfig, cache_sizes: Sequence[int], replications: int, jobs: int = 1) -> list[SimResult]:
    """Pooled hit ratios for each cache size; all sizes share each replication's trace."""
    fn = partial(_replicate_curve, model=model, config=config, sizes=[int(c) for c in cache_sizes])
    per_rep = pool_map(fn, range(replications), jobs)
    return [_pooled([rep[j] for rep in per_rep]) for j in range(len(cache_sizes))]


# ---------------------------------------------------------------------------
# eviction times and distinct counts


def _one_eviction_time(index: int, C: int, model: SnmModel, seed: int, max_horizon: float) -> float:
    rng = stream(seed, index)
    lo = -model.lifespan
    # g(t) <= E[Z] t, so T_C is rarely much below this
    hi = max(C / (model.lam * model.volume.mean), 1e-3 * model.lifespan)
    firsts = []
    while True:
        _, _, owner, times = _contents(model, rng, lo, hi)
        mask = times >= 0.0
        if mask.any():
            firsts.append(_first_per_owner(owner[mask], times[mask])[1])
        n = sum(f.size for f in firsts)
        if n >= C:
            kth = float(np.partition(np.concatenate(firsts), C - 1)[C - 1])
            # contents entering after hi cannot be requested before hi
            if kth <= hi:
                return kth
        lo, hi = hi, 2.0 * hi
        if hi > max_horizon:
            raise NumericsError(f"eviction time for C={C} exceeded horizon {max_horizon:g}")


def sample_eviction_times(C: int, model: SnmModel, n: int, seed: int, max_horizon: float | None = None, jobs: int = 1) -> np.ndarray:
    """``n`` independent draws of the time until ``C`` distinct (untagged) contents are requested.

    The tagged content is never generated, so it cannot be counted. Each
    draw extends one realisation over a doubling horizon; the ``C``-th
    smallest first-request time is final once it lies below the horizon.
    """
    if C < 1 or n < 1:
        raise ValueError("need C >= 1 and n >= 1")
    if max_horizon is None:
        max_horizon = 1e3 * max(model.lifespan, C / model.lam)
    fn = partial(_one_eviction_time, C=int(C), model=model, seed=seed, max_horizon=max_horizon)
    return np.array(pool_map(fn, range(n), jobs))


def _distinct_block(index: int, model: SnmModel, t: float, seed: int) -> int:
    rng = stream(seed, index)
    _, _, owner, times = _contents(model, rng, -model.lifespan, t)
    inside = (times >= 0.0) & (times <= t)
    return int(np.unique(owner[inside]).size)


def empirical_distinct_count(model: SnmModel, t: float, replications: int, seed: int, jobs: int = 1) -> np.ndarray:
    """Per replication, the number of distinct contents requested in ``[0, t]``."""
    if not t > 0:
        raise ValueError("t must be > 0")
    fn = partial(_distinct_block, model=model, t=float(t), seed=seed)
    return np.array(pool_map(fn, range(replications), jobs), dtype=np.int64)


def ks_statistic(samples, cdf: Callable) -> float:
    """Sup-distance between the empirical CDF of ``samples`` and ``cdf``."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("ks_statistic needs at least one sample")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
