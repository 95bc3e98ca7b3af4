"""Shipped experiment configs.

Full-scale analytic curves use 100 000 new contents per day; anything that
needs simulation runs at a desk-scale rate of 100 per day. Volumes are
Pareto with mean 3 throughout, so the scale is ``3 (alpha - 1) / alpha``.
"""
from __future__ import annotations

import numpy as np

from .config import ExperimentConfig, config_from_dict

FULL_RATE = 100_000.0
DESK_RATE = 100.0
MEAN_VOLUME = 3.0


def _model(lam, lifespan, alpha):
    return {
        "lambda": lam,
        "time_unit": "day",
        "profile": {"kind": "rectangular", "lifespan": float(lifespan)},
        "volume": {"kind": "pareto", "scale": MEAN_VOLUME * (alpha - 1.0) / alpha, "alpha": float(alpha)},
    }


def full_cache_grid(n: int = 25) -> list[int]:
    """Geometric cache-size grid from 10^3 to 3 10^6, rounded and deduplicated."""
    return sorted({int(round(c)) for c in np.geomspace(1e3, 3e6, n)})


def _hit_curve(lam, lifespan, alpha, sizes, **exp):
    return {
        "model": _model(lam, lifespan, alpha),
        "experiment": {"name": "hit-curve", "cache_sizes": sizes, **exp},
    }


PRESETS: dict[str, dict] = {}

for _a in (1.5, 2.0, 3.0):
    PRESETS[f"fig1-alpha{_a:g}"] = _hit_curve(FULL_RATE, 30, _a, full_cache_grid())
for _L in (10, 30, 90):
    PRESETS[f"fig2-L{_L}"] = _hit_curve(FULL_RATE, _L, 2.0, full_cache_grid())

PRESETS["desk-hit-curve"] = _hit_curve(
    DESK_RATE, 30, 2.0, [20, 50, 100, 200], replications=20, warmup=60.0, window=240.0, simulate=True
)
PRESETS["desk-hit-monotone"] = _hit_curve(DESK_RATE, 30, 2.0, [10, 20, 50, 100, 200, 300, 500])
PRESETS["g-curve"] = {
    "model": _model(DESK_RATE, 30, 2.0),
    "experiment": {"name": "g-curve", "t_grid": [float(t) for t in range(1, 121)]},
}
PRESETS["eviction-dist"] = {
    "model": _model(DESK_RATE, 1, 2.0),
    "experiment": {"name": "eviction-dist", "cache_sizes": [1000], "samples": 5000, "ld_delta": 0.1},
}
PRESETS["tandem"] = {
    "model": {
        "lambda": 1.0,
        "time_unit": "day",
        "profile": {"kind": "rectangular", "lifespan": 1.0},
        "volume": {"kind": "deterministic", "value": 2.0},
    },
    "experiment": {
        "name": "tandem",
        "tandem": {"t_c1": [0.2, 0.4], "t_c2": [0.1, 0.5, 0.7, 0.9], "age": 0.9, "volume": 2.0, "mc_samples": 100000},
    },
}
PRESETS["validate"] = {
    "model": _model(DESK_RATE, 30, 2.0),
    "experiment": {"name": "validate", "seeds": [0]},
}


def preset(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}")
    return config_from_dict(PRESETS[name])
