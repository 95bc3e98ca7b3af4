"""Experiment runners and deterministic CSV/JSON artifact writers.

Each runner returns an :class:`Artifact`; nothing time- or host-dependent
goes into it, so identical config and seeds give byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import norm

from . import __version__
from .analytics import (
    RateFunctionCtx,
    che_curve_point,
    clt_scale,
    eviction_time_che,
    expected_distinct_g,
    g_quadrature,
    g_rect_closed,
    rate_function,
)
from .config import ExperimentConfig
from .errors import ConfigError, NumericsError
from .model import RectangularProfile
from .simulation import TraceConfig, ks_statistic, sample_eviction_times, simulate_hit_curve
from .tandem import TandemQuery, tandem_bounds, tandem_hit_mc

COLUMNS = {
    "g-curve": ["t", "g_closed", "g_quadrature", "rel_diff"],
    "hit-curve": ["C", "t_C", "p_hit_che", "err_bound", "delta_star", "wasserstein", "kolmogorov"],
    "eviction-dist": ["sample_index", "T_C"],
    "tandem": ["t_C1", "t_C2", "k", "lower", "upper"],
}
DEFAULT_MC_SAMPLES = 100_000


@dataclass
class Artifact:
    name: str
    columns: list
    rows: list
    meta: dict
    summary: dict | None = None
    extra: dict = field(default_factory=dict)


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    return format(float(v), ".12g")


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        # same rounding as the CSV; non-finite values become null
        return float(format(f, ".12g")) if math.isfinite(f) else None
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def metadata(cfg: ExperimentConfig, name: str) -> dict:
    return {
        "tool": "snmcache",
        "tool_version": __version__,
        "experiment": name,
        "config_hash": cfg.config_hash(),
        "seeds": [int(s) for s in cfg.experiment.seeds],
    }


def write_artifact(art: Artifact, out_dir) -> list[Path]:
    """Write ``<name>.csv`` (with ``#`` metadata lines) and its ``<name>.json`` mirror."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    for k, v in art.meta.items():
        buf.write(f"# {k}: {json.dumps(v) if isinstance(v, list) else v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(art.columns)
    w.writerows([fmt(v) if not isinstance(v, str) else v for v in row] for row in art.rows)
    csv_path = out / f"{art.name}.csv"
    csv_path.write_text(buf.getvalue())
    doc = {"meta": art.meta, "columns": art.columns, "rows": _jsonable(art.rows)}
    if art.summary is not None:
        doc["summary"] = _jsonable(art.summary)
    doc.update(_jsonable(art.extra))
    json_path = out / f"{art.name}.json"
    json_path.write_text(json.dumps(doc, indent=1, sort_keys=False) + "\n")
    paths = [csv_path, json_path]
    if art.summary is not None:
        side = out / f"{art.name}.summary.json"
        side.write_text(json.dumps({"meta": art.meta, **_jsonable(art.summary)}, indent=1) + "\n")
        paths.append(side)
    return paths


def read_artifact_hash(path) -> str | None:
    for line in Path(path).read_text().splitlines():
        if not line.startswith("#"):
            break
        if line.startswith("# config_hash:"):
            return line.split(":", 1)[1].strip()
    return None


def _delta_grid(cfg: ExperimentConfig):
    e = cfg.experiment
    return np.geomspace(e.delta_min, e.delta_max, e.delta_points)


def _with_context(exc: NumericsError, where: str) -> NumericsError:
    new = NumericsError(f"{where}: {exc}", partial=exc.partial, abserr=exc.abserr)
    return new


# ---------------------------------------------------------------------------
# runners


def run_g_curve(cfg: ExperimentConfig) -> Artifact:
    model, num = cfg.model, cfg.numerics
    if not isinstance(model.profile, RectangularProfile):
        raise ConfigError("model.profile", "g-curve compares against the rectangular closed form")
    rows = []
    for t in cfg.experiment.t_grid:
        try:
            gc = g_rect_closed(t, model.profile.lifespan, model.volume, num)
            gq = g_quadrature(t, model, num)
        except NumericsError as exc:
            raise _with_context(exc, f"t={t:g}") from None
        rows.append((float(t), gc, gq, abs(gc - gq) / gq))
    return Artifact("g-curve", list(COLUMNS["g-curve"]), rows, metadata(cfg, "g-curve"))


def run_hit_curve(cfg: ExperimentConfig, jobs: int = 1) -> Artifact:
    e, model, num = cfg.experiment, cfg.model, cfg.numerics
    grid = _delta_grid(cfg)
    points = []
    for C in e.cache_sizes:
        try:
            points.append(che_curve_point(C, model, num, delta=e.delta, grid=grid))
        except NumericsError as exc:
            raise _with_context(exc, f"C={C:g}") from None
    columns = list(COLUMNS["hit-curve"])
    rows = [
        [int(p.cache_size) if float(p.cache_size).is_integer() else p.cache_size,
         p.t_c, p.p_hit_che, p.err_bound, p.delta_star, p.wasserstein, p.kolmogorov]
        for p in points
    ]
    if e.simulate:
        if any(not float(C).is_integer() for C in e.cache_sizes):
            raise ConfigError("experiment.cache_sizes", "simulation needs integer cache sizes")
        tc = TraceConfig(0.0, e.warmup + e.window, e.warmup, cfg.seed)
        sims = simulate_hit_curve(model, tc, [int(C) for C in e.cache_sizes], e.replications, jobs)
        columns += ["sim_hit_ratio", "sim_stderr"]
        for row, s in zip(rows, sims):
            row += [s.hit_ratio, s.std_err]
    return Artifact("hit-curve", columns, [tuple(r) for r in rows], metadata(cfg, "hit-curve"))


def eviction_summary(samples: np.ndarray, C: float, cfg: ExperimentConfig) -> dict:
    """LLN ratio, CLT KS distance, and empirical vs predicted upper-tail LD exponent."""
    model, num, delta = cfg.model, cfg.numerics, cfg.experiment.ld_delta
    t_c = eviction_time_che(C, model, num)
    f = clt_scale(t_c, model, num)
    thr = t_c * (1.0 + delta)
    exceed = int(np.count_nonzero(samples > thr))
    p_hat = exceed / samples.size
    theory = float(rate_function(expected_distinct_g(thr, model, num) / C, RateFunctionCtx(model.lam)))
    return {
        "C": C,
        "t_C": t_c,
        "samples": int(samples.size),
        "mean_ratio": float(np.mean(samples / t_c)),
        "ks_clt": ks_statistic((samples - t_c) / f, norm.cdf),
        "ld_delta": delta,
        "ld_exceedances": exceed,
        "ld_upper_emp": -math.log(p_hat) / C if exceed else math.inf,
        "ld_upper_theory": theory,
    }


def run_eviction_dist(cfg: ExperimentConfig, jobs: int = 1) -> Artifact:
    e = cfg.experiment
    if len(e.cache_sizes) != 1 or not float(e.cache_sizes[0]).is_integer():
        raise ConfigError("experiment.cache_sizes", "eviction-dist takes exactly one integer cache size")
    C = int(e.cache_sizes[0])
    samples = sample_eviction_times(C, cfg.model, e.samples, cfg.seed, jobs=jobs)
    rows = [(i, float(x)) for i, x in enumerate(samples)]
    return Artifact(
        "eviction-dist", list(COLUMNS["eviction-dist"]), rows, metadata(cfg, "eviction-dist"),
        summary=eviction_summary(samples, C, cfg),
    )


def run_tandem(cfg: ExperimentConfig, simulate: bool | None = None) -> Artifact:
    e, tb = cfg.experiment, cfg.experiment.tandem
    simulate = e.simulate if simulate is None else simulate
    n_mc = tb.mc_samples or (DEFAULT_MC_SAMPLES if simulate else 0)
    columns = list(COLUMNS["tandem"]) + (["mc_estimate", "mc_stderr"] if n_mc else [])
    rows = []
    index = 0
    for t1 in tb.t_c1:
        for t2 in tb.t_c2:
            q = TandemQuery(tb.age, tb.volume, float(t1), float(t2))
            try:
                b = tandem_bounds(q, cfg.model.profile, cfg.numerics)
            except NumericsError as exc:
                raise _with_context(exc, f"t_C1={t1:g}, t_C2={t2:g}") from None
            row = [float(t1), float(t2), b.k, b.lower, b.upper]
            if n_mc:
                seed = int(np.random.SeedSequence([cfg.seed, index]).generate_state(1)[0])
                row += list(tandem_hit_mc(q, cfg.model.profile, n_mc, seed))
            rows.append(tuple(row))
            index += 1
    return Artifact("tandem", columns, rows, metadata(cfg, "tandem"))
