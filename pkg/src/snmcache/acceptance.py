"""Acceptance criteria as plain functions, shared by the test suite and ``snmcache validate``.

Every check returns a :class:`CriterionResult`. ``scale`` multiplies the
sample/replication counts (1.0 is the acceptance setting); smaller scales are
for smoke and determinism runs and are not expected to pass.
"""
from __future__ import annotations

import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm, poisson

from .analytics import (
    RateFunctionCtx,
    che_curve_point,
    clt_scale,
    convergence_check,
    eviction_time_che,
    expected_distinct_g,
    g_quadrature,
    g_rect_closed,
    rate_function,
)
from .model import RectangularProfile, _pareto_j, study_model
from .presets import full_cache_grid
from .simulation import (
    TraceConfig,
    empirical_distinct_count,
    ks_statistic,
    sample_eviction_times,
    simulate_hit_curve,
)
from .tandem import TandemQuery, tandem_bounds, tandem_hit_mc

# wall-clock limits in seconds, checked by the test suite only
RUNTIME_LIMITS = {1: 5, 2: 120, 3: 300, 4: 600, 5: 900, 6: 600, 7: 60, 8: 300}

# desk-scale model for the eviction-time limit theorems: short lifespan so
# that t_C spans many lifespans and the stationary regime is reached
EVICTION_MODEL = dict(lam=100.0, lifespan=1.0, alpha=2.0)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    statistic: float
    threshold: str
    details: dict = field(default_factory=dict)
    elapsed: float = field(default=0.0, compare=False)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number}: {self.title} (statistic={self.statistic:.6g}, need {self.threshold})"


def _n(base: int, scale: float, floor: int = 10) -> int:
    return max(floor, int(round(base * scale)))


def criterion_1(scale: float = 1.0, seed: int = 0) -> CriterionResult:
    model = study_model(100.0, 30.0, 2.0)
    _pareto_j.cache_clear()
    worst = 0.0
    for t in range(1, 121):
        gc = g_rect_closed(float(t), 30.0, model.volume)
        gq = g_quadrature(float(t), model)
        worst = max(worst, abs(gc - gq) / gq)
    return CriterionResult(1, "g closed form vs quadrature", worst <= 1e-6, worst, "<= 1e-6", {"points": 120})


def criterion_2(scale: float = 1.0, seed: int = 0) -> CriterionResult:
    model = study_model(20.0, 30.0, 2.0)
    t = 45.0
    reps = _n(10_000, scale)
    counts = empirical_distinct_count(model, t, reps, seed)
    mean = model.lam * expected_distinct_g(t, model)
    emp_mean = float(counts.mean())
    var = float(counts.var(ddof=1))
    se = math.sqrt(var / reps)
    z = abs(emp_mean - mean) / se
    dispersion = var / emp_mean
    ok = z <= 3.0 and 0.9 <= dispersion <= 1.1
    return CriterionResult(
        2, "distinct count is Poisson(lam g(t))", ok, z, "|z| <= 3 and dispersion in [0.9, 1.1]",
        {"replications": reps, "theory_mean": mean, "empirical_mean": emp_mean, "dispersion": dispersion},
    )


def criterion_3(scale: float = 1.0, seed: int = 0) -> CriterionResult:
    model = study_model(**EVICTION_MODEL)
    C = 500
    n = _n(1000, scale)
    t_c = eviction_time_che(C, model)
    ratio = float(np.mean(sample_eviction_times(C, model, n, seed) / t_c))
    return CriterionResult(3, "T_C / t_C -> 1", 0.99 <= ratio <= 1.01, ratio, "in [0.99, 1.01]", {"C": C, "samples": n, "t_C": t_c})


def criterion_4(scale: float = 1.0, seed: int = 0) -> CriterionResult:
    model = study_model(**EVICTION_MODEL)
    C = 1000
    n = _n(5000, scale)
    t_c = eviction_time_che(C, model)
    f = clt_scale(t_c, model)
    x = (sample_eviction_times(C, model, n, seed + 1) - t_c) / f
    ks = ks_statistic(x, norm.cdf)
    return CriterionResult(
        4, "(T_C - t_C)/f(t_C) is standard normal", ks <= 0.05, ks, "KS <= 0.05",
        {"C": C, "samples": n, "t_C": t_c, "f": f, "mean": float(x.mean()), "sd": float(x.std(ddof=1))},
    )


def exact_tail(C: int, t: float, model) -> float:
    """``P(T_C > t)``: fewer than ``C`` distinct contents requested in ``[0, t]`` (Poisson count)."""
    return float(poisson.cdf(C - 1, model.lam * expected_distinct_g(t, model)))


def ld_delta_for(C: int, target: float, model) -> float:
    """``delta`` with ``P(T_C > t_C (1 + delta)) = target`` under the exact Poisson law."""
    t_c = eviction_time_che(C, model)
    return brentq(lambda d: exact_tail(C, t_c * (1.0 + d), model) - target, 1e-6, 10.0, xtol=1e-12)


def criterion_5(scale: float = 1.0, seed: int = 0) -> CriterionResult:
    model = study_model(**EVICTION_MODEL)
    C = 200
    n = _n(100_000, scale)
    # about 200 exceedances expected in 10^5 samples
    delta = ld_delta_for(C, 2e-3, model)
    t_c = eviction_time_che(C, model)
    thr = t_c * (1.0 + delta)
    samples = sample_eviction_times(C, model, n, seed + 2)
    exceed = int(np.count_nonzero(samples > thr))
    rate = float(rate_function(expected_distinct_g(thr, model) / C, RateFunctionCtx(model.lam)))
    emp = -math.log(exceed / n) / C if exceed else math.inf
    rel = abs(emp - rate) / rate
    exact = exact_tail(C, thr, model)
    ok = exceed >= 100 and exact >= 1e-3 and rel <= 0.25
    return CriterionResult(
        5, "upper-tail LD exponent", ok, rel, "relative gap <= 0.25 with >= 100 exceedances",
        {
            "C": C, "delta": delta, "samples": n, "exceedances": exceed,
            "empirical_exponent": emp, "rate_function": rate,
            "exact_tail": exact, "exact_exponent": -math.log(exact) / C,
            "predicted_tail": math.exp(-C * rate),
        },
    )


def criterion_6(scale: float = 1.0, seed: int = 0) -> CriterionResult:
    model = study_model(100.0, 30.0, 2.0)
    sizes = [20, 50, 100, 200]
    reps = max(2, int(round(20 * scale)))
    window = 240.0 * min(1.0, max(scale, 0.05))
    sims = simulate_hit_curve(model, TraceConfig(0.0, 60.0 + window, 60.0, seed), sizes, reps)
    rows, ok, worst = [], True, 0.0
    for C, s in zip(sizes, sims):
        p = che_curve_point(C, model)
        gap = abs(s.hit_ratio - p.p_hit_che)
        inside = gap <= max(0.01, p.err_bound) and gap <= p.err_bound + 3.0 * s.std_err
        ok &= inside
        worst = max(worst, gap / max(0.01, p.err_bound))
        rows.append({"C": C, "sim": s.hit_ratio, "stderr": s.std_err, "che": p.p_hit_che, "bound": p.err_bound, "ok": inside})
    return CriterionResult(
        6, "Che accuracy and error-bound containment", bool(ok), worst,
        "|sim - che| <= max(0.01, bound) and <= bound + 3 se", {"replications": reps, "points": rows},
    )


def criterion_7(scale: float = 1.0, seed: int = 0) -> CriterionResult:
    curves = [(a, 30.0) for a in (1.5, 2.0, 3.0)] + [(2.0, L) for L in (10.0, 90.0)]
    sizes = full_cache_grid()
    ok, worst_conv, detail = True, 0.0, []
    for alpha, L in curves:
        model = study_model(100_000.0, L, alpha)
        ps = [che_curve_point(C, model) for C in sizes]
        mono = all(b.p_hit_che >= a.p_hit_che for a, b in zip(ps, ps[1:]))
        conv = max(max(convergence_check(p.cache_size, model, t_c=p.t_c).values()) for p in ps)
        worst_conv = max(worst_conv, conv)
        ok &= mono and conv <= 1e-6
        detail.append({"alpha": alpha, "L": L, "monotone": mono, "convergence": conv})
    return CriterionResult(7, "full-scale hit curves", bool(ok), worst_conv, "monotone and convergence <= 1e-6", {"curves": detail})


def criterion_8(scale: float = 1.0, seed: int = 0) -> CriterionResult:
    prof = RectangularProfile(1.0)
    n = _n(100_000, scale, floor=100)
    qa = TandemQuery(0.9, 2.0, 0.4, 0.7)
    qb = TandemQuery(0.9, 2.0, 0.2, 0.7)
    qc = TandemQuery(0.9, 2.0, 0.5, 0.4)
    ba, bb, bc = (tandem_bounds(q, prof) for q in (qa, qb, qc))
    pa, sa = tandem_hit_mc(qa, prof, n, seed)
    pb, sb = tandem_hit_mc(qb, prof, n, seed + 1)
    ok_a = ba.k == 1 and ba.lower == ba.upper and abs(pa - ba.upper) <= 3.0 * sa
    ok_b = bb.k == 3 and bb.lower - 3.0 * sb <= pb <= bb.upper + 3.0 * sb
    ok_c = bc.k == 0 and bc.lower == 0.0 and bc.upper == 0.0
    return CriterionResult(
        8, "tandem exactness and containment", ok_a and ok_b and ok_c, abs(pa - ba.upper) / sa,
        "(a) within 3 se, (b) in [L - 3se, U + 3se], (c) exact 0",
        {
            "a": {"bound": ba.upper, "mc": pa, "se": sa, "ok": ok_a},
            "b": {"lower": bb.lower, "upper": bb.upper, "mc": pb, "se": sb, "ok": ok_b},
            "c": {"lower": bc.lower, "upper": bc.upper, "ok": ok_c},
        },
    )


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8}


def run_criterion(number: int, scale: float = 1.0, seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    res = CRITERIA[number](scale=scale, seed=seed)
    res.elapsed = time.perf_counter() - t0
    return res


def criterion_9(seed: int = 0, scale: float = 0.01) -> CriterionResult:
    """Two reduced-scale validate runs must produce byte-identical artifacts."""
    from .config import config_from_dict
    from .presets import PRESETS
    from .cli import write_validate

    cfg = config_from_dict(PRESETS["validate"])
    cfg.experiment.seeds = [seed]
    cfg.experiment.validate_scale = scale
    blobs = []
    with tempfile.TemporaryDirectory() as tmp:
        for i in range(2):
            out = Path(tmp) / f"run{i}"
            write_validate(cfg, out, include_determinism=False)
            blobs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    same = blobs[0] == blobs[1]
    return CriterionResult(9, "validate is byte-deterministic", same, float(same), "identical bytes", {"files": sorted(blobs[0])})
