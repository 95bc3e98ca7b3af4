"""Upper-tail exponent of the eviction time: exact Poisson law vs the rate function.

``P(T_C > t)`` equals ``P(Poisson(lam g(t)) < C)``, so the empirical
exponent can be computed without sampling. For each cache size the script
picks ``delta`` so the exact tail equals ``--target`` and reports the ratio
of ``-(1/C) log P`` to ``I(g(t_C(1+delta))/C)``.
"""
import argparse
import math

from snmcache.acceptance import EVICTION_MODEL, exact_tail, ld_delta_for
from snmcache.analytics import RateFunctionCtx, eviction_time_che, expected_distinct_g, rate_function
from snmcache.model import study_model


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--target", type=float, default=2e-3)
    ap.add_argument("--sizes", type=int, nargs="+", default=[5, 20, 50, 200, 1000, 5000, 20000])
    args = ap.parse_args()
    model = study_model(**EVICTION_MODEL)
    ctx = RateFunctionCtx(model.lam)
    print(f"{'C':>6} {'delta':>9} {'exact P':>10} {'-(1/C)logP':>11} {'I':>10} {'ratio':>7}")
    for C in args.sizes:
        d = ld_delta_for(C, args.target, model)
        thr = eviction_time_che(C, model) * (1 + d)
        p = exact_tail(C, thr, model)
        emp = -math.log(p) / C
        rate = float(rate_function(expected_distinct_g(thr, model) / C, ctx))
        print(f"{C:>6} {d:9.4f} {p:10.3e} {emp:11.4e} {rate:10.4e} {emp / rate:7.3f}")


if __name__ == "__main__":
    main()
