"""Desk-scale check of Che's approximation against simulated LRU traces.

Prints, per cache size, the simulated hit ratio, the approximation, and
whether the gap sits inside the error bound plus three standard errors.
"""
import argparse

from snmcache.experiments import run_hit_curve
from snmcache.config import with_overrides
from snmcache.presets import preset


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--replications", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    cfg = with_overrides(preset("desk-hit-curve"), replications=args.replications, seeds=[args.seed], simulate=True)
    art = run_hit_curve(cfg, jobs=args.jobs)
    cols = art.columns
    print(f"{'C':>5} {'sim':>8} {'se':>8} {'che':>8} {'bound':>8}  inside")
    for row in art.rows:
        r = dict(zip(cols, row))
        gap = abs(r["sim_hit_ratio"] - r["p_hit_che"])
        inside = gap <= r["err_bound"] + 3 * r["sim_stderr"]
        print(f"{r['C']:>5} {r['sim_hit_ratio']:8.4f} {r['sim_stderr']:8.4f} {r['p_hit_che']:8.4f} {r['err_bound']:8.4f}  {inside}")


if __name__ == "__main__":
    main()
