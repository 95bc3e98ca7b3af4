"""Analytic hit-probability curves for the two numerical-study families.

Family 1 varies the Pareto exponent (lifespan 30 days), family 2 the
lifespan (exponent 2). Writes one hit-curve artifact per curve under
``--out`` (default ``out/figures``).
"""
import argparse
from pathlib import Path

from snmcache.experiments import run_hit_curve, write_artifact
from snmcache.presets import PRESETS, preset


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("out/figures"))
    args = ap.parse_args()
    for name in sorted(n for n in PRESETS if n.startswith("fig")):
        art = run_hit_curve(preset(name))
        write_artifact(art, args.out / name)
        p = [r[2] for r in art.rows]
        print(f"{name:14s} C={art.rows[0][0]}..{art.rows[-1][0]}  p_hit {p[0]:.4f} -> {p[-1]:.4f}")


if __name__ == "__main__":
    main()
