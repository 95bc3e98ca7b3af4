"""Command-line entry point: ``snmcache <experiment> [--config PATH | --preset NAME] ...``.

Exit codes: 0 success, 2 config error, 3 numerics error, 4 acceptance failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .config import ExperimentConfig, load_config, with_overrides
from .errors import ConfigError, NumericsError
from .experiments import (
    Artifact,
    read_artifact_hash,
    run_eviction_dist,
    run_g_curve,
    run_hit_curve,
    run_tandem,
    write_artifact,
)
from .presets import PRESETS, preset

log = logging.getLogger("snmcache")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICS, EXIT_ACCEPTANCE = 0, 2, 3, 4


def write_validate(cfg: ExperimentConfig, out_dir, include_determinism: bool = True, echo=None) -> bool:
    """Run the acceptance criteria at ``validate_scale`` and write ``validate.csv``/``.json``."""
    from .acceptance import CRITERIA, criterion_9, run_criterion

    scale, seed = cfg.experiment.validate_scale, cfg.seed
    results = []
    for number in CRITERIA:
        res = run_criterion(number, scale=scale, seed=seed)
        if echo:
            echo(res.line())
        results.append(res)
    if include_determinism:
        res = criterion_9(seed=seed)
        if echo:
            echo(res.line())
        results.append(res)
    meta = {
        "tool": "snmcache",
        "tool_version": __version__,
        "experiment": "validate",
        "config_hash": cfg.config_hash(),
        "seeds": [int(s) for s in cfg.experiment.seeds],
        "scale": scale,
    }
    rows = [(r.number, r.title, r.passed, r.statistic, r.threshold) for r in results]
    art = Artifact(
        "validate", ["criterion", "name", "passed", "statistic", "threshold"], rows, meta,
        extra={"details": {str(r.number): r.details for r in results}},
    )
    write_artifact(art, out_dir)
    return all(r.passed for r in results)


def compare_against(out_dir: Path, ref_dir: Path) -> tuple[int, str]:
    """Compare artifacts in two directories; refuses when their config hashes differ."""
    ours = sorted(out_dir.glob("*.csv"))
    if not ours:
        return EXIT_CONFIG, f"no artifacts in {out_dir}"
    for path in ours:
        ref = ref_dir / path.name
        if not ref.exists():
            return EXIT_ACCEPTANCE, f"{ref} missing"
        h1, h2 = read_artifact_hash(path), read_artifact_hash(ref)
        if h1 != h2:
            return EXIT_CONFIG, f"refusing to compare {path.name}: config hash {h1} != {h2}"
        if path.read_bytes() != ref.read_bytes():
            return EXIT_ACCEPTANCE, f"{path.name} differs from {ref}"
    return EXIT_OK, "artifacts identical"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="snmcache", description="Che-approximation analytics and LRU simulation under shot-noise traffic.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("g-curve", "g(t): closed form vs quadrature"),
        ("hit-curve", "hit probability, characteristic time and error bound vs cache size"),
        ("eviction-dist", "eviction-time samples with LLN/CLT/LD summary"),
        ("tandem", "second-cache bounds over a (t_C1, t_C2) grid"),
        ("validate", "run the acceptance suite"),
    ]:
        s = sub.add_parser(name, help=help_)
        src = s.add_mutually_exclusive_group()
        src.add_argument("--config", type=Path, help="YAML config file")
        src.add_argument("--preset", choices=sorted(PRESETS), help="shipped config")
        s.add_argument("--out", type=Path, help="output directory (default: experiment.output_dir)")
        s.add_argument("--seed", type=int, help="override the seed list with a single seed")
        s.add_argument("--simulate", action="store_true", default=None, help="add Monte-Carlo columns")
        s.add_argument("--replications", type=int, help="override trace replications")
        s.add_argument("--jobs", type=int, default=1, help="worker processes (results do not depend on it)")
        if name == "validate":
            s.add_argument("--scale", type=float, help="multiply sample counts (1.0 = acceptance setting)")
            s.add_argument("--against", type=Path, help="compare fresh artifacts with a previous run")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _load(args) -> ExperimentConfig:
    if args.config is not None:
        cfg = load_config(args.config)
    elif args.preset is not None:
        cfg = preset(args.preset)
    else:
        default = {"hit-curve": "desk-hit-monotone"}.get(args.command, args.command)
        cfg = preset(default)
    return with_overrides(
        cfg,
        name=args.command,
        seeds=[args.seed] if args.seed is not None else None,
        simulate=args.simulate,
        replications=args.replications,
        validate_scale=getattr(args, "scale", None),
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = _load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out if args.out is not None else Path(cfg.experiment.output_dir)
    try:
        if args.command == "validate":
            ok = write_validate(cfg, out, echo=print)
            if args.against is not None:
                code, msg = compare_against(out, args.against)
                print(msg)
                if code:
                    return code
            return EXIT_OK if ok else EXIT_ACCEPTANCE
        runners = {
            "g-curve": lambda: run_g_curve(cfg),
            "hit-curve": lambda: run_hit_curve(cfg, args.jobs),
            "eviction-dist": lambda: run_eviction_dist(cfg, args.jobs),
            "tandem": lambda: run_tandem(cfg),
        }
        art = runners[args.command]()
        for path in write_artifact(art, out):
            print(path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericsError as exc:
        print(f"numerics error: {exc}", file=sys.stderr)
        return EXIT_NUMERICS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
