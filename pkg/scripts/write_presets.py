"""Regenerate configs/*.yaml from the presets shipped in the package."""
from pathlib import Path

from snmcache.config import dump_config
from snmcache.presets import PRESETS, preset

out = Path(__file__).resolve().parents[1] / "configs"
out.mkdir(exist_ok=True)
for name in sorted(PRESETS):
    dump_config(preset(name), out / f"{name}.yaml")
    print(out / f"{name}.yaml")
