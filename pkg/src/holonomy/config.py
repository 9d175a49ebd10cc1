"""Run configuration: bounds, precision, cache location, output format."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass


@dataclass
class RunConfig:
    precision_bits: int = 128
    unit_search_height: float = 1e9
    ideal_bound_scale: float = 1.0
    principality_budget: int = 6_000_000
    cache_path: str | None = None
    output_format: str = "text"  # csv | json | text
    seed: int = 0
    strict: bool = False

    def __post_init__(self):
        if self.precision_bits < 64:
            raise ValueError("precision_bits must be >= 64 for statistics runs")
        if self.ideal_bound_scale <= 0 or self.principality_budget <= 0:
            raise ValueError("bounds must be positive")

    def digest(self) -> str:
        payload = {k: v for k, v in asdict(self).items() if k != "cache_path"}
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def load_config_file(path: str) -> dict:
    """Plain-text key=value config; '#' comments and blank lines ignored."""
    out: dict = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            k, _, v = line.partition("=")
            out[k.strip()] = v.strip()
    return out


def config_from_sources(file_path: str | None = None, **overrides) -> RunConfig:
    vals: dict = {}
    if file_path:
        raw = load_config_file(file_path)
        for k, v in raw.items():
            if k in ("precision_bits", "principality_budget", "seed"):
                vals[k] = int(v)
            elif k in ("unit_search_height", "ideal_bound_scale"):
                vals[k] = float(v)
            elif k == "strict":
                vals[k] = v.lower() in ("1", "true", "yes")
            else:
                vals[k] = v
    for k, v in overrides.items():
        if v is not None:
            vals[k] = v
    return RunConfig(**vals)
