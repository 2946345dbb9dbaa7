"""Run configuration shared by the CLI commands.

Every emitted artifact embeds the full configuration so runs are
reproducible byte for byte: identical config and inputs give identical
files (no timestamps, fixed float formatting, stable key order).
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields


@dataclass(frozen=True)
class RunConfig:
    # tolerances
    quadrature_abs: float = 1e-10
    root_rel: float = 1e-12
    residual_rel: float = 1e-8
    oracle_rel: float = 1e-6
    # grid sizes
    t_scan_points: int = 2048
    mu_grid_points: int = 64
    oracle_n: int = 200000
    oracle_L: float = 400.0
    # output
    format: str = "csv"
    precision: int = 17
    jobs: int = 1

    def __post_init__(self) -> None:
        for name in ("quadrature_abs", "root_rel", "residual_rel", "oracle_rel"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"tolerance {name} must be positive")
        if self.format not in ("csv", "json"):
            raise ValueError(f"unknown output format {self.format!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def load_config_file(path: str) -> dict:
    """Parse a flat `key = value` configuration file (comments with #)."""
    out: dict = {}
    valid = {f.name: f.type for f in fields(RunConfig)}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in valid:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            val = val.strip("\"'")
            if key == "format":
                out[key] = val
            elif key in ("t_scan_points", "mu_grid_points", "oracle_n",
                         "precision", "jobs"):
                out[key] = int(val)
            else:
                out[key] = float(val)
    return out


def default_output_dir() -> str:
    return os.environ.get("DELTANLS_OUT", ".")
