"""Configuration: the packaged defaults file and environment overrides."""

from __future__ import annotations

import os
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict

import numpy as np
import yaml

from cmsdisc.errors import ConfigError

DEFAULTS_PATH = Path(__file__).resolve().with_name("defaults.yml")
REQUIRED_SECTIONS = (
    "constants",
    "calibrated",
    "thresholds",
    "envelope",
    "grid",
    "wigner",
    "threads",
)


@lru_cache(maxsize=1)
def load_defaults() -> Dict[str, Any]:
    with DEFAULTS_PATH.open("r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    missing = [s for s in REQUIRED_SECTIONS if s not in data]
    if missing:
        raise ConfigError(f"{DEFAULTS_PATH}: missing sections {', '.join(missing)}")
    return data


def default_grid() -> np.ndarray:
    """The x0 grid used when a command is not given a single point."""
    g = load_defaults()["grid"]
    return np.linspace(float(g["start"]), float(g["stop"]), int(g["points"]))


def thread_count() -> int:
    """Worker count for parallel trials; CMSDISC_THREADS caps it."""
    threads = load_defaults()["threads"]
    raw = os.getenv(threads["env_var"])
    if raw is None or raw.strip() == "":
        return max(1, min(os.cpu_count() or 1, int(threads["default_max"])))
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(
            f"{threads['env_var']} must be an integer >= 1, got {raw!r}"
        ) from None
    if value < 1:
        raise ConfigError(f"{threads['env_var']} must be an integer >= 1, got {value}")
    return value
