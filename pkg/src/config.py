"""
Run configuration for the form-inequality lab.
Values come from formlab.toml (section [formlab]) first, then environment
variables, then defaults; command-line flags override all of them.
"""

import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

CONFIG_FILE = "formlab.toml"

DEFAULT_TOLERANCE = 1e-9


def _read_config_file() -> Dict[str, Any]:
    path = Path(os.environ.get("FORMLAB_CONFIG", CONFIG_FILE))
    if not path.is_file():
        return {}
    try:
        with path.open("rb") as handle:
            return tomllib.load(handle).get("formlab", {})
    except (OSError, tomllib.TOMLDecodeError):
        # A broken config file must not take the CLI down; env and defaults still apply
        return {}


def _setting(file_cfg: Dict[str, Any], key: str, env_name: str, default: Optional[str] = None) -> Any:
    # a value present in the file wins even when it is falsy (tolerance = 0)
    if file_cfg.get(key) is not None:
        return file_cfg[key]
    return os.environ.get(env_name, default)


def get_formlab_config() -> Dict[str, Any]:
    """Get lab configuration from formlab.toml or environment variables"""
    file_cfg = _read_config_file()

    threads = _setting(file_cfg, "threads", "FORMLAB_THREADS", "1")
    tolerance = _setting(file_cfg, "tolerance", "FORMLAB_TOL", str(DEFAULT_TOLERANCE))
    try:
        threads = max(1, int(threads))
    except (TypeError, ValueError):
        threads = 1
    try:
        tolerance = float(tolerance)
    except (TypeError, ValueError):
        tolerance = DEFAULT_TOLERANCE

    return {
        "threads": threads,
        "tolerance": tolerance,
        "log_level": _setting(file_cfg, "log_level", "FORMLAB_LOG_LEVEL", "WARNING"),
        "log_file": _setting(file_cfg, "log_file", "FORMLAB_LOG_FILE"),
    }


def resolve_seed(seed: Optional[int]) -> int:
    """Return the given seed, or draw one from OS entropy so the run stays replayable"""
    if seed is not None:
        return int(seed)
    return int(np.random.SeedSequence().entropy % (2**32))


@dataclass
class RunConfig:
    """Everything a single CLI invocation needs to be reproduced."""
    command: str
    seed: int
    threads: int = 1
    tolerance: float = DEFAULT_TOLERANCE
    inputs: List[str] = field(default_factory=list)
    output: Optional[str] = None
    # (z, w) sampler spec text, parsed by the commands that sweep Z2
    sampler: Optional[str] = None
    # tolerances recorded in the report envelope, keyed by what they bound
    tolerances: Dict[str, float] = field(default_factory=dict)

    @classmethod
    def from_args(cls, command: str, seed: Optional[int] = None, threads: Optional[int] = None,
                  tolerance: Optional[float] = None, output: Optional[str] = None,
                  inputs: Optional[List[str]] = None, sampler: Optional[str] = None) -> "RunConfig":
        config = get_formlab_config()
        tolerance = config["tolerance"] if tolerance is None else tolerance
        return cls(
            command=command,
            seed=resolve_seed(seed),
            threads=config["threads"] if threads is None else max(1, threads),
            tolerance=tolerance,
            inputs=list(inputs or []),
            output=output,
            sampler=sampler,
            tolerances={"verdict": tolerance},
        )
