"""
Run configuration: environment defaults, key=value config files, precision policy.
"""

import io
import logging
import math
import os
from pathlib import Path
from typing import Union

from dotenv import dotenv_values

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20240917
DEFAULT_LOG_LEVEL = "WARNING"

# Keys accepted in a --config file; each mirrors a CLI flag.
CONFIG_KEYS = (
    "m",
    "N",
    "method",
    "format",
    "seed",
    "verify",
    "functions",
    "trials",
    "magnitude",
)

_TRUE_VALUES = {"1", "true", "yes", "on"}
_FALSE_VALUES = {"0", "false", "no", "off", ""}


def load_config(config: Union[dict, str, Path]) -> dict:
    """
    Load a flat key=value configuration.

    Args:
        config: Configuration as dict, path to a key=value file, or the file text itself

    Returns:
        Dict of raw string values keyed by flag name
    """
    if isinstance(config, dict):
        values = dict(config)
    elif isinstance(config, Path) or (isinstance(config, str) and "=" not in config and Path(config).exists()):
        path = Path(config)
        if not path.is_file():
            raise FileNotFoundError(f"Config file not found: {path}")
        values = dotenv_values(path)
    elif isinstance(config, str):
        values = dotenv_values(stream=io.StringIO(config))
    else:
        raise ValueError(f"Invalid config type: {type(config)}")

    unknown = sorted(set(values) - set(CONFIG_KEYS))
    if unknown:
        raise ValueError(f"Unknown config keys: {', '.join(unknown)}")
    return {key: value for key, value in values.items() if value is not None}


def parse_bool(value: Union[str, bool]) -> bool:
    """Interpret a config-file truth value."""
    if isinstance(value, bool):
        return value
    lowered = value.strip().lower()
    if lowered in _TRUE_VALUES:
        return True
    if lowered in _FALSE_VALUES:
        return False
    raise ValueError(f"Invalid boolean value: {value!r}")


def parse_int_list(value: Union[str, int, list]) -> list[int]:
    """Parse '5,10,50' (or a single integer) into a list of integers."""
    if isinstance(value, int):
        return [value]
    if isinstance(value, list):
        return [int(v) for v in value]
    items = [item.strip() for item in str(value).split(",")]
    return [int(item) for item in items if item]


def env_int(name: str, default: int) -> int:
    """Read an integer environment variable, falling back to default."""
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning("Ignoring non-integer %s=%r", name, raw)
        return default


def default_seed() -> int:
    """Seed used by minimality probes when none is given."""
    return env_int("OPTQUAD_SEED", DEFAULT_SEED)


def default_log_level() -> str:
    return os.environ.get("OPTQUAD_LOG_LEVEL", DEFAULT_LOG_LEVEL).upper()


def working_dps(m: int, N: int) -> int:
    """
    Decimal digits for extended-precision work at order m and N intervals.

    Operator coefficients and grid convolutions lose about (2m-1)*log10(N)
    digits to cancellation; the base 30 digits survive that loss.
    """
    extra = max(env_int("OPTQUAD_EXTRA_DPS", 0), 0)
    return 30 + math.ceil(2 * m * math.log10(N + 1)) + extra
