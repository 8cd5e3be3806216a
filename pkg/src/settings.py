"""
Environment configuration.

Values are read from the process environment (optionally seeded from a .env
file) each time they are requested, so tests can patch os.environ.

Optional Configuration (Defaults Provided):
    SKETCHED_ALS_MAX_DENSE_ENTRIES: Largest dense tensor/design materialization allowed (default: 2**26)
    SKETCHED_ALS_EXACT_ERROR_MAX_ENTRIES: Tensors up to this size get an exact error trace (default: 2**22)
    SKETCHED_ALS_ERROR_SAMPLE_SIZE: Entries in the fixed sample used to estimate larger errors (default: 100000)
    SKETCHED_ALS_MATERIALIZE_MAX_COLUMNS: Size guard for explicit sketch matrices (default: 4096)
    SKETCHED_ALS_LOG_FILE: Rotating log file written by the xbench CLI (default: xbench.log)
    SKETCHED_ALS_LOG_LEVEL: Log level for the xbench CLI (default: INFO)
"""

import os

from dotenv import load_dotenv

from .errors import ConfigError, MemoryGuardError

load_dotenv()

_DEFAULTS = {
    "SKETCHED_ALS_MAX_DENSE_ENTRIES": 2**26,
    "SKETCHED_ALS_EXACT_ERROR_MAX_ENTRIES": 2**22,
    "SKETCHED_ALS_ERROR_SAMPLE_SIZE": 100_000,
    "SKETCHED_ALS_MATERIALIZE_MAX_COLUMNS": 4096,
}


def _int_setting(name: str) -> int:
    raw = os.getenv(name, _DEFAULTS[name])
    try:
        value = int(raw)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{name} must be an integer, got {raw!r}") from e
    if value <= 0:
        raise ConfigError(f"{name} must be positive, got {value}")
    return value


def max_dense_entries() -> int:
    return _int_setting("SKETCHED_ALS_MAX_DENSE_ENTRIES")


def exact_error_max_entries() -> int:
    return _int_setting("SKETCHED_ALS_EXACT_ERROR_MAX_ENTRIES")


def error_sample_size() -> int:
    return _int_setting("SKETCHED_ALS_ERROR_SAMPLE_SIZE")


def materialize_max_columns() -> int:
    return _int_setting("SKETCHED_ALS_MATERIALIZE_MAX_COLUMNS")


def log_file() -> str:
    return os.getenv("SKETCHED_ALS_LOG_FILE", "xbench.log")


def log_level() -> str:
    return os.getenv("SKETCHED_ALS_LOG_LEVEL", "INFO").upper()


def check_dense_budget(entries: int, what: str) -> None:
    """Raise MemoryGuardError if materializing `entries` floats would exceed the budget."""
    limit = max_dense_entries()
    if entries > limit:
        raise MemoryGuardError(
            f"{what} needs {entries:,} dense entries, above the limit of {limit:,} "
            f"(raise SKETCHED_ALS_MAX_DENSE_ENTRIES to allow it)"
        )
