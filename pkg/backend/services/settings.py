"""Numeric tunables read from the environment.

Values come from process env (``main.py`` loads the project ``.env`` first).
A malformed value falls back to the default rather than aborting a run.
"""

from __future__ import annotations

import logging
import os

logger = logging.getLogger(__name__)


def _env_int(name: str, default: int, minimum: int = 0) -> int:
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        return max(minimum, int(float(raw)))
    except ValueError:
        logger.warning("Ignoring malformed %s=%r; using %s", name, raw, default)
        return default


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        value = float(raw)
    except ValueError:
        logger.warning("Ignoring malformed %s=%r; using %s", name, raw, default)
        return default
    return value if value > 0 else default


def exact_product_threshold() -> int:
    """Products up to this many steps are accumulated without rescaling."""
    return _env_int("LYAP_EXACT_PRODUCT_THRESHOLD", 64, minimum=1)


def series_term_cap() -> int:
    """Largest truncation length T allowed for the Lyapunov series."""
    return _env_int("LYAP_SERIES_TERM_CAP", 100_000, minimum=1)


def max_block_length() -> int:
    """Upper bound on a single high or low block in a planned schedule."""
    return _env_int("LYAP_MAX_BLOCK_LENGTH", 10**15, minimum=1)


def grouping_tolerance() -> float:
    return _env_float("LYAP_GROUPING_TOLERANCE", 1e-8)


def overflow_budget() -> float:
    return _env_float("LYAP_OVERFLOW_BUDGET", 1e300)


def stepwise_cap() -> int:
    """Times up to this bound are re-evaluated coordinate by coordinate."""
    return _env_int("LYAP_STEPWISE_CAP", 200_000, minimum=1)


def scan_window_cap() -> int:
    return _env_int("LYAP_SCAN_WINDOW_CAP", 8, minimum=1)
