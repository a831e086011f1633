"""
Environment-driven settings for circleflow
Values come from the process environment (optionally seeded from a .env file
by the entry points via python-dotenv).
"""

import os
import logging
from dataclasses import dataclass
from typing import Optional

logger = logging.getLogger(__name__)

ENV_PREFIX = "CIRCLEFLOW_"


def _int_env(name: str, default: int, minimum: int = 1) -> int:
    raw = os.getenv(ENV_PREFIX + name)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer {ENV_PREFIX + name}={raw!r}; using {default}")
        return default
    if value < minimum:
        logger.warning(f"Ignoring {ENV_PREFIX + name}={value} (minimum {minimum}); using {default}")
        return default
    return value


@dataclass(frozen=True)
class Settings:
    """Process-wide defaults; CLI flags override them per run"""
    log_level: str = "INFO"
    quadrature_nodes: int = 48
    dense_limit: int = 64
    report_digits: Optional[int] = None

    @classmethod
    def from_env(cls) -> "Settings":
        digits_raw = os.getenv(ENV_PREFIX + "REPORT_DIGITS")
        report_digits = _int_env("REPORT_DIGITS", 17) if digits_raw else None
        return cls(
            log_level=os.getenv(ENV_PREFIX + "LOG_LEVEL", "INFO").upper(),
            quadrature_nodes=_int_env("QUADRATURE_NODES", 48),
            dense_limit=_int_env("DENSE_LIMIT", 64),
            report_digits=report_digits,
        )


def get_settings() -> Settings:
    """Get singleton settings instance (read from the environment once)"""
    if not hasattr(get_settings, '_instance'):
        get_settings._instance = Settings.from_env()
    return get_settings._instance


def reset_settings() -> None:
    """Forget the cached settings so the next call re-reads the environment"""
    if hasattr(get_settings, '_instance'):
        del get_settings._instance
