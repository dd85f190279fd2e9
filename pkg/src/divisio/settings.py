"""Runtime configuration for divisio, loaded from ``DIVISIO_*`` environment variables."""

from __future__ import annotations

import os
from functools import cache

from pydantic import Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

ENV_PREFIX = "DIVISIO_"


class SettingsError(RuntimeError):
    """Error with divisio configuration."""


class DivisioSettings(BaseSettings):
    """Numerical tolerances, solver choice and worker pool size.

    Every field can be overridden by an environment variable carrying the
    ``DIVISIO_`` prefix, e.g. ``DIVISIO_THREADS=4``.
    """

    model_config = SettingsConfigDict(frozen=True, env_prefix=ENV_PREFIX)

    THREADS: int | None = Field(default=None, ge=1)
    SOLVER: str = "CLARABEL"
    GAP_TOLERANCE: float = Field(default=1e-8, gt=0)
    MAX_ITERATIONS: int = Field(default=200, ge=1)
    DIVISIBLE_TOLERANCE: float = Field(default=1e-6, gt=0)
    WITNESS_TOLERANCE: float = Field(default=1e-5, gt=0)
    ASYMMETRY_THRESHOLD: float = Field(default=1e-9, gt=0)

    def worker_count(self) -> int:
        """Size of the worker pool used for independent grid cells."""
        return self.THREADS or os.cpu_count() or 1


@cache
def _cached_settings() -> DivisioSettings:
    return DivisioSettings()


def load_settings(*, fresh: bool = False) -> DivisioSettings:
    """Load settings from the environment.

    The result is cached; pass ``fresh=True`` to re-read the environment.
    """
    if fresh:
        _cached_settings.cache_clear()
    try:
        return _cached_settings()
    except ValidationError as error:
        raise SettingsError(
            "Failed to load divisio settings from environment variables"
        ) from error
