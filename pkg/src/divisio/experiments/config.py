"""Parameter grids and output options for the divisibility experiments."""

from __future__ import annotations

import math
from enum import StrEnum, auto
from pathlib import Path
from typing import Any, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from divisio.divisibility import DivisibilityKind
from divisio.settings import load_settings

DEFAULT_STEPS = {
    "collisional": 51,
    "dephasing": 40,
    "dephasing_hd": 21,
}


class ExperimentConfigError(ValueError):
    """An experiment configuration violates its invariants."""


class Experiment(StrEnum):
    collisional = auto()
    dephasing = auto()
    dephasing_hd = auto()
    unitary_mix = auto()
    query = auto()


class OutputFormat(StrEnum):
    csv = auto()
    json = auto()


class ExperimentConfig(BaseModel):
    """One experiment run.

    ``steps`` is the number of grid points per axis and defaults per
    experiment; ``p_*`` bound the probability grids, ``t_*`` the time grid of
    the dephasing study.
    """

    model_config = ConfigDict(frozen=True)

    experiment: Experiment
    steps: int | None = Field(default=None, ge=1)
    p_min: float = Field(default=0.0, ge=0, le=1)
    p_max: float = Field(default=1.0, ge=0, le=1)
    t_min: float = 0.0
    t_max: float = 2 * math.pi
    dim: int = Field(default=5, ge=2)
    dims: tuple[int, ...] = (2, 3, 4)
    mixture_sizes: tuple[int, ...] = (1, 2, 5, 15)
    samples: int = Field(default=20, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    output_path: Path | None = None
    format: OutputFormat = OutputFormat.csv
    tolerance: float | None = Field(default=None, gt=0)
    choi_a: Path | None = None
    choi_b: Path | None = None
    mode: DivisibilityKind = DivisibilityKind.CP
    allow_noncptp: bool = False

    @model_validator(mode="after")
    def check_ranges(self) -> Self:
        if self.p_min > self.p_max:
            raise ValueError(f"p range [{self.p_min}, {self.p_max}] is not ordered")
        if self.t_min > self.t_max:
            raise ValueError(f"t range [{self.t_min}, {self.t_max}] is not ordered")
        if not self.dims or min(self.dims) < 2:  # noqa: PLR2004
            raise ValueError(f"dimensions must be at least 2, got {self.dims}")
        if not self.mixture_sizes or min(self.mixture_sizes) < 1:
            raise ValueError(f"mixture sizes must be at least 1, got {self.mixture_sizes}")
        if self.experiment is Experiment.query and (self.choi_a is None or self.choi_b is None):
            raise ValueError("a query needs both Choi files")
        return self

    @property
    def grid_steps(self) -> int:
        return self.steps or DEFAULT_STEPS.get(self.experiment, 1)

    @property
    def divisible_tolerance(self) -> float:
        """The override, else ``DIVISIO_DIVISIBLE_TOLERANCE``."""
        return self.tolerance or load_settings().DIVISIBLE_TOLERANCE

    def p_grid(self) -> list[float]:
        return [float(p) for p in np.linspace(self.p_min, self.p_max, self.grid_steps)]

    def t_grid(self) -> list[float]:
        return [float(t) for t in np.linspace(self.t_min, self.t_max, self.grid_steps)]


def experiment_config(**values: Any) -> ExperimentConfig:
    """Validate ``values`` into a config, raising [ExperimentConfigError][divisio.experiments.ExperimentConfigError]."""
    try:
        return ExperimentConfig.model_validate(values)
    except ValidationError as error:
        raise ExperimentConfigError(str(error)) from error
