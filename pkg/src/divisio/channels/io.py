"""Choi file format: ``{"dim_in", "dim_out", "choi": [[[re, im], ...], ...]}``."""

from __future__ import annotations

from typing import TYPE_CHECKING, Self

import structlog
from pydantic import BaseModel, model_validator

from divisio import matlin
from divisio.channels.channel import Channel
from divisio.matlin import ComplexPairs, HermitianOperator

if TYPE_CHECKING:
    from pathlib import Path

logger = structlog.get_logger()


class ChoiFormatError(ValueError):
    """A Choi file is unreadable or describes an invalid map."""


class ChoiFileModel(BaseModel):
    """Schema of a Choi file; rows run over the input ⊗ output product basis."""

    dim_in: int
    dim_out: int
    choi: ComplexPairs

    @model_validator(mode="after")
    def check_shape(self) -> Self:
        size = self.dim_in * self.dim_out
        if self.dim_in < 1 or self.dim_out < 1:
            raise ValueError("dimensions must be positive")
        if len(self.choi) != size or any(len(row) != size for row in self.choi):
            raise ValueError(f"choi must be {size}×{size} for dims {self.dim_in}→{self.dim_out}")
        return self

    @classmethod
    def from_channel(cls, channel: Channel) -> ChoiFileModel:
        return cls(
            dim_in=channel.dim_in,
            dim_out=channel.dim_out,
            choi=matlin.to_pairs(channel.choi.matrix),
        )

    def to_channel(self) -> Channel:
        return Channel(self.dim_in, self.dim_out, HermitianOperator(matlin.from_pairs(self.choi)))


def write_choi(channel: Channel, path: Path) -> None:
    """Write ``channel`` to ``path``."""
    path.write_text(ChoiFileModel.from_channel(channel).model_dump_json())


def read_choi(path: Path) -> Channel:
    """Read a Choi file.

    Raises:
        ChoiFormatError: the file is not valid JSON, does not match the
            schema, or holds a non-Hermitian matrix.
    """
    try:
        model = ChoiFileModel.model_validate_json(path.read_bytes())
        return model.to_channel()
    except ValueError as error:
        logger.debug("choi file rejected", path=str(path), exc_info=True)
        raise ChoiFormatError(f"{path}: {error}") from error
