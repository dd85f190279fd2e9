"""Tables produced by the experiment runners and their CSV/JSON renderings."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

from pydantic import BaseModel, ConfigDict

from divisio.experiments.config import ExperimentConfig, OutputFormat

if TYPE_CHECKING:
    from pathlib import Path

COLLISIONAL_COLUMNS = ("p", "cp_distance", "p_distance")
DEPHASING_COLUMNS = ("t1", "t2", "distance")
DEPHASING_HD_COLUMNS = ("p", "q", "distance", "identity_flag")
UNITARY_MIX_COLUMNS = ("d", "n", "sample", "seed", "solve_seconds", "distance")


class ExperimentDocument(BaseModel):
    """JSON form of a result; the config carries the seed and tolerance used."""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    config: ExperimentConfig
    columns: tuple[str, ...]
    rows: list[dict[str, Any]]
    summary: dict[str, Any]


@dataclass
class ExperimentResult:
    """Rows of one run, in grid order.

    Rows may carry keys beyond ``columns``; those appear in JSON output only.
    """

    config: ExperimentConfig
    columns: tuple[str, ...]
    rows: list[dict[str, Any]]
    summary: dict[str, Any] = field(default_factory=dict)

    def column(self, name: str) -> list[Any]:
        return [row[name] for row in self.rows]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.DictWriter(
            buffer, fieldnames=self.columns, extrasaction="ignore", lineterminator="\n"
        )
        writer.writeheader()
        writer.writerows(self.rows)
        return buffer.getvalue()

    def to_json(self) -> str:
        return ExperimentDocument(
            config=self.config, columns=self.columns, rows=self.rows, summary=self.summary
        ).model_dump_json(indent=2)

    def render(self, format: OutputFormat | None = None) -> str:
        """The result in ``format``, defaulting to the config's."""
        match format or self.config.format:
            case OutputFormat.csv:
                return self.to_csv()
            case OutputFormat.json:
                return self.to_json()

    def write(self, path: Path | None = None) -> str:
        """Render and write to ``path`` (default: the config's output path) if one is set."""
        text = self.render()
        target = path or self.config.output_path
        if target is not None:
            target.write_text(text)
        return text
