"""JSON form of [DivisibilityReport][divisio.divisibility.DivisibilityReport]."""

from __future__ import annotations

from typing import TYPE_CHECKING

from pydantic import BaseModel, ConfigDict, Field

from divisio import matlin
from divisio.channels import ChoiFileModel
from divisio.divisibility.quantifiers import AbsoluteFlag, DivisibilityKind
from divisio.matlin import ComplexPairs

if TYPE_CHECKING:
    from pathlib import Path

    from divisio.divisibility.quantifiers import DivisibilityReport, WitnessPair


class WitnessModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    w: ComplexPairs
    lam: ComplexPairs = Field(alias="lambda")
    objective: float

    @classmethod
    def from_witness(cls, witness: WitnessPair) -> WitnessModel:
        return cls(
            w=matlin.to_pairs(witness.w.matrix),
            lam=matlin.to_pairs(witness.lam.matrix),
            objective=witness.objective,
        )


class DivisibilityReportModel(BaseModel):
    """Serialised report; the intermediate map is embedded in the Choi file format."""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    kind: DivisibilityKind
    distance: float
    intermediate_choi: ChoiFileModel
    witness: WitnessModel | None = None
    absolute_flag: AbsoluteFlag
    trivial_bounds: tuple[float, float] | None = None
    sdp_gap: float
    solve_seconds: float
    p_decomposition: tuple[ComplexPairs, ComplexPairs] | None = None

    @classmethod
    def from_report(cls, report: DivisibilityReport) -> DivisibilityReportModel:
        return cls(
            kind=report.kind,
            distance=report.distance,
            intermediate_choi=ChoiFileModel.from_channel(report.intermediate),
            witness=WitnessModel.from_witness(report.witness) if report.witness else None,
            absolute_flag=report.absolute_flag,
            trivial_bounds=report.trivial_bounds,
            sdp_gap=report.sdp_gap,
            solve_seconds=report.solve_seconds,
            p_decomposition=(
                (
                    matlin.to_pairs(report.p_decomposition[0].matrix),
                    matlin.to_pairs(report.p_decomposition[1].matrix),
                )
                if report.p_decomposition
                else None
            ),
        )


def report_json(report: DivisibilityReport) -> str:
    """The report as a JSON document."""
    return DivisibilityReportModel.from_report(report).model_dump_json(by_alias=True, indent=2)


def write_report(report: DivisibilityReport, path: Path) -> None:
    path.write_text(report_json(report))
