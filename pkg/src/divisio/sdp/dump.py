"""JSON debug dump of [SdpProblem][divisio.sdp.problem.SdpProblem] instances.

Complex entries are written as ``[re, im]`` pairs. Loading groups consecutive
rows sharing a relation back into batches.
"""

from __future__ import annotations

from itertools import groupby
from typing import TYPE_CHECKING

import numpy as np
import structlog
from pydantic import BaseModel
from scipy import sparse

from divisio.matlin import ComplexPairs, from_pairs, to_pairs
from divisio.sdp.problem import ConstraintBatch, Relation, SdpProblem, Sense

if TYPE_CHECKING:
    from pathlib import Path

logger = structlog.get_logger()


class ObjectiveModel(BaseModel):
    blocks: dict[int, ComplexPairs]
    scalars: list[float]
    offset: float = 0.0


class ConstraintModel(BaseModel):
    blocks: dict[int, ComplexPairs]
    scalars: list[float]
    rhs: float
    relation: Relation


class ProblemModel(BaseModel):
    """On-disk schema of a dumped problem."""

    sense: Sense
    blocks: list[int]
    n_scalars: int
    objective: ObjectiveModel
    constraints: list[ConstraintModel]

    @classmethod
    def from_problem(cls, problem: SdpProblem) -> ProblemModel:
        constraints = []
        for batch in problem.constraints:
            scalars = batch.scalars.toarray()
            for row in range(batch.rows):
                constraints.append(
                    ConstraintModel(
                        blocks={
                            index: to_pairs(
                                batch.coefficient(row, index, problem.block_dims[index])
                            )
                            for index in batch.blocks
                        },
                        scalars=scalars[row].tolist(),
                        rhs=float(batch.rhs[row]),
                        relation=batch.relation,
                    )
                )
        return cls(
            sense=problem.sense,
            blocks=list(problem.block_dims),
            n_scalars=problem.n_scalars,
            objective=ObjectiveModel(
                blocks={
                    index: to_pairs(coefficient)
                    for index, coefficient in problem.objective_blocks.items()
                },
                scalars=problem.objective_scalars.tolist(),
                offset=problem.objective_offset,
            ),
            constraints=constraints,
        )

    def to_problem(self) -> SdpProblem:
        batches = []
        for relation, group in groupby(self.constraints, key=lambda c: c.relation):
            rows = list(group)
            indices = sorted({index for row in rows for index in row.blocks})
            blocks = {}
            for index in indices:
                dim = self.blocks[index]
                dense = np.zeros((len(rows), dim * dim), dtype=np.complex128)
                for k, row in enumerate(rows):
                    if index in row.blocks:
                        dense[k] = from_pairs(row.blocks[index]).reshape(-1)
                blocks[index] = sparse.csr_array(dense)
            batches.append(
                ConstraintBatch(
                    blocks=blocks,
                    scalars=sparse.csr_array(
                        np.asarray([row.scalars for row in rows], dtype=float).reshape(
                            len(rows), self.n_scalars
                        )
                    ),
                    rhs=np.asarray([row.rhs for row in rows], dtype=float),
                    relation=relation,
                )
            )
        problem = SdpProblem(
            block_dims=tuple(self.blocks),
            n_scalars=self.n_scalars,
            objective_blocks={
                index: from_pairs(entries)
                for index, entries in self.objective.blocks.items()
            },
            objective_scalars=np.asarray(self.objective.scalars, dtype=float),
            constraints=tuple(batches),
            sense=self.sense,
            objective_offset=self.objective.offset,
        )
        problem.validate()
        return problem


def dump_problem(problem: SdpProblem, path: Path) -> None:
    """Write ``problem`` to ``path`` as JSON."""
    path.write_text(ProblemModel.from_problem(problem).model_dump_json(indent=1))
    logger.debug("sdp problem dumped", path=str(path), constraints=problem.n_constraints)


def load_problem(path: Path) -> SdpProblem:
    """Read a problem written by [dump_problem][divisio.sdp.dump.dump_problem]."""
    return ProblemModel.model_validate_json(path.read_text()).to_problem()
