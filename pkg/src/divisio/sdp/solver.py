"""cvxpy backend for [SdpProblem][divisio.sdp.problem.SdpProblem]."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from enum import StrEnum
from typing import TYPE_CHECKING, Any

import cvxpy as cp
import numpy as np
import structlog
from cvxpy import settings as cvxpy_keys
from scipy import sparse

from divisio.matlin import HermitianOperator
from divisio.sdp.problem import (
    Block,
    FreeHermitian,
    Relation,
    Scalar,
    Sense,
    hermitian_basis,
)
from divisio.settings import load_settings

if TYPE_CHECKING:
    import numpy.typing as npt

    from divisio.sdp.problem import ConstraintBatch, SdpProblem

logger = structlog.get_logger()

PRIMAL_RESIDUAL_TOLERANCE = 1e-8


class SdpStatus(StrEnum):
    """Outcome of a solve."""

    optimal = "Optimal"
    primal_infeasible = "PrimalInfeasible"
    dual_infeasible = "DualInfeasible"
    numerical_failure = "NumericalFailure"


class SdpError(RuntimeError):
    """A solve did not reach an optimal solution."""

    def __init__(self, solution: SdpSolution):
        super().__init__(
            f"SDP solve ended with status {solution.status} "
            f"(backend status {solution.backend_status!r})"
        )
        self.solution = solution


def embed_complex(h: HermitianOperator) -> npt.NDArray[np.float64]:
    """Real symmetric embedding ``A + iB ↦ [[A, -B], [B, A]]``.

    The embedding is PSD exactly when ``h`` is, has twice its trace, and
    carries each eigenvalue of ``h`` with doubled multiplicity.
    """
    a, b = h.matrix.real, h.matrix.imag
    return np.block([[a, -b], [b, a]])


@dataclass(frozen=True)
class SdpSolution:
    """Primal optimum, dual bound and diagnostics of one solve.

    ``dual_multipliers`` follows cvxpy's sign convention, one entry per
    scalar constraint in problem order. On infeasible outcomes it holds the
    backend's certificate ray in the canonical program's coordinates and
    ``residual`` is that ray's normalised violation.
    """

    status: SdpStatus
    primal_value: float
    dual_value: float
    primal_blocks: tuple[HermitianOperator, ...]
    scalars: npt.NDArray[np.float64]
    dual_multipliers: npt.NDArray[np.float64]
    gap: float
    residual: float
    solve_seconds: float
    backend_status: str

    def require_optimal(self) -> SdpSolution:
        """Return ``self``, raising [SdpError][divisio.sdp.solver.SdpError] unless optimal."""
        if self.status is not SdpStatus.optimal:
            raise SdpError(self)
        return self

    def block(self, handle: Block) -> HermitianOperator:
        """Optimal value of a PSD block."""
        return self.primal_blocks[handle.index]

    def scalar(self, handle: Scalar) -> float:
        """Optimal value of a free scalar."""
        return float(self.scalars[handle.index])

    def hermitian(self, handle: FreeHermitian) -> HermitianOperator:
        """Optimal value of a free Hermitian matrix."""
        coordinates = self.scalars[list(handle.scalars)]
        return HermitianOperator(
            np.einsum("k,kab->ab", coordinates, hermitian_basis(handle.dim))
        )


class _EmbeddedBlock:
    """A complex Hermitian block ``X = A + iB`` carried as real cvxpy variables.

    ``A`` is a symmetric variable, ``B`` is antisymmetric by construction from
    its strictly upper triangle, and ``[[A, -B], [B, A]]`` is the cone member.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self.real = cp.Variable((dim, dim), symmetric=True)
        upper = np.triu_indices(dim, 1)
        self._ij = upper[0] * dim + upper[1]
        self._ji = upper[1] * dim + upper[0]
        if self._ij.size:
            self.upper = cp.Variable(self._ij.size)
            count = self._ij.size
            spread = sparse.csr_array(
                (
                    np.concatenate([np.ones(count), -np.ones(count)]),
                    (np.concatenate([self._ij, self._ji]), np.tile(np.arange(count), 2)),
                ),
                shape=(dim * dim, count),
            )
            self.imag = cp.reshape(spread @ self.upper, (dim, dim), order="C")
        else:
            self.upper = None
            self.imag = cp.Constant(np.zeros((dim, dim)))
        self.embedded = cp.symmetric_wrap(
            cp.bmat([[self.real, -self.imag], [self.imag, self.real]])
        )

    def linear(self, rows: sparse.csr_array) -> cp.Expression:
        """``Tr[K_k X]`` for each row ``k`` of flattened Hermitian coefficients."""
        expression = rows.real @ cp.reshape(self.real, (self.dim * self.dim,), order="C")
        if self.upper is not None:
            imag = rows.imag
            expression = expression + (imag[:, self._ij] - imag[:, self._ji]) @ self.upper
        return expression

    def value(self) -> HermitianOperator:
        return HermitianOperator(self.real.value + 1j * np.asarray(self.imag.value))


@dataclass(frozen=True)
class SolveOptions:
    """Backend choice and termination criteria for one solve."""

    gap_tolerance: float
    max_iterations: int
    solver: str

    @classmethod
    def resolve(
        cls,
        gap_tolerance: float | None = None,
        max_iterations: int | None = None,
        solver: str | None = None,
    ) -> SolveOptions:
        """Fill the unset options from [DivisioSettings][divisio.settings.DivisioSettings]."""
        settings = load_settings()
        return cls(
            gap_tolerance=settings.GAP_TOLERANCE if gap_tolerance is None else gap_tolerance,
            max_iterations=settings.MAX_ITERATIONS if max_iterations is None else max_iterations,
            solver=settings.SOLVER if solver is None else solver,
        )

    def backend_options(self) -> dict[str, float | int]:
        match self.solver.upper():
            case "CLARABEL":
                return {
                    "max_iter": self.max_iterations,
                    "tol_gap_abs": self.gap_tolerance / 10,
                    "tol_gap_rel": self.gap_tolerance / 10,
                    "tol_feas": PRIMAL_RESIDUAL_TOLERANCE / 10,
                }
            case "SCS":
                return {"max_iters": self.max_iterations * 100, "eps": self.gap_tolerance}
            case _:
                return {}


_STATUS_MAP = {
    cp.OPTIMAL: SdpStatus.optimal,
    cp.OPTIMAL_INACCURATE: SdpStatus.optimal,
    cp.INFEASIBLE: SdpStatus.primal_infeasible,
    cp.INFEASIBLE_INACCURATE: SdpStatus.primal_infeasible,
    cp.UNBOUNDED: SdpStatus.dual_infeasible,
    cp.UNBOUNDED_INACCURATE: SdpStatus.dual_infeasible,
}


@dataclass(frozen=True)
class _BackendResult:
    """What the conic backend reports beyond cvxpy's unpacked values.

    Objectives refer to the canonical program ``min cᵀx s.t. Ax + s = b,
    s ∈ K`` that cvxpy hands to the backend, whose dual is
    ``max −bᵀz s.t. Aᵀz + c = 0, z ∈ K*``.
    """

    primal_objective: float | None = None
    dual_objective: float | None = None
    certificate: npt.NDArray[np.float64] = field(default_factory=lambda: np.zeros(0))
    certificate_residual: float = float("inf")


def _clarabel_result(raw: Any, data: dict[str, Any], status: str) -> _BackendResult:
    A, b, c = data[cvxpy_keys.A], data[cvxpy_keys.B], data[cvxpy_keys.C]
    x, s, z = (np.asarray(vector, dtype=float) for vector in (raw.x, raw.s, raw.z))
    if status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        # Farkas ray: Aᵀz = 0, z ∈ K*, bᵀz < 0
        scale = abs(float(b @ z)) or 1.0
        return _BackendResult(
            certificate=z,
            certificate_residual=float(np.max(np.abs(A.T @ z), initial=0)) / scale,
        )
    if status in (cp.UNBOUNDED, cp.UNBOUNDED_INACCURATE):
        # improving ray: Ax + s = 0, s ∈ K, cᵀx < 0
        scale = abs(float(c @ x)) or 1.0
        return _BackendResult(
            certificate=x,
            certificate_residual=float(np.max(np.abs(A @ x + s), initial=0)) / scale,
        )
    return _BackendResult(primal_objective=float(c @ x), dual_objective=-float(b @ z))


def _run_backend(
    program: cp.Problem, solver: str, options: dict[str, Any]
) -> tuple[_BackendResult, float]:
    """Solve ``program`` in place, returning backend detail and the seconds spent in the solver."""
    if solver.upper() != cp.CLARABEL:
        start = time.perf_counter()
        program.solve(solver=solver, **options)
        return _BackendResult(), time.perf_counter() - start
    data, chain, inverse_data = program.get_problem_data(cp.CLARABEL)
    start = time.perf_counter()
    raw = chain.solve_via_data(program, data, solver_opts=options)
    elapsed = time.perf_counter() - start
    program.unpack_results(raw, chain, inverse_data)
    return _clarabel_result(raw, data, program.status), elapsed


def solve(
    problem: SdpProblem,
    *,
    gap_tolerance: float | None = None,
    max_iterations: int | None = None,
    solver: str | None = None,
) -> SdpSolution:
    """Solve ``problem``; unset options fall back to [DivisioSettings][divisio.settings.DivisioSettings].

    With Clarabel the dual value is the backend's dual objective ``−bᵀz``
    mapped back to the problem's sense and offset, and the gap is
    ``|primal − dual| / (1 + |primal|)``. An optimal status whose gap exceeds
    ``gap_tolerance`` is reported as a numerical failure. On infeasible
    outcomes ``dual_multipliers`` holds the backend's certificate (a Farkas
    ray ``z`` for primal infeasibility, an improving ray ``x`` for dual
    infeasibility) and ``residual`` its normalised violation.

    Other backends expose no dual objective; there the gap is estimated from
    the complementarity ``Σ_b Tr[S_b Z_b]`` and the inequality slack-dual
    products.
    """
    options = SolveOptions.resolve(gap_tolerance, max_iterations, solver)
    blocks = [_EmbeddedBlock(dim) for dim in problem.block_dims]
    scalars = cp.Variable(problem.n_scalars) if problem.n_scalars else None
    cones = [block.embedded >> 0 for block in blocks]

    def lhs(batch: ConstraintBatch) -> cp.Expression:
        terms = [blocks[index].linear(rows) for index, rows in batch.blocks.items()]
        if scalars is not None and batch.scalars.nnz:
            terms.append(batch.scalars @ scalars)
        return sum(terms, start=cp.Constant(np.zeros(batch.rows)))

    linear: list[tuple[cp.Expression, cp.Constraint, Relation, npt.NDArray[np.float64]]] = []
    for batch in problem.constraints:
        expression = lhs(batch)
        constraint = (
            expression == batch.rhs
            if batch.relation is Relation.equal
            else expression >= batch.rhs
        )
        linear.append((expression, constraint, batch.relation, batch.rhs))

    objective_terms: list[cp.Expression] = [
        blocks[index].linear(sparse.csr_array(coefficient.reshape(1, -1)))
        for index, coefficient in problem.objective_blocks.items()
    ]
    if scalars is not None and np.any(problem.objective_scalars):
        objective_terms.append(problem.objective_scalars @ scalars)
    objective_expression = sum(
        (cp.sum(term) for term in objective_terms), start=cp.Constant(problem.objective_offset)
    )
    objective = (
        cp.Maximize(objective_expression)
        if problem.sense is Sense.maximize
        else cp.Minimize(objective_expression)
    )
    program = cp.Problem(objective, [*cones, *(item[1] for item in linear)])

    start = time.perf_counter()
    try:
        backend, elapsed = _run_backend(program, options.solver, options.backend_options())
    except cp.error.SolverError:
        logger.warning("sdp backend failed", solver=options.solver, exc_info=True)
        return _failed(
            problem, SdpStatus.numerical_failure, "solver_error", time.perf_counter() - start
        )

    status = _STATUS_MAP.get(program.status, SdpStatus.numerical_failure)
    if status is not SdpStatus.optimal:
        logger.warning(
            "sdp not solved",
            status=status,
            backend_status=program.status,
            certificate_residual=backend.certificate_residual,
        )
        return replace(
            _failed(problem, status, program.status, elapsed),
            dual_multipliers=backend.certificate,
            residual=backend.certificate_residual,
        )

    primal = float(program.value)
    residual = 0.0
    complementarity = sum(
        abs(float(np.trace(cone.dual_value @ block.embedded.value)))
        for cone, block in zip(cones, blocks, strict=True)
    )
    for expression, constraint, relation, rhs in linear:
        difference = np.atleast_1d(expression.value) - rhs
        if relation is Relation.equal:
            residual = max(residual, float(np.max(np.abs(difference), initial=0)))
        else:
            residual = max(residual, float(np.max(-difference, initial=0)))
            complementarity += float(
                np.sum(np.abs(_multipliers(constraint, rhs.shape[0]) * difference))
            )
    direction = 1.0 if problem.sense is Sense.minimize else -1.0
    if backend.dual_objective is not None and backend.primal_objective is not None:
        dual = primal + direction * (backend.dual_objective - backend.primal_objective)
    else:
        dual = primal - direction * complementarity
    gap = abs(primal - dual) / (1 + abs(primal))

    if gap > options.gap_tolerance or (
        program.status == cp.OPTIMAL_INACCURATE and residual > PRIMAL_RESIDUAL_TOLERANCE
    ):
        logger.warning(
            "sdp optimum not certified",
            backend_status=program.status,
            gap=gap,
            residual=residual,
            gap_tolerance=options.gap_tolerance,
        )
        status = SdpStatus.numerical_failure
    logger.debug(
        "sdp solved",
        status=status,
        value=primal,
        gap=gap,
        residual=residual,
        blocks=problem.block_dims,
        constraints=problem.n_constraints,
        seconds=elapsed,
    )
    return SdpSolution(
        status=status,
        primal_value=primal,
        dual_value=dual,
        primal_blocks=tuple(block.value() for block in blocks),
        scalars=np.asarray(scalars.value, dtype=float) if scalars is not None else np.zeros(0),
        dual_multipliers=np.concatenate(
            [_multipliers(constraint, rhs.shape[0]) for _, constraint, _, rhs in linear]
        )
        if linear
        else np.zeros(0),
        gap=gap,
        residual=residual,
        solve_seconds=elapsed,
        backend_status=program.status,
    )


def _failed(
    problem: SdpProblem, status: SdpStatus, backend_status: str, elapsed: float
) -> SdpSolution:
    return SdpSolution(
        status=status,
        primal_value=float("nan"),
        dual_value=float("nan"),
        primal_blocks=(),
        scalars=np.zeros(problem.n_scalars),
        dual_multipliers=np.zeros(0),
        gap=float("inf"),
        residual=float("inf"),
        solve_seconds=elapsed,
        backend_status=backend_status,
    )


def _multipliers(constraint: cp.Constraint, rows: int) -> npt.NDArray[np.float64]:
    # constant rows may come back without a dual
    if constraint.dual_value is None:
        return np.zeros(rows)
    return np.atleast_1d(np.asarray(constraint.dual_value, dtype=float))
