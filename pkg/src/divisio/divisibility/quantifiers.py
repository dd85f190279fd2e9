"""Divisibility quantifiers for a two-step dynamics ``(Λ_{1|0}, Λ_{2|0})``.

Each quantifier searches for an intermediate map ``Λ_{2|1}`` on
``ℋ_1 → ℋ_2`` minimising ``‖Λ_{2|0} − Λ_{2|1} ∘ Λ_{1|0}‖_⋄`` within one SDP:
the diamond-norm constraints of [constrain_diamond][divisio.diamond.constrain_diamond]
are added to the same builder as the intermediate's own block, so the
composition equation enters the program linearly.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import StrEnum, auto
from typing import TYPE_CHECKING

import numpy as np
import structlog

from divisio import matlin
from divisio.channels import Channel, compose, identity_channel
from divisio.diamond import constrain_diamond, diamond_distance, diamond_objective
from divisio.matlin import DimensionMismatch, HermitianOperator
from divisio.sdp import Block, SdpBuilder, SdpError, SdpStatus, Sense, Term, solve
from divisio.settings import load_settings

if TYPE_CHECKING:
    from collections.abc import Sequence

    from divisio.matlin import ComplexMatrix

logger = structlog.get_logger()

ABSOLUTE_TOLERANCE = 1e-5
BOUND_SLACK = 1e-6
# decomposable maps coincide with positive maps up to 2⊗3
DECOMPOSABLE_LIMIT = 6


class UnsupportedDimension(ValueError):
    """No exact SDP characterisation is available for these dimensions."""


class DivisibilityError(ArithmeticError):
    """A divisibility result contradicts what holds for every pair."""


class TrivialBoundViolation(DivisibilityError):
    """The reported distance exceeds the cost of a trivial intermediate map."""


class DivisibilityKind(StrEnum):
    """Class of intermediate maps searched over."""

    CP = "CP"
    P_qubit = "P_qubit"


class AbsoluteFlag(StrEnum):
    """Whether the optimum is one of the two trivial intermediate maps."""

    none = auto()
    identity_optimal = auto()
    target_optimal = auto()


@dataclass(frozen=True)
class WitnessPair:
    """Certificate ``(W, Λ)`` whose objective ``Tr[Wϱ_{2|0}] + Tr[Λ]`` is positive only for non-divisible pairs.

    ``psi0`` and ``psi1`` are the unit-trace operators on ``ℋ_0`` bounding
    ``W`` through ``[[Ψ_0 ⊗ 1, W], [W, Ψ_1 ⊗ 1]] ⪰ 0``.
    """

    w: HermitianOperator
    lam: HermitianOperator
    psi0: HermitianOperator
    psi1: HermitianOperator
    objective: float


@dataclass(frozen=True)
class DivisibilityReport:
    """Optimum of a divisibility quantifier.

    ``trivial_bounds`` is ``(‖Λ_{2|0} − Λ_{1|0}‖_⋄, ‖I − Λ_{1|0}‖_⋄)``, filled in
    by [classify_absolute][divisio.divisibility.classify_absolute]; a bound is
    ``inf`` when the dimensions rule its trivial map out.
    """

    kind: DivisibilityKind
    distance: float
    intermediate: Channel
    sdp_gap: float
    solve_seconds: float
    p_decomposition: tuple[HermitianOperator, HermitianOperator] | None = None
    witness: WitnessPair | None = None
    absolute_flag: AbsoluteFlag = AbsoluteFlag.none
    trivial_bounds: tuple[float, float] | None = None

    def is_divisible(self, tolerance: float | None = None) -> bool:
        """Whether the distance is within ``tolerance`` (default ``DIVISIO_DIVISIBLE_TOLERANCE``)."""
        if tolerance is None:
            tolerance = load_settings().DIVISIBLE_TOLERANCE
        return self.distance <= tolerance


@dataclass(frozen=True)
class Feasibility:
    """Answer of [cp_feasible][divisio.divisibility.cp_feasible]; truthy when divisible."""

    divisible: bool
    intermediate: Channel | None = None

    def __bool__(self) -> bool:
        return self.divisible


@dataclass(frozen=True)
class MultiStepSummary:
    """Reports for each consecutive pair of a family ``𝒩_{k|0}``."""

    reports: tuple[DivisibilityReport, ...]
    max_distance: float
    divisible: bool


def composition_map(first: Channel, dim_out: int) -> Callable[[ComplexMatrix], ComplexMatrix]:
    """``ϱ_{2|1} ↦`` Choi of ``Λ_{2|1} ∘ first``, as a linear map on matrices."""
    d0, d1 = first.dim_in, first.dim_out
    tensor = first.tensor

    def forward(r: ComplexMatrix) -> ComplexMatrix:
        later = np.asarray(r).reshape(d1, dim_out, d1, dim_out)
        return np.einsum("ikjl,kmln->imjn", tensor, later).reshape(d0 * dim_out, -1)

    return forward


def composition_adjoint(first: Channel, w: ComplexMatrix, dim_out: int) -> ComplexMatrix:
    """Adjoint of [composition_map][divisio.divisibility.composition_map].

    ``Tr[A r] = Tr[w · forward(r)]`` for every ``r``, with ``A`` the result.
    """
    d0, d1 = first.dim_in, first.dim_out
    w_tensor = np.asarray(w).reshape(d0, dim_out, d0, dim_out)
    adjoint = np.einsum("jnim,ikjl->lnkm", w_tensor, first.tensor)
    return adjoint.reshape(d1 * dim_out, d1 * dim_out)


def _check_pair(target: Channel, first: Channel) -> None:
    if target.dim_in != first.dim_in:
        raise DimensionMismatch(
            f"target starts on dim {target.dim_in} but first step on dim {first.dim_in}"
        )


def _scalar(value: complex) -> ComplexMatrix:
    return np.full((1, 1), value, dtype=np.complex128)


@dataclass(frozen=True)
class _Piece:
    """A PSD block and the linear map taking it to its share of ``ϱ_{2|1}``."""

    block: Block
    to_choi: Callable[[ComplexMatrix], ComplexMatrix]


def _intermediate(builder: SdpBuilder, kind: DivisibilityKind, d1: int, d2: int) -> list[_Piece]:
    """Blocks parameterising a trace-preserving intermediate map of the given kind."""
    pieces = [_Piece(builder.block(d1 * d2), lambda r: r)]
    if kind is DivisibilityKind.P_qubit:
        # σ_B = Q^{T_1} with Q ⪰ 0
        pieces.append(
            _Piece(builder.block(d1 * d2), lambda q: matlin.transpose_on(q, (d1, d2), 0))
        )
    builder.equal(
        [
            Term(piece.block, lambda x, f=piece.to_choi: matlin.trace_out(f(x), (d1, d2), 1))
            for piece in pieces
        ],
        np.eye(d1),
    )
    return pieces


def _distance(target: Channel, first: Channel, kind: DivisibilityKind) -> DivisibilityReport:
    _check_pair(target, first)
    d0, d1, d2 = first.dim_in, first.dim_out, target.dim_out
    builder = SdpBuilder(Sense.minimize)
    pieces = _intermediate(builder, kind, d1, d2)
    forward = composition_map(first, d2)
    variables = constrain_diamond(
        builder,
        d0,
        d2,
        difference=[
            Term(piece.block, lambda x, f=piece.to_choi: -forward(f(x))) for piece in pieces
        ],
        constant=target.choi.matrix,
    )
    diamond_objective(builder, variables)
    solution = solve(builder.build()).require_optimal()
    shares = [
        HermitianOperator(piece.to_choi(solution.block(piece.block).matrix))
        for piece in pieces
    ]
    intermediate = Channel(d1, d2, sum(shares[1:], start=shares[0]))
    result = variables.extract(solution, (target - compose(intermediate, first)).choi.matrix, d0)
    report = DivisibilityReport(
        kind=kind,
        distance=result.value,
        intermediate=intermediate,
        sdp_gap=solution.gap,
        solve_seconds=solution.solve_seconds,
        p_decomposition=(shares[0], shares[1]) if kind is DivisibilityKind.P_qubit else None,
    )
    logger.debug(
        "divisibility distance",
        kind=kind,
        distance=report.distance,
        gap=report.sdp_gap,
        dims=(d0, d1, d2),
    )
    return report


def cp_distance(target: Channel, first: Channel, *, witness: bool = False) -> DivisibilityReport:
    """``min ‖target − Λ ∘ first‖_⋄`` over CPTP intermediate maps ``Λ``.

    With ``witness`` the dual certificate of
    [extract_witness][divisio.divisibility.extract_witness] is attached.
    """
    report = _distance(target, first, DivisibilityKind.CP)
    if witness:
        report = replace(report, witness=extract_witness(target, first))
    return report


def p_distance_qubit(target: Channel, first: Channel) -> DivisibilityReport:
    """``min ‖target − Λ ∘ first‖_⋄`` over decomposable trace-preserving ``Λ = Λ_A + Λ_B ∘ T``.

    For qubit intermediates (and the 2↔3 cases) decomposable maps are exactly
    the positive maps, so this quantifies P-divisibility.

    Raises:
        UnsupportedDimension: the intermediate acts on a larger pair of spaces.
    """
    _check_pair(target, first)
    d1, d2 = first.dim_out, target.dim_out
    if d1 * d2 > DECOMPOSABLE_LIMIT:
        raise UnsupportedDimension(
            f"positive maps {d1}→{d2} are not all decomposable; only products up to "
            f"{DECOMPOSABLE_LIMIT} are supported"
        )
    return _distance(target, first, DivisibilityKind.P_qubit)


def cp_feasible(target: Channel, first: Channel, *, strict: bool = False) -> Feasibility:
    """Whether some CPTP ``Λ`` satisfies ``Λ ∘ first = target``.

    By default this thresholds [cp_distance][divisio.divisibility.cp_distance]
    at ``DIVISIO_DIVISIBLE_TOLERANCE``. With ``strict`` the pure feasibility
    program is solved instead and infeasibility comes from the solver's
    certificate.

    Raises:
        SdpError: the strict program ended neither optimal nor infeasible.
    """
    if not strict:
        report = cp_distance(target, first)
        if report.is_divisible():
            return Feasibility(True, report.intermediate)
        return Feasibility(False)
    _check_pair(target, first)
    d1, d2 = first.dim_out, target.dim_out
    builder = SdpBuilder(Sense.minimize)
    (piece,) = _intermediate(builder, DivisibilityKind.CP, d1, d2)
    builder.equal([Term(piece.block, composition_map(first, d2))], target.choi.matrix)
    solution = solve(builder.build())
    match solution.status:
        case SdpStatus.optimal:
            return Feasibility(True, Channel(d1, d2, solution.block(piece.block)))
        case SdpStatus.primal_infeasible:
            return Feasibility(False)
        case _:
            raise SdpError(solution)


def extract_witness(target: Channel, first: Channel) -> WitnessPair:
    """Solve the dual program for a certificate of non-divisibility.

    maximise ``Tr[W ϱ_{2|0}] + Tr[Λ]`` subject to
    ``[[Ψ_0 ⊗ 1, W], [W, Ψ_1 ⊗ 1]] ⪰ 0``, ``Tr Ψ_x = 1`` and
    ``Λ ⊗ 1 ⪯ −M†(W)``, where ``M`` maps ``ϱ_{2|1}`` to the Choi matrix of
    ``Λ_{2|1} ∘ Λ_{1|0}``. The optimum equals
    [cp_distance][divisio.divisibility.cp_distance].
    """
    _check_pair(target, first)
    d0, d1, d2 = first.dim_in, first.dim_out, target.dim_out
    n = d0 * d2
    choi = target.choi.matrix
    builder = SdpBuilder(Sense.maximize)
    joint = builder.block(2 * n)
    psi0, psi1 = builder.hermitian(d0), builder.hermitian(d0)
    lam = builder.hermitian(d1)

    def w_of(m: ComplexMatrix) -> ComplexMatrix:
        return (m[:n, n:] + m[n:, :n]) / 2

    for psi, part in ((psi0, slice(0, n)), (psi1, slice(n, 2 * n))):
        builder.equal(
            [
                Term(joint, lambda m, part=part: m[part, part]),
                Term(psi, lambda s: -matlin.kron(s, np.eye(d2))),
            ],
            np.zeros((n, n)),
        )
        builder.equal([Term(psi, lambda s: _scalar(np.trace(s)))], [[1]])
    # the off-diagonal block is Hermitian
    builder.equal([Term(joint, lambda m: (m[:n, n:] - m[n:, :n]) / 2j)], np.zeros((n, n)))
    builder.psd(
        [
            Term(joint, lambda m: -composition_adjoint(first, w_of(m), d2)),
            Term(lam, lambda x: -matlin.kron(x, np.eye(d2))),
        ]
    )
    builder.objective(
        [
            Term(joint, lambda m: _scalar(np.trace(w_of(m) @ choi))),
            Term(lam, lambda x: _scalar(np.trace(x))),
        ]
    )
    solution = solve(builder.build()).require_optimal()
    block = solution.block(joint).matrix
    w = HermitianOperator(w_of(block))
    lam_value = solution.hermitian(lam)
    objective = float(np.trace(w.matrix @ choi).real) + lam_value.trace()
    logger.debug("witness extracted", objective=objective, gap=solution.gap)
    return WitnessPair(
        w=w,
        lam=lam_value,
        psi0=solution.hermitian(psi0),
        psi1=solution.hermitian(psi1),
        objective=objective,
    )


def _bound(c0: Channel, c1: Channel) -> float:
    if (c0.dim_in, c0.dim_out) != (c1.dim_in, c1.dim_out):
        return math.inf
    return diamond_distance(c0, c1)


def classify_absolute(
    report: DivisibilityReport,
    target: Channel,
    first: Channel,
    *,
    tolerance: float | None = None,
) -> DivisibilityReport:
    """Fill in the trivial bounds and flag an optimum at a trivial intermediate map.

    Choosing ``Λ_{2|1} = I`` costs ``‖Λ_{2|0} − Λ_{1|0}‖_⋄`` and choosing
    ``Λ_{2|1} = Λ_{2|0}`` costs at most ``‖I − Λ_{1|0}‖_⋄``, so the distance
    never exceeds either; a report that does raises
    [TrivialBoundViolation][divisio.divisibility.TrivialBoundViolation].
    The optimum is flagged only for a pair that is not divisible at
    ``tolerance`` and where neither bound is itself zero. When the distance
    reaches a bound the optimum is degenerate, and the report's intermediate
    map is replaced by the trivial one (identity first).
    """
    d1 = first.dim_out
    bounds = (
        _bound(target, first),
        _bound(identity_channel(first.dim_in), first) if first.dim_in == d1 else math.inf,
    )
    if report.distance > min(bounds) + BOUND_SLACK:
        raise TrivialBoundViolation(
            f"{report.kind} distance {report.distance:.9g} exceeds the trivial bound "
            f"{min(bounds):.9g}"
        )
    flag = AbsoluteFlag.none
    intermediate = report.intermediate
    nontrivial = min(bounds) > ABSOLUTE_TOLERANCE and not report.is_divisible(tolerance)
    if nontrivial:
        if report.distance >= bounds[0] - ABSOLUTE_TOLERANCE:
            intermediate = identity_channel(d1)
            flag = AbsoluteFlag.identity_optimal
        elif report.distance >= bounds[1] - ABSOLUTE_TOLERANCE:
            intermediate = target
            flag = AbsoluteFlag.target_optimal
        elif _bound(intermediate, identity_channel(d1)) <= ABSOLUTE_TOLERANCE:
            flag = AbsoluteFlag.identity_optimal
        elif _bound(intermediate, target) <= ABSOLUTE_TOLERANCE:
            flag = AbsoluteFlag.target_optimal
    return replace(report, intermediate=intermediate, absolute_flag=flag, trivial_bounds=bounds)


_QUANTIFIERS = {
    DivisibilityKind.CP: cp_distance,
    DivisibilityKind.P_qubit: p_distance_qubit,
}


def multi_step(
    family: Sequence[Channel],
    mode: DivisibilityKind = DivisibilityKind.CP,
    *,
    tolerance: float | None = None,
) -> MultiStepSummary:
    """Quantify each step ``𝒩_{k|0} → 𝒩_{k+1|0}`` of a family referenced to time 0.

    The steps are independent programs and run on a thread pool capped by
    ``DIVISIO_THREADS``. The family is divisible when every step is.
    """
    if len(family) < 2:  # noqa: PLR2004
        raise ValueError("a family needs at least two maps")
    for earlier, later in zip(family, family[1:], strict=False):
        if later.dim_in != earlier.dim_in:
            raise DimensionMismatch("all maps of a family must start on the same space")
    settings = load_settings()
    tolerance = settings.DIVISIBLE_TOLERANCE if tolerance is None else tolerance
    quantifier = _QUANTIFIERS[mode]
    with ThreadPoolExecutor(max_workers=min(settings.worker_count(), len(family) - 1)) as pool:
        reports = tuple(pool.map(quantifier, family[1:], family[:-1]))
    max_distance = max(report.distance for report in reports)
    logger.info(
        "family quantified", mode=mode, steps=len(reports), max_distance=max_distance
    )
    return MultiStepSummary(reports, max_distance, max_distance <= tolerance)
