"""
Diamond norm of Hermiticity-preserving maps and channel discrimination.

The norm is computed with the semidefinite program

    minimise (u0 + u1)/2
    subject to [[Y0, -C], [-C, Y1]] ⪰ 0,  u_x·1 ⪰ Tr_out Y_x,

where ``C`` is the Choi matrix exactly as stored on a
[Channel][divisio.channels.Channel] (no transposition needed).
[constrain_diamond][divisio.diamond.constrain_diamond] adds these constraints
to any [SdpBuilder][divisio.sdp.SdpBuilder], so other programs can minimise a
diamond norm jointly with their own variables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
import structlog
from scipy import optimize

from divisio import matlin
from divisio.matlin import DimensionMismatch, HermitianOperator
from divisio.sdp import SdpBuilder, Sense, Term, solve

if TYPE_CHECKING:
    from collections.abc import Sequence

    import numpy.typing as npt

    from divisio.channels import Channel
    from divisio.matlin import ComplexMatrix
    from divisio.sdp import Block, Scalar, SdpSolution

logger = structlog.get_logger()

ZERO_MAP_TOLERANCE = 1e-14


@dataclass(frozen=True)
class DiamondNormResult:
    """Optimal point of the diamond-norm program.

    ``choi_lower_bound`` is ``‖C‖_1 / dim_in``, the value reached by the
    maximally entangled probe.
    """

    value: float
    u0: float
    u1: float
    y0: HermitianOperator
    y1: HermitianOperator
    sdp_gap: float
    choi_lower_bound: float


@dataclass(frozen=True)
class DiamondVariables:
    """Handles on the variables added by [constrain_diamond][divisio.diamond.constrain_diamond]."""

    joint: Block
    u0: Scalar
    u1: Scalar
    dim: int

    def extract(self, solution: SdpSolution, choi: ComplexMatrix, dim_in: int) -> DiamondNormResult:
        joint = solution.block(self.joint).matrix
        u0, u1 = solution.scalar(self.u0), solution.scalar(self.u1)
        return DiamondNormResult(
            value=max((u0 + u1) / 2, 0.0),
            u0=u0,
            u1=u1,
            y0=HermitianOperator(joint[: self.dim, : self.dim]),
            y1=HermitianOperator(joint[self.dim :, self.dim :]),
            sdp_gap=solution.gap,
            choi_lower_bound=matlin.trace_norm(choi) / dim_in,
        )


def constrain_diamond(
    builder: SdpBuilder,
    dim_in: int,
    dim_out: int,
    difference: Sequence[Term] = (),
    constant: npt.ArrayLike | None = None,
) -> DiamondVariables:
    """Add the diamond-norm constraints for the map with Choi ``Σ difference + constant``.

    The caller is responsible for the objective; minimising
    ``(u0 + u1)/2`` yields the norm.
    """
    dim = dim_in * dim_out
    joint = builder.block(2 * dim)
    u0, u1 = builder.scalar(), builder.scalar()
    offset = (
        np.zeros((dim, dim), dtype=np.complex128)
        if constant is None
        else np.asarray(constant, dtype=np.complex128)
    )
    builder.equal(
        [Term(joint, lambda m: m[:dim, dim:]), *difference], -offset, hermitian=False
    )
    for u, part in ((u0, slice(0, dim)), (u1, slice(dim, 2 * dim))):
        builder.psd(
            [
                Term(u, lambda _: np.eye(dim_in)),
                Term(
                    joint,
                    lambda m, part=part: -matlin.trace_out(m[part, part], (dim_in, dim_out), 1),
                ),
            ]
        )
    return DiamondVariables(joint, u0, u1, dim)


def diamond_objective(builder: SdpBuilder, variables: DiamondVariables) -> None:
    """Minimise ``(u0 + u1)/2``."""
    builder.objective([Term(variables.u0), Term(variables.u1)], weight=[[0.5]])


def diamond_norm(channel: Channel) -> DiamondNormResult:
    """``‖Φ‖_⋄`` for a Hermiticity-preserving map given as a Channel-shaped value."""
    choi = channel.choi.matrix
    dim = channel.dim_in * channel.dim_out
    if np.max(np.abs(choi)) <= ZERO_MAP_TOLERANCE:
        zero = HermitianOperator.zeros(dim)
        return DiamondNormResult(0.0, 0.0, 0.0, zero, zero, 0.0, 0.0)
    builder = SdpBuilder(Sense.minimize)
    variables = constrain_diamond(builder, channel.dim_in, channel.dim_out, constant=choi)
    diamond_objective(builder, variables)
    solution = solve(builder.build()).require_optimal()
    result = variables.extract(solution, choi, channel.dim_in)
    logger.debug("diamond norm", value=result.value, gap=result.sdp_gap)
    return result


def diamond_distance(c0: Channel, c1: Channel) -> float:
    """``‖c0 − c1‖_⋄``."""
    return diamond_norm(c0 - c1).value


def guess_probability(c0: Channel, c1: Channel, prior: float) -> float:
    """Optimal one-shot success probability of telling ``c0`` (prior ``prior``) from ``c1``.

    Entangled probes are allowed, so this is
    ``1/2 + ‖prior·c0 − (1−prior)·c1‖_⋄ / 2``.
    """
    if (c0.dim_in, c0.dim_out) != (c1.dim_in, c1.dim_out):
        raise DimensionMismatch("channels to discriminate must have the same dimensions")
    if not 0 <= prior <= 1:
        raise ValueError(f"prior must lie in [0, 1], got {prior}")
    return 0.5 + 0.5 * diamond_norm(prior * c0 - (1 - prior) * c1).value


def probe_output(channel: Channel, probe: npt.ArrayLike) -> HermitianOperator:
    """``(I ⊗ Φ)(|u⟩⟨u|)`` for a probe ``|u⟩`` on ancilla ⊗ input, ancilla of dim ``dim_in``."""
    u = np.asarray(probe, dtype=np.complex128).reshape(channel.dim_in, channel.dim_in)
    out = np.einsum("ai,bj,imjn->ambn", u, u.conj(), channel.tensor)
    dim = channel.dim_in * channel.dim_out
    return HermitianOperator(out.reshape(dim, dim))


def probe_value(channel: Channel, probe: npt.ArrayLike) -> float:
    """``‖(I ⊗ Φ)(|u⟩⟨u|)‖_1`` for a normalised probe."""
    vector = np.asarray(probe, dtype=np.complex128).reshape(-1)
    return matlin.trace_norm(probe_output(channel, vector / np.linalg.norm(vector)))


def probe_lower_bound(
    channel: Channel,
    n_samples: int,
    rng: np.random.Generator,
    *,
    refine: bool = True,
) -> float:
    """Lower bound on ``‖Φ‖_⋄`` from Haar-random pure probes.

    With ``refine`` the best sampled probe is polished by a quasi-Newton
    ascent; the bound is still the value at an actual probe.
    """
    if n_samples < 1:
        raise ValueError("at least one probe is needed")
    size = channel.dim_in * channel.dim_in
    probes = rng.standard_normal((n_samples, size)) + 1j * rng.standard_normal((n_samples, size))
    values = [probe_value(channel, probe) for probe in probes]
    best = int(np.argmax(values))
    bound = values[best]
    if refine and bound > 0:

        def negative(x: npt.NDArray[np.float64]) -> float:
            return -probe_value(channel, x[:size] + 1j * x[size:])

        start = np.concatenate([probes[best].real, probes[best].imag])
        polished = optimize.minimize(negative, start, method="BFGS")
        bound = max(bound, -float(polished.fun))
    logger.debug("probe lower bound", samples=n_samples, bound=bound)
    return bound


__all__ = [
    "DiamondNormResult",
    "DiamondVariables",
    "constrain_diamond",
    "diamond_distance",
    "diamond_norm",
    "diamond_objective",
    "guess_probability",
    "probe_lower_bound",
    "probe_output",
    "probe_value",
]
