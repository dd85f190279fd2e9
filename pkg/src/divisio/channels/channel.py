"""The Choi representation of linear maps and the operations defined on it."""

from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum, auto
from typing import TYPE_CHECKING

import numpy as np
import structlog

from divisio import matlin
from divisio.matlin import DimensionMismatch, HermitianOperator, SubsystemShape

if TYPE_CHECKING:
    from collections.abc import Sequence

    import numpy.typing as npt

    from divisio.matlin import ComplexMatrix

logger = structlog.get_logger()

KRAUS_COMPLETENESS_TOLERANCE = 1e-6
INVERTIBILITY_THRESHOLD = 1e-10


class IncompleteKraus(ValueError):
    """Kraus operators do not sum to the identity, ``Σ K†K ≠ 1``."""


class NonInvertible(ArithmeticError):
    """A channel's transfer matrix is singular."""


@dataclass(frozen=True)
class Channel:
    """A Hermiticity-preserving linear map stored by its Choi matrix.

    ``choi`` is ``Σ_ij |i⟩⟨j| ⊗ N(|i⟩⟨j|)`` over input ⊗ output, unnormalised
    (trace ``dim_in`` for trace-preserving maps). The transposed object
    ``ρ_{B|A}`` is available through [rho_from_choi][divisio.channels.rho_from_choi].

    Complete positivity is not enforced, so differences and inverses of
    channels are ``Channel`` values too; check with
    [is_cptp][divisio.channels.is_cptp].
    """

    dim_in: int
    dim_out: int
    choi: HermitianOperator

    def __post_init__(self):
        if self.choi.dim != self.dim_in * self.dim_out:
            raise DimensionMismatch(
                f"Choi of dim {self.choi.dim} does not match {self.dim_in}→{self.dim_out}"
            )

    @property
    def tensor(self) -> npt.NDArray[np.complex128]:
        """The Choi matrix as a ``(in, out, in, out)`` tensor."""
        return self.choi.matrix.reshape(self.dim_in, self.dim_out, self.dim_in, self.dim_out)

    @property
    def shape(self) -> SubsystemShape:
        return SubsystemShape((self.dim_in, self.dim_out))

    def _check_same_shape(self, other: Channel) -> None:
        if (self.dim_in, self.dim_out) != (other.dim_in, other.dim_out):
            raise DimensionMismatch(
                f"maps {self.dim_in}→{self.dim_out} and {other.dim_in}→{other.dim_out} differ in shape"
            )

    def __add__(self, other: Channel) -> Channel:
        self._check_same_shape(other)
        return Channel(self.dim_in, self.dim_out, self.choi + other.choi)

    def __sub__(self, other: Channel) -> Channel:
        self._check_same_shape(other)
        return Channel(self.dim_in, self.dim_out, self.choi - other.choi)

    def __mul__(self, scalar: float) -> Channel:
        return Channel(self.dim_in, self.dim_out, self.choi * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> Channel:
        return Channel(self.dim_in, self.dim_out, -self.choi)


def channel_from_tensor(tensor: npt.ArrayLike) -> Channel:
    """Build a channel from its ``(in, out, in, out)`` Choi tensor."""
    array = np.asarray(tensor, dtype=np.complex128)
    dim_in, dim_out = array.shape[:2]
    if array.shape != (dim_in, dim_out, dim_in, dim_out):
        raise DimensionMismatch(f"not a Choi tensor: shape {array.shape}")
    return Channel(dim_in, dim_out, HermitianOperator(array.reshape(dim_in * dim_out, -1)))


@dataclass(frozen=True)
class KrausSet:
    """Kraus operators ``K_a`` of shape ``dim_out × dim_in``."""

    dim_in: int
    dim_out: int
    operators: tuple[ComplexMatrix, ...]

    @classmethod
    def of(cls, operators: Sequence[npt.ArrayLike]) -> KrausSet:
        """Infer the dimensions from the operators themselves."""
        matrices = tuple(matlin.as_matrix(k) for k in operators)
        if not matrices:
            raise IncompleteKraus("no Kraus operators given")
        dim_out, dim_in = matrices[0].shape
        return cls(dim_in, dim_out, matrices)

    def __post_init__(self):
        for k in self.operators:
            if k.shape != (self.dim_out, self.dim_in):
                raise DimensionMismatch(
                    f"Kraus operator of shape {k.shape}, expected {(self.dim_out, self.dim_in)}"
                )

    def completeness_error(self) -> float:
        """Largest entry of ``|Σ K†K − 1|``."""
        total = sum(matlin.dagger(k) @ k for k in self.operators)
        return float(np.max(np.abs(total - np.eye(self.dim_in))))


def choi_from_kraus(kraus: KrausSet) -> Channel:
    """Choi matrix of ``ρ ↦ Σ_a K_a ρ K_a†``.

    Raises:
        IncompleteKraus: completeness fails by more than 1e-6.
    """
    error = kraus.completeness_error()
    if error > KRAUS_COMPLETENESS_TOLERANCE:
        raise IncompleteKraus(f"Σ K†K deviates from the identity by {error:.2e}")
    stacked = np.stack(kraus.operators)
    return channel_from_tensor(np.einsum("ami,anj->imjn", stacked, stacked.conj()))


def apply(channel: Channel, state: HermitianOperator) -> HermitianOperator:
    """``N(σ) = Σ_ij σ_ij N(|i⟩⟨j|)``."""
    if state.dim != channel.dim_in:
        raise DimensionMismatch(
            f"state of dim {state.dim} fed to a map with input dim {channel.dim_in}"
        )
    return HermitianOperator(np.einsum("ij,imjn->mn", state.matrix, channel.tensor))


def compose(later: Channel, earlier: Channel) -> Channel:
    """Choi matrix of ``later ∘ earlier``."""
    if earlier.dim_out != later.dim_in:
        raise DimensionMismatch(
            f"cannot compose {later.dim_in}→{later.dim_out} after {earlier.dim_in}→{earlier.dim_out}"
        )
    return channel_from_tensor(np.einsum("ikjl,kmln->imjn", earlier.tensor, later.tensor))


class CptpVerdict(StrEnum):
    cptp = auto()
    not_cp = auto()
    not_tp = auto()
    neither = auto()


@dataclass(frozen=True)
class CptpReport:
    """Outcome of [is_cptp][divisio.channels.is_cptp] with its diagnostics."""

    verdict: CptpVerdict
    min_eigenvalue: float
    trace_deviation: float

    def __bool__(self) -> bool:
        return self.verdict is CptpVerdict.cptp


def is_cptp(channel: Channel, tol: float = 1e-8) -> CptpReport:
    """Check positivity of the Choi matrix and ``Tr_out ϱ = 1``.

    ``trace_deviation`` is the largest entry of ``|Tr_out ϱ − 1|``.
    """
    min_eigenvalue = channel.choi.min_eigenvalue()
    reduced = matlin.partial_trace(channel.choi, channel.shape, 1)
    deviation = float(np.max(np.abs(reduced.matrix - np.eye(channel.dim_in))))
    cp, tp = min_eigenvalue >= -tol, deviation <= tol
    if cp and tp:
        verdict = CptpVerdict.cptp
    elif tp:
        verdict = CptpVerdict.not_cp
    elif cp:
        verdict = CptpVerdict.not_tp
    else:
        verdict = CptpVerdict.neither
    return CptpReport(verdict, min_eigenvalue, deviation)


def transfer_matrix(channel: Channel) -> ComplexMatrix:
    """Natural representation ``T[(m,n),(i,j)] = N(|i⟩⟨j|)[m,n]`` acting on row-major ``vec``."""
    din, dout = channel.dim_in, channel.dim_out
    return channel.tensor.transpose(1, 3, 0, 2).reshape(dout * dout, din * din)


def channel_from_transfer(transfer: npt.ArrayLike, dim_in: int, dim_out: int) -> Channel:
    """Inverse of [transfer_matrix][divisio.channels.transfer_matrix]."""
    tensor = np.asarray(transfer).reshape(dim_out, dim_out, dim_in, dim_in)
    return channel_from_tensor(tensor.transpose(2, 0, 3, 1))


def try_invert(channel: Channel) -> Channel:
    """The linear inverse map, which need not be CP.

    Raises:
        NonInvertible: the transfer matrix has a singular value below 1e-10.
    """
    if channel.dim_in != channel.dim_out:
        raise DimensionMismatch("only maps with equal input and output dims are invertible")
    u, singular, vh = np.linalg.svd(transfer_matrix(channel))
    if singular[-1] < INVERTIBILITY_THRESHOLD:
        raise NonInvertible(
            f"transfer matrix has singular value {singular[-1]:.2e} below {INVERTIBILITY_THRESHOLD:.0e}"
        )
    inverse = matlin.dagger(vh) @ np.diag(1 / singular) @ matlin.dagger(u)
    return channel_from_transfer(inverse, channel.dim_out, channel.dim_in)


def rho_from_choi(channel: Channel) -> HermitianOperator:
    """``ρ_{B|A} = ϱ^{T_A}``, the partially transposed Choi object."""
    return matlin.partial_transpose(channel.choi, channel.shape, 0)


def choi_from_rho(rho: HermitianOperator, dim_in: int, dim_out: int) -> Channel:
    """Inverse of [rho_from_choi][divisio.channels.rho_from_choi]."""
    shape = SubsystemShape((dim_in, dim_out))
    return Channel(dim_in, dim_out, matlin.partial_transpose(rho, shape, 0))
