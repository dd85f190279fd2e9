"""Standard-form semidefinite programs and the builder that lowers matrix constraints to them."""

from __future__ import annotations

from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import StrEnum, auto
from math import sqrt
from typing import TYPE_CHECKING

import numpy as np
import structlog
from scipy import sparse

if TYPE_CHECKING:
    import numpy.typing as npt

    from divisio.matlin import ComplexMatrix

logger = structlog.get_logger()

type LinearMap = Callable[[ComplexMatrix], ComplexMatrix]
HERMITIAN_COEFFICIENT_TOLERANCE = 1e-12


class Relation(StrEnum):
    """Relation between a constraint's left-hand side and its right-hand side."""

    equal = auto()
    at_least = auto()


class Sense(StrEnum):
    """Optimisation direction."""

    maximize = auto()
    minimize = auto()


class MalformedProblem(ValueError):
    """An SdpProblem violates its structural invariants."""


def hermitian_basis(dim: int) -> npt.NDArray[np.complex128]:
    """Orthonormal basis of the real space of ``dim × dim`` Hermitian matrices.

    Elements are ``E_ii``, then ``(E_ij + E_ji)/√2`` and ``i(E_ij - E_ji)/√2``
    for ``i < j``; there are exactly ``dim²`` of them.
    """
    basis = np.zeros((dim * dim, dim, dim), dtype=np.complex128)
    k = 0
    for i in range(dim):
        basis[k, i, i] = 1
        k += 1
    for i in range(dim):
        for j in range(i + 1, dim):
            basis[k, i, j] = basis[k, j, i] = 1 / sqrt(2)
            basis[k + 1, i, j] = 1j / sqrt(2)
            basis[k + 1, j, i] = -1j / sqrt(2)
            k += 2
    return basis


def entry_functionals(dim: int) -> npt.NDArray[np.complex128]:
    """Functionals ``G`` with ``Re Tr[G Y]`` reading the real then imaginary part of each entry of ``Y``."""
    units = np.zeros((dim * dim, dim, dim), dtype=np.complex128)
    for a in range(dim):
        for b in range(dim):
            units[a * dim + b, b, a] = 1
    return np.concatenate([units, -1j * units])


def _hermitian_part(k: npt.NDArray[np.complex128]) -> npt.NDArray[np.complex128]:
    return (k + np.conj(np.swapaxes(k, -1, -2))) / 2


@dataclass(frozen=True)
class ConstraintBatch:
    """Rows ``Σ_b Tr[K_b X_b] + Σ_j a_j s_j  (relation)  rhs`` sharing one relation.

    ``blocks`` maps a block index to a sparse ``(rows, n²)`` array whose row
    ``k`` is the row-major flattening of the Hermitian coefficient ``K_b``.
    """

    blocks: Mapping[int, sparse.csr_array]
    scalars: sparse.csr_array
    rhs: npt.NDArray[np.float64]
    relation: Relation

    @property
    def rows(self) -> int:
        """Number of scalar constraints in the batch."""
        return self.rhs.shape[0]

    def coefficient(self, row: int, block: int, dim: int) -> ComplexMatrix:
        """Dense Hermitian coefficient operator of one row on one block."""
        if block not in self.blocks:
            return np.zeros((dim, dim), dtype=np.complex128)
        return self.blocks[block][[row], :].toarray().reshape(dim, dim)


@dataclass(frozen=True)
class SdpProblem:
    """A conic program over Hermitian PSD blocks and free real scalars.

    The objective is ``Re Σ_b Tr[C_b X_b] + c·s + offset``.
    """

    block_dims: tuple[int, ...]
    n_scalars: int
    objective_blocks: Mapping[int, ComplexMatrix]
    objective_scalars: npt.NDArray[np.float64]
    constraints: tuple[ConstraintBatch, ...]
    sense: Sense
    objective_offset: float = 0.0

    @property
    def n_constraints(self) -> int:
        """Total number of scalar constraints."""
        return sum(batch.rows for batch in self.constraints)

    def validate(self) -> None:
        """Check coefficient dimensions and Hermiticity."""
        for index, coefficient in self.objective_blocks.items():
            dim = self.block_dims[index]
            if coefficient.shape != (dim, dim):
                raise MalformedProblem(
                    f"objective coefficient on block {index} has shape {coefficient.shape}, expected {(dim, dim)}"
                )
            if np.max(np.abs(coefficient - coefficient.conj().T), initial=0) > (
                HERMITIAN_COEFFICIENT_TOLERANCE
            ):
                raise MalformedProblem(f"objective coefficient on block {index} is not Hermitian")
        if self.objective_scalars.shape != (self.n_scalars,):
            raise MalformedProblem("objective scalar coefficients have the wrong length")
        for batch in self.constraints:
            if batch.scalars.shape != (batch.rows, self.n_scalars):
                raise MalformedProblem("constraint scalar coefficients have the wrong shape")
            for index, rows in batch.blocks.items():
                dim = self.block_dims[index]
                if rows.shape != (batch.rows, dim * dim):
                    raise MalformedProblem(
                        f"constraint coefficients on block {index} do not match dim {dim}"
                    )
                dense = rows.toarray().reshape(batch.rows, dim, dim)
                asymmetry = np.max(
                    np.abs(dense - np.conj(np.swapaxes(dense, 1, 2))), initial=0
                )
                if asymmetry > HERMITIAN_COEFFICIENT_TOLERANCE:
                    raise MalformedProblem(
                        f"constraint coefficients on block {index} are not Hermitian ({asymmetry:.2e})"
                    )


@dataclass(frozen=True)
class Block:
    """Handle on a Hermitian PSD block variable."""

    index: int
    dim: int


@dataclass(frozen=True)
class Scalar:
    """Handle on a free real scalar variable."""

    index: int


@dataclass(frozen=True)
class FreeHermitian:
    """A free Hermitian matrix, parameterised by ``dim²`` real scalars over [hermitian_basis][divisio.sdp.problem.hermitian_basis]."""

    scalars: tuple[int, ...]
    dim: int


def _identity(x: ComplexMatrix) -> ComplexMatrix:
    return x


@dataclass(frozen=True)
class Term:
    """One linear contribution to a matrix-valued affine expression.

    For a [Block][divisio.sdp.problem.Block] or
    [FreeHermitian][divisio.sdp.problem.FreeHermitian], ``apply`` is a linear
    map from the variable's space to the expression's space. For a
    [Scalar][divisio.sdp.problem.Scalar], ``apply`` is called once on the 1×1
    matrix ``[[1]]`` and must return the fixed matrix multiplying the scalar.
    """

    variable: Block | Scalar | FreeHermitian
    apply: LinearMap = _identity


@dataclass
class SdpBuilder:
    """Incrementally assemble an [SdpProblem][divisio.sdp.problem.SdpProblem].

    Matrix equalities are lowered to scalar rows: Hermitian expressions over
    the Hermitian basis (dimension-exact), general ones entrywise over real
    and imaginary parts. Matrix inequalities become equalities against a new
    slack PSD block.
    """

    sense: Sense
    _block_dims: list[int] = field(default_factory=list)
    _n_scalars: int = 0
    _batches: list[tuple[dict[int, npt.NDArray[np.complex128]], dict[int, npt.NDArray[np.float64]], npt.NDArray[np.float64], Relation]] = field(default_factory=list)
    _objective: tuple[list[Term], ComplexMatrix, float] | None = None

    def block(self, dim: int) -> Block:
        """Add a PSD block of dimension ``dim``."""
        self._block_dims.append(dim)
        return Block(len(self._block_dims) - 1, dim)

    def scalar(self) -> Scalar:
        """Add a free real scalar."""
        self._n_scalars += 1
        return Scalar(self._n_scalars - 1)

    def hermitian(self, dim: int) -> FreeHermitian:
        """Add a free Hermitian matrix of dimension ``dim``."""
        return FreeHermitian(tuple(self.scalar().index for _ in range(dim * dim)), dim)

    def equal(
        self,
        terms: Sequence[Term],
        rhs: npt.ArrayLike,
        *,
        hermitian: bool = True,
    ) -> None:
        """Constrain ``Σ terms = rhs``.

        Pass ``hermitian=False`` when the expression is not Hermitian, e.g. an
        off-diagonal block; it is then matched entrywise.
        """
        rhs = np.atleast_2d(np.asarray(rhs, dtype=np.complex128))
        dim = rhs.shape[0]
        functionals = hermitian_basis(dim) if hermitian else entry_functionals(dim)
        self._lower(terms, functionals, rhs, Relation.equal)

    def at_least(self, terms: Sequence[Term], rhs: float) -> None:
        """Constrain the scalar expression ``Σ terms ≥ rhs``."""
        self._lower(
            terms,
            np.ones((1, 1, 1), dtype=np.complex128),
            np.array([[rhs]], dtype=np.complex128),
            Relation.at_least,
        )

    def psd(self, terms: Sequence[Term], constant: npt.ArrayLike | None = None) -> Block:
        """Constrain the Hermitian expression ``Σ terms + constant ⪰ 0`` via a slack block."""
        probe = self._evaluate_dim(terms, constant)
        slack = self.block(probe)
        constant_matrix = (
            np.zeros((probe, probe), dtype=np.complex128)
            if constant is None
            else np.asarray(constant, dtype=np.complex128)
        )
        negated = [
            Term(term.variable, lambda x, f=term.apply: -f(x)) for term in terms
        ]
        self.equal([Term(slack), *negated], constant_matrix)
        return slack

    def objective(
        self,
        terms: Sequence[Term],
        weight: npt.ArrayLike | None = None,
        offset: float = 0.0,
    ) -> None:
        """Set the objective ``Re Tr[weight · Σ terms] + offset``; ``weight`` defaults to ``[[1]]``."""
        weight_matrix = (
            np.ones((1, 1), dtype=np.complex128)
            if weight is None
            else np.atleast_2d(np.asarray(weight, dtype=np.complex128))
        )
        self._objective = (list(terms), weight_matrix, offset)

    def build(self) -> SdpProblem:
        """Assemble and validate the problem."""
        dims = tuple(self._block_dims)
        objective_blocks: dict[int, ComplexMatrix] = {}
        objective_scalars = np.zeros(self._n_scalars)
        offset = 0.0
        if self._objective is not None:
            terms, weight, offset = self._objective
            blocks, scalars = self._coefficients(terms, weight[np.newaxis])
            objective_blocks = {
                index: coefficient[0].reshape(dims[index], dims[index])
                for index, coefficient in blocks.items()
            }
            for index, values in scalars.items():
                objective_scalars[index] += values[0]
        batches = tuple(
            ConstraintBatch(
                blocks={
                    index: sparse.csr_array(coefficient)
                    for index, coefficient in blocks.items()
                },
                scalars=self._scalar_matrix(scalars, rhs.shape[0]),
                rhs=rhs,
                relation=relation,
            )
            for blocks, scalars, rhs, relation in self._batches
        )
        problem = SdpProblem(
            block_dims=dims,
            n_scalars=self._n_scalars,
            objective_blocks=objective_blocks,
            objective_scalars=objective_scalars,
            constraints=batches,
            sense=self.sense,
            objective_offset=offset,
        )
        problem.validate()
        logger.debug(
            "sdp problem built",
            blocks=dims,
            scalars=self._n_scalars,
            constraints=problem.n_constraints,
        )
        return problem

    def _scalar_matrix(
        self, scalars: Mapping[int, npt.NDArray[np.float64]], rows: int
    ) -> sparse.csr_array:
        matrix = np.zeros((rows, self._n_scalars))
        for index, column in scalars.items():
            matrix[:, index] += column
        return sparse.csr_array(matrix)

    def _evaluate_dim(
        self, terms: Sequence[Term], constant: npt.ArrayLike | None
    ) -> int:
        if constant is not None:
            return np.asarray(constant).shape[0]
        term = terms[0]
        return term.apply(self._sample(term.variable)).shape[0]

    @staticmethod
    def _sample(variable: Block | Scalar | FreeHermitian) -> ComplexMatrix:
        dim = 1 if isinstance(variable, Scalar) else variable.dim
        return np.zeros((dim, dim), dtype=np.complex128)

    def _lower(
        self,
        terms: Sequence[Term],
        functionals: npt.NDArray[np.complex128],
        rhs: ComplexMatrix,
        relation: Relation,
    ) -> None:
        blocks, scalars = self._coefficients(terms, functionals)
        values = np.einsum("kab,ba->k", functionals, rhs).real
        self._batches.append((blocks, scalars, values, relation))

    def _coefficients(
        self, terms: Sequence[Term], functionals: npt.NDArray[np.complex128]
    ) -> tuple[dict[int, npt.NDArray[np.complex128]], dict[int, npt.NDArray[np.float64]]]:
        """Coefficients of ``X ↦ Re Tr[G f(X)]`` for every functional ``G``.

        Block coefficients come back as ``(rows, n²)`` arrays of flattened
        Hermitian operators; scalar coefficients as ``(rows,)`` columns.
        """
        rows = functionals.shape[0]
        # vec(G^T), so that Tr[G Y] = g · vec(Y)
        g = np.swapaxes(functionals, 1, 2).reshape(rows, -1)
        blocks: dict[int, npt.NDArray[np.complex128]] = {}
        scalars: dict[int, npt.NDArray[np.float64]] = {}
        for term in terms:
            variable = term.variable
            if isinstance(variable, Scalar):
                image = term.apply(np.ones((1, 1), dtype=np.complex128))
                column = (g @ image.reshape(-1)).real
                scalars[variable.index] = scalars.get(variable.index, 0) + column
            elif isinstance(variable, FreeHermitian):
                for index, element in zip(
                    variable.scalars, hermitian_basis(variable.dim), strict=True
                ):
                    column = (g @ term.apply(element).reshape(-1)).real
                    scalars[index] = scalars.get(index, 0) + column
            else:
                dim = variable.dim
                images = np.stack(
                    [
                        term.apply(unit).reshape(-1)
                        for unit in np.eye(dim * dim, dtype=np.complex128).reshape(
                            dim * dim, dim, dim
                        )
                    ],
                    axis=1,
                )
                # c = vec(A^T) with Tr[G f(X)] = Tr[A X]
                a = np.swapaxes((g @ images).reshape(rows, dim, dim), 1, 2)
                coefficient = _hermitian_part(a).reshape(rows, dim * dim)
                blocks[variable.index] = blocks.get(variable.index, 0) + coefficient
        return blocks, scalars
