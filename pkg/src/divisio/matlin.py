"""
Dense complex linear algebra primitives.

Every other divisio module builds on the handful of operations here: Kronecker
products, partial traces and partial transposes over a tensor factorisation,
Hermitian eigendecomposition and the trace norm.

!!! note

    Transpositions are always taken in the computational basis. This is a
    library-wide convention; the Choi matrices produced by
    [divisio.channels][] rely on it.

Matrices are plain ``numpy`` arrays of ``complex128``. Hermitian operators are
wrapped in [HermitianOperator][divisio.matlin.HermitianOperator], which
symmetrises its input on construction and is immutable afterwards.

```python
import numpy as np
from divisio.matlin import HermitianOperator, SubsystemShape, partial_trace

bell = np.zeros((4, 4), dtype=complex)
bell[np.ix_([0, 3], [0, 3])] = 1
reduced = partial_trace(HermitianOperator(bell), SubsystemShape((2, 2)), 1)
assert np.allclose(reduced.matrix, np.eye(2))
```
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, reduce
from math import prod
from typing import TYPE_CHECKING, Self

import numpy as np
import numpy.typing as npt

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

type ComplexMatrix = npt.NDArray[np.complex128]

HERMITICITY_TOLERANCE = 1e-12
DEFAULT_ASYMMETRY_THRESHOLD = 1e-9


class DimensionMismatch(ValueError):
    """Operand dimensions are inconsistent with each other or with a shape."""


class ConvergenceFailure(ArithmeticError):
    """A matrix decomposition failed to converge."""


class NotHermitian(ValueError):
    """A matrix is too far from Hermitian to be symmetrised silently."""


def as_matrix(value: npt.ArrayLike) -> ComplexMatrix:
    """Return ``value`` as a finite 2-d complex array."""
    array = np.asarray(value, dtype=np.complex128)
    if array.ndim != 2:  # noqa: PLR2004
        raise DimensionMismatch(f"expected a matrix, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ValueError("matrix has non-finite entries")
    return array


def dagger(matrix: npt.ArrayLike) -> ComplexMatrix:
    """Conjugate transpose."""
    return np.conj(np.asarray(matrix, dtype=np.complex128)).T


class HermitianOperator:
    """An immutable Hermitian matrix.

    The input is symmetrised as ``(M + M†)/2``. Inputs whose largest entrywise
    asymmetry exceeds ``asymmetry_threshold`` are rejected with
    [NotHermitian][divisio.matlin.NotHermitian] instead.
    """

    def __init__(
        self,
        matrix: npt.ArrayLike,
        *,
        asymmetry_threshold: float = DEFAULT_ASYMMETRY_THRESHOLD,
    ):
        array = as_matrix(matrix)
        if array.shape[0] != array.shape[1]:
            raise DimensionMismatch(f"operator must be square, got {array.shape}")
        asymmetry = float(np.max(np.abs(array - dagger(array)), initial=0.0))
        if asymmetry > asymmetry_threshold:
            raise NotHermitian(
                f"matrix asymmetry {asymmetry:.3e} exceeds {asymmetry_threshold:.1e}"
            )
        symmetric = (array + dagger(array)) / 2
        symmetric.setflags(write=False)
        self._matrix = symmetric

    @classmethod
    def identity(cls, dim: int) -> Self:
        """Identity operator on a ``dim``-dimensional space."""
        return cls(np.eye(dim))

    @classmethod
    def zeros(cls, dim: int) -> Self:
        """Zero operator on a ``dim``-dimensional space."""
        return cls(np.zeros((dim, dim)))

    @property
    def matrix(self) -> ComplexMatrix:
        """The (read-only) underlying array."""
        return self._matrix

    @property
    def dim(self) -> int:
        """Dimension of the space the operator acts on."""
        return self._matrix.shape[0]

    def trace(self) -> float:
        """Trace; real for a Hermitian operator."""
        return float(np.trace(self._matrix).real)

    @cached_property
    def eigenvalues(self) -> npt.NDArray[np.float64]:
        """Ascending eigenvalues."""
        return eig_hermitian(self)[0]

    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue."""
        return float(self.eigenvalues[0])

    def is_psd(self, tol: float = 1e-9) -> bool:
        """Whether the smallest eigenvalue is at least ``-tol``."""
        return self.min_eigenvalue() >= -tol

    def __add__(self, other: HermitianOperator) -> HermitianOperator:
        return HermitianOperator(self._matrix + other.matrix)

    def __sub__(self, other: HermitianOperator) -> HermitianOperator:
        return HermitianOperator(self._matrix - other.matrix)

    def __mul__(self, scalar: float) -> HermitianOperator:
        return HermitianOperator(self._matrix * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> HermitianOperator:
        return HermitianOperator(-self._matrix)

    def __repr__(self) -> str:
        return f"HermitianOperator(dim={self.dim})"


@dataclass(frozen=True)
class SubsystemShape:
    """Tensor factorisation ``H_0 ⊗ H_1 ⊗ ...`` of an operator's space."""

    dims: tuple[int, ...]

    def __post_init__(self):
        if not self.dims or any(d < 1 for d in self.dims):
            raise ValueError(f"subsystem dimensions must be positive, got {self.dims}")

    @property
    def total(self) -> int:
        """Dimension of the full product space."""
        return prod(self.dims)

    def check(self, dim: int, which: int | None = None) -> None:
        """Raise unless the shape factorises ``dim`` and ``which`` indexes a factor."""
        if self.total != dim:
            raise DimensionMismatch(
                f"subsystem dims {self.dims} multiply to {self.total}, operator has dim {dim}"
            )
        if which is not None and not 0 <= which < len(self.dims):
            raise DimensionMismatch(
                f"subsystem index {which} out of range for {len(self.dims)} subsystems"
            )


def kron(a: npt.ArrayLike, b: npt.ArrayLike) -> ComplexMatrix:
    """Kronecker product ``a ⊗ b``."""
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(factors: Iterable[npt.ArrayLike]) -> ComplexMatrix:
    """Kronecker product of several factors, left to right."""
    return reduce(kron, factors)


def trace_out(matrix: ComplexMatrix, dims: Sequence[int], which: int) -> ComplexMatrix:
    """Partial trace of an arbitrary (not necessarily Hermitian) square array."""
    n = len(dims)
    tensor = np.asarray(matrix).reshape(*dims, *dims)
    reduced = np.trace(tensor, axis1=which, axis2=n + which)
    rest = prod(d for i, d in enumerate(dims) if i != which)
    return reduced.reshape(rest, rest)


def transpose_on(
    matrix: ComplexMatrix, dims: Sequence[int], which: int
) -> ComplexMatrix:
    """Partial transpose of an arbitrary square array on factor ``which``."""
    n = len(dims)
    tensor = np.asarray(matrix).reshape(*dims, *dims)
    swapped = np.swapaxes(tensor, which, n + which)
    return swapped.reshape(prod(dims), prod(dims))


def partial_trace(
    m: HermitianOperator, shape: SubsystemShape, which: int
) -> HermitianOperator:
    """Trace out subsystem ``which``; the trace of the result equals ``Tr[m]``."""
    shape.check(m.dim, which)
    return HermitianOperator(trace_out(m.matrix, shape.dims, which))


def partial_transpose(
    m: HermitianOperator, shape: SubsystemShape, which: int
) -> HermitianOperator:
    """Transpose subsystem ``which`` in the computational basis; an involution."""
    shape.check(m.dim, which)
    return HermitianOperator(transpose_on(m.matrix, shape.dims, which))


def eig_hermitian(
    m: HermitianOperator,
) -> tuple[npt.NDArray[np.float64], ComplexMatrix]:
    """Eigenvalues (ascending) and the unitary whose columns are eigenvectors."""
    try:
        return np.linalg.eigh(m.matrix)
    except np.linalg.LinAlgError as error:
        raise ConvergenceFailure(f"eigendecomposition of {m!r} failed") from error


def trace_norm(m: npt.ArrayLike | HermitianOperator) -> float:
    """Sum of singular values."""
    if isinstance(m, HermitianOperator):
        return float(np.sum(np.abs(m.eigenvalues)))
    array = as_matrix(m)
    if array.shape[0] != array.shape[1]:
        raise DimensionMismatch(f"trace norm needs a square matrix, got {array.shape}")
    try:
        return float(np.sum(np.linalg.svd(array, compute_uv=False)))
    except np.linalg.LinAlgError as error:
        raise ConvergenceFailure("singular value decomposition failed") from error


def ket(dim: int, index: int) -> ComplexMatrix:
    """Computational basis column vector ``|index⟩``."""
    vector = np.zeros((dim, 1), dtype=np.complex128)
    vector[index, 0] = 1
    return vector


def matrix_unit(dim: int, row: int, col: int) -> ComplexMatrix:
    """The matrix unit ``|row⟩⟨col|``."""
    unit = np.zeros((dim, dim), dtype=np.complex128)
    unit[row, col] = 1
    return unit


PAULI_I = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
for _pauli in (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z):
    _pauli.setflags(write=False)


type ComplexPairs = list[list[tuple[float, float]]]


def to_pairs(matrix: npt.ArrayLike) -> ComplexPairs:
    """Row-major ``[re, im]`` pairs, the JSON encoding of complex matrices."""
    return [[(float(z.real), float(z.imag)) for z in row] for row in as_matrix(matrix)]


def from_pairs(entries: ComplexPairs) -> ComplexMatrix:
    """Inverse of [to_pairs][divisio.matlin.to_pairs]."""
    pairs = np.asarray(entries, dtype=float)
    if pairs.ndim != 3 or pairs.shape[2] != 2:  # noqa: PLR2004
        raise DimensionMismatch(f"expected rows of [re, im] pairs, got shape {pairs.shape}")
    return as_matrix(pairs[..., 0] + 1j * pairs[..., 1])
