"""Constructors for the channel families studied with divisio.

The collisional pair, the time-parametrised qubit dephasing and its
``d``-dimensional generalisation, plus random unitary mixtures.
"""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np
from scipy import linalg

from divisio import matlin
from divisio.channels.channel import Channel, KrausSet, choi_from_kraus
from divisio.matlin import PAULI_I, PAULI_X, PAULI_Y, PAULI_Z, HermitianOperator

if TYPE_CHECKING:
    import numpy.typing as npt

    from divisio.matlin import ComplexMatrix

DISTRIBUTION_TOLERANCE = 1e-12


class InvalidDistribution(ValueError):
    """Probabilities are negative or do not sum to one."""


class OutOfRange(ValueError):
    """A model parameter lies outside its admissible range."""


def _check_probability(name: str, value: float) -> None:
    if not 0 <= value <= 1:
        raise OutOfRange(f"{name} must lie in [0, 1], got {value}")


def pauli_channel(p_i: float, p_x: float, p_y: float, p_z: float) -> Channel:
    """``ρ ↦ p_i ρ + p_x XρX + p_y YρY + p_z ZρZ``."""
    weights = (p_i, p_x, p_y, p_z)
    if min(weights) < 0 or abs(sum(weights) - 1) > DISTRIBUTION_TOLERANCE:
        raise InvalidDistribution(f"Pauli weights {weights} are not a distribution")
    return choi_from_kraus(
        KrausSet.of(
            [
                math.sqrt(w) * pauli
                for w, pauli in zip(weights, (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z), strict=True)
            ]
        )
    )


def collisional_pair(p: float) -> tuple[Channel, Channel]:
    """``(Λ_{1|0}, Λ_{2|0})`` of the correlated-collision qubit model.

    ``Λ_{1|0}`` flips by X or Z with probability ``p/2`` each; over two
    correlated collisions the XZ cross terms cancel, leaving
    ``Λ_{2|0}(ρ) = ((1−p)² + p²)ρ + p(1−p)(XρX + ZρZ)``.
    """
    _check_probability("p", p)
    first = pauli_channel(1 - p, p / 2, 0, p / 2)
    target = pauli_channel((1 - p) ** 2 + p**2, p * (1 - p), 0, p * (1 - p))
    return first, target


def dephasing_probability(t: float) -> float:
    """``p(t) = e⁴(1 − e^{−2(1−cos t)})/(e⁴ − 1)``, in ``[0, 1]`` with maximum at ``t = π``."""
    value = -math.exp(4) * math.expm1(-2 * (1 - math.cos(t))) / math.expm1(4)
    return min(max(value, 0.0), 1.0)


def dephasing_t(t: float) -> Channel:
    """Qubit dephasing ``(1 − p(t)/2)ρ + (p(t)/2)ZρZ``."""
    p = dephasing_probability(t)
    return pauli_channel(1 - p / 2, 0, 0, p / 2)


def dephasing_hd(d: int, p: float) -> Channel:
    """``(1 − p)ρ + p Σ_k Π_k ρ Π_k`` on a ``d``-level system.

    The Choi matrix is that of the identity with its off-diagonal blocks
    damped by ``1 − p``.
    """
    if d < 2:  # noqa: PLR2004
        raise OutOfRange(f"dimension must be at least 2, got {d}")
    _check_probability("p", p)
    tensor = np.zeros((d, d, d, d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            tensor[i, i, j, j] = 1 if i == j else 1 - p
    return Channel(d, d, HermitianOperator(tensor.reshape(d * d, d * d)))


def identity_channel(d: int) -> Channel:
    """The identity map on a ``d``-level system."""
    return unitary_channel(np.eye(d))


def unitary_channel(u: npt.ArrayLike) -> Channel:
    """``ρ ↦ U ρ U†``."""
    return choi_from_kraus(KrausSet.of([u]))


def replacer_channel(state: HermitianOperator, dim_in: int) -> Channel:
    """``ρ ↦ Tr[ρ] σ``, whose Choi matrix is ``1 ⊗ σ``."""
    return Channel(
        dim_in, state.dim, HermitianOperator(matlin.kron(np.eye(dim_in), state.matrix))
    )


def haar_unitary(d: int, rng: np.random.Generator) -> ComplexMatrix:
    """Haar-random unitary via QR of a complex Gaussian matrix.

    The phases of ``R``'s diagonal are moved into ``Q`` so that the
    distribution is exactly Haar.
    """
    gaussian = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = linalg.qr(gaussian)
    diagonal = np.diag(r)
    return q * (diagonal / np.abs(diagonal))


def unitary_mixture(d: int, n: int, rng: np.random.Generator) -> Channel:
    """Uniform mixture of ``n`` Haar-random unitary conjugations; unital."""
    if n < 1:
        raise OutOfRange(f"mixture size must be at least 1, got {n}")
    return choi_from_kraus(
        KrausSet.of([haar_unitary(d, rng) / math.sqrt(n) for _ in range(n)])
    )


def random_channel(
    dim_in: int, dim_out: int, rng: np.random.Generator, *, rank: int | None = None
) -> Channel:
    """Random CPTP map from the blocks of a random isometry.

    ``rank`` Kraus operators (default ``dim_in · dim_out``) are cut from a
    ``rank·dim_out × dim_in`` matrix with orthonormal columns.
    """
    rank = rank or dim_in * dim_out
    gaussian = rng.standard_normal((rank * dim_out, dim_in)) + 1j * rng.standard_normal(
        (rank * dim_out, dim_in)
    )
    isometry, _ = linalg.qr(gaussian, mode="economic")
    return choi_from_kraus(
        KrausSet(dim_in, dim_out, tuple(np.split(isometry, rank, axis=0)))
    )
