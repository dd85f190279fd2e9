from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from divisio import matlin
from divisio.matlin import (
    PAULI_X,
    PAULI_Z,
    DimensionMismatch,
    HermitianOperator,
    NotHermitian,
    SubsystemShape,
)

if TYPE_CHECKING:
    from pytest_subtests import SubTests


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def random_matrix(rng: np.random.Generator, dim: int) -> np.ndarray:
    return rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))


def max_entangled(dim: int) -> np.ndarray:
    """Unnormalised Σ_ij |ii⟩⟨jj|."""
    omega = np.zeros((dim * dim, dim * dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            omega[i * dim + i, j * dim + j] = 1
    return omega


def swap(dim: int) -> np.ndarray:
    out = np.zeros((dim * dim, dim * dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            out[i * dim + j, j * dim + i] = 1
    return out


seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_kron_examples(subtests: SubTests):
    with subtests.test("identity"):
        assert np.array_equal(matlin.kron(np.eye(2), np.eye(2)), np.eye(4))
    with subtests.test("diagonal"):
        assert np.array_equal(
            matlin.kron(PAULI_Z, PAULI_Z), np.diag([1, -1, -1, 1]).astype(complex)
        )
    with subtests.test("x-projector"):
        expected = np.zeros((4, 4), dtype=complex)
        expected[0, 2] = expected[2, 0] = 1
        projector = np.diag([1, 0]).astype(complex)
        assert np.array_equal(matlin.kron(PAULI_X, projector), expected)


@given(seed=seeds, dim=st.sampled_from([2, 3]))
def test_kron_mixed_product_and_associativity(seed: int, dim: int):
    rng = np.random.default_rng(seed)
    a, b, c, d = (random_matrix(rng, dim) for _ in range(4))
    assert np.allclose(
        matlin.kron(a, b) @ matlin.kron(c, d), matlin.kron(a @ c, b @ d), atol=1e-12
    )
    assert np.allclose(
        matlin.kron(matlin.kron(a, b), c), matlin.kron(a, matlin.kron(b, c)), atol=1e-12
    )


def test_partial_trace_examples(subtests: SubTests):
    shape = SubsystemShape((2, 2))
    with subtests.test("identity-channel-choi"):
        reduced = matlin.partial_trace(HermitianOperator(max_entangled(2)), shape, 1)
        assert np.allclose(reduced.matrix, np.eye(2), atol=1e-12)
    with subtests.test("product-state"):
        rng = np.random.default_rng(1)
        rho = random_hermitian(rng, 2)
        sigma = random_hermitian(rng, 3)
        reduced = matlin.partial_trace(
            HermitianOperator(np.kron(rho, sigma)), SubsystemShape((2, 3)), 1
        )
        assert np.allclose(reduced.matrix, np.trace(sigma) * rho, atol=1e-12)
    with subtests.test("index-sum-oracle"):
        m = random_hermitian(np.random.default_rng(2), 4)
        reduced = matlin.partial_trace(HermitianOperator(m), shape, 0)
        t = m.reshape(2, 2, 2, 2)
        expected = np.array(
            [[sum(t[a, j, a, l] for a in range(2)) for l in range(2)] for j in range(2)]
        )
        assert np.allclose(reduced.matrix, expected, atol=1e-12)
    with subtests.test("dimension-mismatch"), pytest.raises(DimensionMismatch):
        matlin.partial_trace(HermitianOperator(np.eye(4)), SubsystemShape((2, 3)), 0)
    with subtests.test("index-out-of-range"), pytest.raises(DimensionMismatch):
        matlin.partial_trace(HermitianOperator(np.eye(4)), shape, 2)


@given(seed=seeds, dims=st.sampled_from([(2, 2), (2, 3), (3, 2), (2, 2, 2)]))
def test_partial_trace_preserves_trace(seed: int, dims: tuple[int, ...]):
    shape = SubsystemShape(dims)
    m = HermitianOperator(random_hermitian(np.random.default_rng(seed), shape.total))
    for which in range(len(dims)):
        assert matlin.partial_trace(m, shape, which).trace() == pytest.approx(
            m.trace(), abs=1e-12
        )


def test_partial_transpose_examples(subtests: SubTests):
    shape = SubsystemShape((2, 2))
    with subtests.test("identity"):
        out = matlin.partial_transpose(HermitianOperator(np.eye(4)), shape, 0)
        assert np.array_equal(out.matrix, np.eye(4))
    with subtests.test("maximally-entangled-to-swap"):
        out = matlin.partial_transpose(HermitianOperator(max_entangled(2)), shape, 0)
        assert np.array_equal(out.matrix, swap(2))


@given(seed=seeds, dims=st.sampled_from([(2, 2), (2, 3), (3, 3)]))
def test_partial_transpose_involution_and_full_transpose(
    seed: int, dims: tuple[int, int]
):
    shape = SubsystemShape(dims)
    m = HermitianOperator(random_hermitian(np.random.default_rng(seed), shape.total))
    once = matlin.partial_transpose(m, shape, 0)
    assert np.array_equal(matlin.partial_transpose(once, shape, 0).matrix, m.matrix)
    both = matlin.partial_transpose(once, shape, 1)
    assert np.array_equal(both.matrix, m.matrix.T)
    assert abs(once.trace() - m.trace()) < 1e-12 * shape.total


def test_eig_examples(subtests: SubTests):
    with subtests.test("identity"):
        values, _ = matlin.eig_hermitian(HermitianOperator(np.eye(2)))
        assert np.allclose(values, [1, 1])
    with subtests.test("pauli-z"):
        values, _ = matlin.eig_hermitian(HermitianOperator(PAULI_Z))
        assert np.allclose(values, [-1, 1])
    with subtests.test("x-plus-z"):
        values, _ = matlin.eig_hermitian(HermitianOperator(PAULI_X + PAULI_Z))
        assert np.allclose(values, [-np.sqrt(2), np.sqrt(2)], atol=1e-12)


@settings(max_examples=200)
@given(seed=seeds, dim=st.integers(min_value=2, max_value=16))
def test_eig_reconstruction(seed: int, dim: int):
    m = random_hermitian(np.random.default_rng(seed), dim)
    values, vectors = matlin.eig_hermitian(HermitianOperator(m))
    assert np.all(np.diff(values) >= 0)
    assert np.linalg.norm(vectors @ np.diag(values) @ vectors.conj().T - m) <= 1e-10 * dim
    assert np.allclose(vectors.conj().T @ vectors, np.eye(dim), atol=1e-10)


def test_trace_norm_examples(subtests: SubTests):
    with subtests.test("zero"):
        assert matlin.trace_norm(np.zeros((3, 3))) == 0
    with subtests.test("pauli-z"):
        assert matlin.trace_norm(PAULI_Z) == pytest.approx(2)
    with subtests.test("nonorthogonal-projectors"):
        plus = np.full((2, 2), 0.5, dtype=complex)
        zero = np.diag([1, 0]).astype(complex)
        assert matlin.trace_norm(zero - plus) == pytest.approx(np.sqrt(2))
        assert matlin.trace_norm(HermitianOperator(zero - plus)) == pytest.approx(
            np.sqrt(2)
        )
    with subtests.test("non-square"), pytest.raises(DimensionMismatch):
        matlin.trace_norm(np.zeros((2, 3)))


def test_hermitian_operator_construction(subtests: SubTests):
    with subtests.test("symmetrises-small-asymmetry"):
        m = np.array([[1, 1e-11], [0, 1]], dtype=complex)
        op = HermitianOperator(m)
        assert np.allclose(op.matrix, op.matrix.conj().T, atol=matlin.HERMITICITY_TOLERANCE)
    with subtests.test("rejects-large-asymmetry"), pytest.raises(NotHermitian):
        HermitianOperator(np.array([[0, 1], [0, 0]]))
    with subtests.test("threshold-is-configurable"):
        HermitianOperator(np.array([[0, 1], [0, 0]]), asymmetry_threshold=2)
    with subtests.test("immutable"), pytest.raises(ValueError):
        HermitianOperator(np.eye(2)).matrix[0, 0] = 3
    with subtests.test("non-finite"), pytest.raises(ValueError):
        HermitianOperator(np.array([[np.nan, 0], [0, 1]]))
