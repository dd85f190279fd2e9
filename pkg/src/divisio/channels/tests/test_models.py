from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np
import pytest

from divisio import matlin
from divisio.channels import (
    InvalidDistribution,
    OutOfRange,
    apply,
    collisional_pair,
    dephasing_hd,
    dephasing_probability,
    dephasing_t,
    haar_unitary,
    identity_channel,
    is_cptp,
    pauli_channel,
    replacer_channel,
    unitary_mixture,
)
from divisio.matlin import HermitianOperator

if TYPE_CHECKING:
    from pytest_subtests import SubTests


def test_pauli_channel_examples(subtests: SubTests):
    with subtests.test("identity"):
        assert np.allclose(
            pauli_channel(1, 0, 0, 0).choi.matrix, identity_channel(2).choi.matrix
        )
    with subtests.test("first-collision"):
        p = 0.3
        first, _ = collisional_pair(p)
        assert np.array_equal(
            pauli_channel(1 - p, p / 2, 0, p / 2).choi.matrix, first.choi.matrix
        )
    with subtests.test("fully-depolarizing"):
        depolarizing = pauli_channel(0.25, 0.25, 0.25, 0.25)
        for state in (
            np.diag([1.0, 0.0]),
            np.array([[0.5, 0.5j], [-0.5j, 0.5]]),
            matlin.PAULI_X,
            matlin.PAULI_Y,
        ):
            out = apply(depolarizing, HermitianOperator(state))
            assert np.allclose(out.matrix, np.trace(state) * np.eye(2) / 2, atol=1e-12)
    with subtests.test("negative"), pytest.raises(InvalidDistribution):
        pauli_channel(1.1, -0.1, 0, 0)
    with subtests.test("unnormalised"), pytest.raises(InvalidDistribution):
        pauli_channel(0.5, 0.1, 0, 0)


def test_collisional_range():
    with pytest.raises(OutOfRange):
        collisional_pair(1.5)


def test_dephasing_t_examples(subtests: SubTests):
    with subtests.test("t=0"):
        assert dephasing_probability(0) == 0
        assert np.allclose(dephasing_t(0).choi.matrix, identity_channel(2).choi.matrix)
    with subtests.test("t=pi"):
        assert dephasing_probability(math.pi) == pytest.approx(1, abs=1e-12)
    with subtests.test("t=pi/2"):
        e4 = math.exp(4)
        expected = e4 * (1 - math.exp(-2)) / (e4 - 1)
        assert dephasing_probability(math.pi / 2) == pytest.approx(expected, rel=1e-12)
        choi = dephasing_t(math.pi / 2).tensor
        assert choi[0, 0, 1, 1] == pytest.approx(1 - expected)
    with subtests.test("range"):
        for t in np.linspace(-10, 10, 101):
            assert 0 <= dephasing_probability(float(t)) <= 1


def test_dephasing_hd_examples(subtests: SubTests):
    with subtests.test("p=0"):
        for d in (2, 3, 5):
            assert np.array_equal(
                dephasing_hd(d, 0).choi.matrix, identity_channel(d).choi.matrix
            )
    with subtests.test("full-projection"):
        expected = np.zeros((9, 9))
        for k in range(3):
            expected[k * 3 + k, k * 3 + k] = 1
        assert np.array_equal(dephasing_hd(3, 1).choi.matrix, expected)
    with subtests.test("cptp"):
        assert is_cptp(dephasing_hd(4, 0.3))
    with subtests.test("bad-dimension"), pytest.raises(OutOfRange):
        dephasing_hd(1, 0.5)
    with subtests.test("bad-probability"), pytest.raises(OutOfRange):
        dephasing_hd(3, -0.1)


def test_haar_unitary(subtests: SubTests):
    rng = np.random.default_rng(0)
    with subtests.test("scalar"):
        u = haar_unitary(1, rng)
        assert abs(u[0, 0]) == pytest.approx(1)
    with subtests.test("unitary"):
        for d in (2, 3, 5, 8):
            u = haar_unitary(d, rng)
            assert np.allclose(u.conj().T @ u, np.eye(d), atol=1e-10)
    with subtests.test("marginal"):
        samples = [abs(haar_unitary(4, rng)[0, 0]) ** 2 for _ in range(10_000)]
        assert np.mean(samples) == pytest.approx(0.25, abs=0.01)
    with subtests.test("seeded"):
        assert np.array_equal(
            haar_unitary(3, np.random.default_rng(42)),
            haar_unitary(3, np.random.default_rng(42)),
        )


def test_unitary_mixture(subtests: SubTests):
    rng = np.random.default_rng(1)
    with subtests.test("single-unitary-has-rank-one"):
        eigenvalues = unitary_mixture(3, 1, rng).choi.eigenvalues
        assert np.sum(eigenvalues > 1e-9) == 1
    with subtests.test("unital"):
        for n in (1, 2, 5):
            channel = unitary_mixture(3, n, rng)
            out = apply(channel, HermitianOperator.identity(3))
            assert np.allclose(out.matrix, np.eye(3), atol=1e-9)
            assert is_cptp(channel)
    with subtests.test("rank-at-most-n"):
        eigenvalues = unitary_mixture(2, 2, np.random.default_rng(7)).choi.eigenvalues
        assert np.sum(eigenvalues > 1e-9) <= 2
    with subtests.test("empty"), pytest.raises(OutOfRange):
        unitary_mixture(2, 0, rng)


def test_replacer_channel():
    state = HermitianOperator(np.diag([0.0, 1.0]))
    channel = replacer_channel(state, 3)
    assert is_cptp(channel)
    out = apply(channel, HermitianOperator(np.diag([0.2, 0.3, 0.5])))
    assert np.allclose(out.matrix, state.matrix)
