from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
import pytest

from divisio.channels import (
    Channel,
    compose,
    dephasing_hd,
    haar_unitary,
    identity_channel,
    random_channel,
    replacer_channel,
    unitary_channel,
)
from divisio.diamond import (
    diamond_distance,
    diamond_norm,
    guess_probability,
    probe_lower_bound,
    probe_output,
    probe_value,
)
from divisio.matlin import HermitianOperator

if TYPE_CHECKING:
    from pytest_subtests import SubTests


def random_difference(rng: np.random.Generator, dim: int) -> Channel:
    return random_channel(dim, dim, rng) - random_channel(dim, dim, rng)


def orthogonal_replacers() -> tuple[Channel, Channel]:
    return (
        replacer_channel(HermitianOperator(np.diag([1.0, 0.0])), 2),
        replacer_channel(HermitianOperator(np.diag([0.0, 1.0])), 2),
    )


def max_entangled_probe(dim: int) -> np.ndarray:
    return np.eye(dim).reshape(-1) / np.sqrt(dim)


def best_random_strategy(
    c0: Channel, c1: Channel, prior: float, n_strategies: int, rng: np.random.Generator
) -> float:
    """Success probability of the best random (probe, projective two-outcome) strategy."""
    best = max(prior, 1 - prior)
    dim = c0.dim_in * c0.dim_out
    for _ in range(n_strategies):
        probe = rng.normal(size=c0.dim_in**2) + 1j * rng.normal(size=c0.dim_in**2)
        probe /= np.linalg.norm(probe)
        rho0, rho1 = probe_output(c0, probe).matrix, probe_output(c1, probe).matrix
        basis = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))[0]
        keep = basis[:, : rng.integers(0, dim + 1)]
        m0 = keep @ keep.conj().T
        success = prior * np.trace(m0 @ rho0).real + (1 - prior) * np.trace(
            (np.eye(dim) - m0) @ rho1
        ).real
        best = max(best, float(success))
    return best


def test_diamond_norm_examples(subtests: SubTests):
    with subtests.test("zero-map"):
        assert diamond_norm(identity_channel(2) - identity_channel(2)).value <= 1e-9
    with subtests.test("orthogonal-replacers"):
        c0, c1 = orthogonal_replacers()
        assert diamond_norm(c0 - c1).value == pytest.approx(2, abs=1e-6)
    with subtests.test("identity-minus-full-dephasing"):
        difference = identity_channel(2) - dephasing_hd(2, 1.0)
        result = diamond_norm(difference)
        assert result.value >= result.choi_lower_bound - 1e-7
        assert result.choi_lower_bound == pytest.approx(1)
        probes = probe_lower_bound(difference, 2000, np.random.default_rng(0))
        assert result.value == pytest.approx(probes, abs=1e-4)


def test_result_invariants():
    difference = random_difference(np.random.default_rng(1), 2)
    result = diamond_norm(difference)
    assert result.value == pytest.approx((result.u0 + result.u1) / 2, abs=1e-9)
    c = difference.choi.matrix
    joint = np.block([[result.y0.matrix, -c], [-c.conj().T, result.y1.matrix]])
    assert np.linalg.eigvalsh(joint)[0] >= -1e-8


def test_maximally_entangled_probe_value():
    difference = identity_channel(2) - dephasing_hd(2, 1.0)
    assert probe_value(difference, max_entangled_probe(2)) == pytest.approx(1)
    assert probe_lower_bound(difference - difference, 5, np.random.default_rng(0)) == 0


def test_probe_sandwich():
    rng = np.random.default_rng(2)
    for k in range(50):
        difference = random_difference(rng, 2 + k % 2)
        value = diamond_norm(difference).value
        bound = probe_lower_bound(difference, 2000, rng, refine=False)
        assert bound <= value + 1e-7
        assert value <= 2 + 1e-6


def test_unitary_invariance():
    rng = np.random.default_rng(3)
    for _ in range(10):
        difference = random_difference(rng, 2)
        u = unitary_channel(haar_unitary(2, rng))
        v = unitary_channel(haar_unitary(2, rng))
        rotated = compose(u, compose(difference, v))
        assert diamond_norm(rotated).value == pytest.approx(
            diamond_norm(difference).value, abs=1e-6
        )


def test_homogeneity():
    difference = random_difference(np.random.default_rng(4), 3)
    base = diamond_norm(difference).value
    for alpha in (0.5, 2.0):
        assert diamond_norm(alpha * difference).value == pytest.approx(alpha * base, rel=1e-6)


def test_guess_probability_examples(subtests: SubTests):
    rng = np.random.default_rng(5)
    with subtests.test("indistinguishable"):
        c = random_channel(2, 2, rng)
        assert guess_probability(c, c, 0.5) == pytest.approx(0.5, abs=1e-9)
    with subtests.test("orthogonal-replacers"):
        assert guess_probability(*orthogonal_replacers(), 0.5) == pytest.approx(1, abs=1e-6)
    with subtests.test("certain-prior"):
        c0, c1 = random_channel(2, 2, rng), random_channel(2, 2, rng)
        assert guess_probability(c0, c1, 1.0) == pytest.approx(1, abs=1e-6)
    with subtests.test("bad-prior"), pytest.raises(ValueError, match="prior"):
        guess_probability(c0, c1, 1.5)


def test_guess_probability_beats_random_strategies():
    rng = np.random.default_rng(6)
    for _ in range(20):
        c0, c1 = random_channel(2, 2, rng), random_channel(2, 2, rng)
        optimal = guess_probability(c0, c1, 0.5)
        assert 0.5 - 1e-9 <= optimal <= 1 + 1e-9
        assert optimal >= best_random_strategy(c0, c1, 0.5, 1000, rng) - 1e-6


def test_diamond_distance_is_symmetric():
    rng = np.random.default_rng(7)
    c0, c1 = random_channel(2, 2, rng), random_channel(2, 2, rng)
    assert diamond_distance(c0, c1) == pytest.approx(diamond_distance(c1, c0), abs=1e-7)
