import numpy as np
import pytest

from psidep.errors import DegenerateInputError
from psidep.oracle import (
    FiniteJoint,
    encoding_sensitive_joint,
    psi_population,
    psi_population_conditional,
    psi_population_cov,
    psi_population_norm,
    random_joint,
    random_simplex,
    sample_coupled,
)

NORMS = ["weighted_frobenius", "weighted_trace"]


def independent(px, py):
    return FiniteJoint(np.outer(px, py))


def functional(M):
    return FiniteJoint(np.eye(M) / M)


def xor_joint():
    prob = np.zeros((2, 2, 2))
    for x in range(2):
        for z in range(2):
            prob[x, z, x ^ z] = 0.25
    return FiniteJoint(prob)


@pytest.mark.parametrize("eps", [0.1, 0.5, 0.9])
def test_encoding_sensitive_joint_has_psi_one_half(eps):
    j = encoding_sensitive_joint(eps)
    assert psi_population(j) == pytest.approx(0.5, abs=1e-12)
    assert psi_population_cov(j) == pytest.approx(0.5, abs=1e-12)


def test_independent_is_zero():
    j = independent([0.2, 0.5, 0.3], [0.6, 0.4])
    assert psi_population(j) == pytest.approx(0.0, abs=1e-15)
    assert psi_population_norm(j, "weighted_trace", "identity") == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("M", [2, 3, 6])
def test_functional_is_one(M):
    j = functional(M)
    assert psi_population(j) == pytest.approx(1.0, abs=1e-12)
    assert psi_population_norm(j, "weighted_trace", "identity") == pytest.approx(1.0, abs=1e-12)


def test_functional_many_to_one_is_one():
    # four X levels, two response levels, Y a function of X
    prob = np.array([[0.1, 0], [0.3, 0], [0, 0.4], [0, 0.2]])
    assert psi_population(FiniteJoint(prob)) == pytest.approx(1.0, abs=1e-12)


def test_frobenius_square_equals_psi(rng):
    for _ in range(50):
        j = random_joint(rng, int(rng.integers(1, 6)), int(rng.integers(2, 6)))
        assert psi_population_norm(j) == pytest.approx(psi_population(j), abs=1e-12)


def test_two_routes_agree(rng):
    for _ in range(200):
        j = random_joint(rng, int(rng.integers(1, 7)), int(rng.integers(2, 6)))
        assert abs(psi_population(j) - psi_population_cov(j)) <= 1e-12


def test_information_gain_and_conditional_bounds(rng):
    for _ in range(200):
        j = random_joint(rng, int(rng.integers(1, 5)), int(rng.integers(2, 5)), J=int(rng.integers(1, 4)))
        base = psi_population(j)
        full = psi_population(FiniteJoint(j.xz_y()))
        assert full >= base - 1e-12
        for norm in NORMS:
            a = psi_population_norm(FiniteJoint(j.xy()), norm, "identity")
            b = psi_population_norm(FiniteJoint(j.xz_y()), norm, "identity")
            assert b >= a - 1e-12
        c = psi_population_conditional(j)
        assert -1e-12 <= c <= 1 + 1e-12


def test_conditional_examples():
    assert psi_population_conditional(xor_joint()) == pytest.approx(1.0, abs=1e-12)
    assert psi_population(FiniteJoint(xor_joint().xy())) == pytest.approx(0.0, abs=1e-15)

    xy = np.array([[0.3, 0.2], [0.1, 0.4]])
    pz = np.array([0.25, 0.75])
    noise = FiniteJoint(xy[:, None, :] * pz[None, :, None])
    assert psi_population_conditional(noise) == pytest.approx(0.0, abs=1e-12)

    z_is_y = np.zeros((2, 2, 2))
    for k in range(2):
        z_is_y[:, k, k] = xy[:, k]
    assert psi_population_conditional(FiniteJoint(z_is_y)) == pytest.approx(1.0, abs=1e-12)


def test_conditional_undefined_when_saturated():
    prob = np.zeros((2, 2, 2))
    prob[0, :, 0] = 0.25
    prob[1, :, 1] = 0.25
    with pytest.raises(DegenerateInputError):
        psi_population_conditional(FiniteJoint(prob))
    with pytest.raises(ValueError):
        psi_population_conditional(functional(2))


def test_zero_probability_level_is_degenerate():
    with pytest.raises(DegenerateInputError):
        psi_population(FiniteJoint([[0.5, 0.0], [0.5, 0.0]]))


@pytest.mark.parametrize(
    "prob",
    [
        [[0.5, 0.6], [0.0, -0.1]],
        [[0.5, 0.4], [0.0, 0.0]],
        [[0.2, 0.2], [0.2, 0.2]],
        [0.5, 0.5],
    ],
)
def test_finite_joint_validation(prob):
    with pytest.raises(ValueError):
        FiniteJoint(prob)


def test_sampler_reproduces_table():
    j = encoding_sensitive_joint(0.5)
    x, y = sample_coupled(j, 100_000, seed=1)
    freq = np.zeros((2, 3))
    np.add.at(freq, (x, y), 1)
    np.testing.assert_allclose(freq / 1e5, j.prob, atol=0.01)


def test_sampler_respects_support_and_seed():
    j = FiniteJoint(np.array([[0.3, 0, 0], [0, 0.3, 0], [0, 0, 0.4]]))
    x, y = sample_coupled(j, 5000, seed=3)
    assert np.all(x == y)
    x2, y2 = sample_coupled(j, 5000, seed=3)
    np.testing.assert_array_equal(x, x2)
    np.testing.assert_array_equal(y, y2)


def test_sampler_with_z():
    x, z, y = sample_coupled(xor_joint(), 2000, seed=0)
    np.testing.assert_array_equal(y, x ^ z)


def test_random_generators_stay_inside_simplex(rng):
    p = random_simplex(rng, 6)
    assert p.min() > 0.05 / 6 and abs(p.sum() - 1) < 1e-15
    j = random_joint(rng, 3, 4, J=2)
    assert j.prob.shape == (3, 2, 4) and j.prob.min() > 0
