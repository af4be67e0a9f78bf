import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qreduction.errors import CommutativityError, ConditioningError, DimensionError, ParameterError
from qreduction.linalg import max_abs_diff
from qreduction.objects import Observable, StateVector, pure_state
from qreduction.rules import (
    JointTable,
    OutcomeDistribution,
    bayes_posterior,
    bayes_prior,
    born_distribution,
    commuting_joint,
    projection_postulate_update,
    successive_joint,
)
from qreduction.sampling import random_density, random_hermitian, random_observable

SX = np.array([[0, 1], [1, 0]])
SZ = np.diag([1.0, -1.0])
KET0 = np.diag([1.0, 0.0])


def test_bayes_example():
    j = JointTable([[0, 1], [0, 1]], [[0.1, 0.2], [0.3, 0.4]])
    post = bayes_posterior(j, 1)
    assert post.probs == pytest.approx([1 / 3, 2 / 3], abs=1e-15)
    assert bayes_prior(j).probs == pytest.approx([0.3, 0.7], abs=1e-15)


def test_bayes_zero_column_raises():
    j = JointTable([[0, 1], [0, 1]], [[0.5, 0.0], [0.5, 0.0]])
    with pytest.raises(ConditioningError):
        bayes_posterior(j, 1)
    with pytest.raises(ConditioningError):
        bayes_posterior(j, 7)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=6, max_size=6))
def test_posteriors_reweight_to_prior(weights):
    p = np.array(weights).reshape(2, 3)
    j = JointTable([[0, 1], [-1, 0, 1]], p / p.sum())
    y = j.marginal(1)
    total = sum(q * bayes_posterior(j, b).probs for b, q in zip(y.labels, y.probs))
    assert max_abs_diff(total, bayes_prior(j).probs) < 1e-12


def test_joint_table_validation():
    with pytest.raises(ParameterError):
        JointTable([[0, 1]], [0.5, 0.6])
    with pytest.raises(ParameterError):
        JointTable([[1, 0]], [0.5, 0.5])
    with pytest.raises(DimensionError):
        JointTable([[0, 1]], [1.0])


def test_distribution_alignment_by_label():
    p = OutcomeDistribution([0, 1], [0.25, 0.75])
    q = OutcomeDistribution([1, 2], [0.75, 0.25])
    assert p.max_abs_diff(q) == pytest.approx(0.25)
    assert p.prob(1) == 0.75 and p.prob(5) == 0.0


def test_born_example():
    plus = pure_state(StateVector([1, 1], normalize=True))
    assert born_distribution(SZ, plus).probs == pytest.approx([0.5, 0.5], abs=1e-15)
    assert born_distribution(SZ, KET0).as_dict() == {-1.0: 0.0, 1.0: 1.0}


def test_born_matches_eigenvector_overlaps(rng):
    # independent route: |<v|psi>|^2 summed over eigenvectors with numpy eigh
    for _ in range(10):
        d = int(rng.integers(2, 5))
        h = random_hermitian(d, rng)
        rho = random_density(d, rng)
        vals, vecs = np.linalg.eigh(h)
        expected = [float(np.real(v.conj() @ rho.matrix @ v)) for v in vecs.T]
        got = born_distribution(h, rho)
        assert got.labels == pytest.approx(vals, abs=1e-9)
        assert got.probs == pytest.approx(expected, abs=1e-12)


def test_projection_postulate_example():
    plus = pure_state(StateVector([1, 1], normalize=True))
    post = projection_postulate_update(SZ, 1.0, plus)
    assert max_abs_diff(post.matrix, KET0) < 1e-15
    with pytest.raises(ConditioningError):
        projection_postulate_update(SZ, -1.0, KET0)


def test_successive_sx_then_sz_on_zero():
    # sigma_x on |0>: +-1 w.p. 1/2; the post state |+-> then gives sigma_z +-1 w.p. 1/2
    j = successive_joint([SX, SZ], [1.0, 2.0], None, KET0)
    assert np.abs(j.probs - 0.25).max() < 1e-12


def test_single_measurement_is_born_exactly(rng):
    for _ in range(10):
        d = int(rng.integers(2, 5))
        a = random_observable(d, rng)
        rho = random_density(d, rng)
        j = successive_joint([a], [0.0], None, rho)
        assert np.array_equal(j.probs, born_distribution(a, rho).probs)


def test_successive_matches_explicit_product(rng):
    d = 3
    obs = [random_observable(d, rng) for _ in range(3)]
    h = random_hermitian(d, rng)
    rho = random_density(d, rng)
    times = [0.3, 1.1, 2.0]
    j = successive_joint(obs, times, h, rho)
    w, v = np.linalg.eigh(h)

    def u(t):
        return v @ np.diag(np.exp(-1j * w * t)) @ v.conj().T

    for i, e1 in enumerate(obs[0].projectors):
        for k, e2 in enumerate(obs[1].projectors):
            for n, e3 in enumerate(obs[2].projectors):
                kk = e3 @ u(0.9) @ e2 @ u(0.8) @ e1 @ u(0.3)
                expected = np.trace(kk @ rho.matrix @ kk.conj().T).real
                assert abs(j.probs[i, k, n] - expected) < 1e-12
    assert abs(j.probs.sum() - 1) < 1e-12


def test_successive_time_validation():
    with pytest.raises(ParameterError):
        successive_joint([SZ, SZ], [1.0, 1.0], None, KET0)
    with pytest.raises(ParameterError):
        successive_joint([SZ], [-0.1], None, KET0)
    with pytest.raises(ParameterError):
        successive_joint([SZ, SX], [1.0], None, KET0)


def test_commuting_joint_bell_state():
    bell = pure_state(StateVector([1, 0, 0, 1], normalize=True))
    j = commuting_joint([np.kron(SZ, np.eye(2)), np.kron(np.eye(2), SZ)], bell)
    assert j.probs == pytest.approx(np.array([[0.5, 0], [0, 0.5]]), abs=1e-15)


def test_commuting_joint_rejects_noncommuting():
    with pytest.raises(CommutativityError):
        commuting_joint([SX, SZ], KET0)


def test_commuting_successive_agree_either_order(rng):
    for _ in range(10):
        a = np.kron(random_observable(2, rng).matrix, np.eye(3))
        b = np.kron(np.eye(2), random_observable(3, rng).matrix)
        rho = random_density(6, rng)
        ref = commuting_joint([a, b], rho)
        assert successive_joint([a, b], [0.1, 0.2], None, rho).max_abs_diff(ref) < 1e-10
        assert successive_joint([b, a], [0.1, 0.2], None, rho).transpose().max_abs_diff(ref) < 1e-10


def test_degenerate_observable_uses_full_eigenprojector():
    a = Observable(np.diag([1.0, 1.0, 0.0]))
    rho = np.eye(3) / 3
    assert born_distribution(a, rho).as_dict() == pytest.approx({0.0: 1 / 3, 1.0: 2 / 3})
