import numpy as np
import pytest

from qreduction.errors import (
    DimensionError,
    HermiticityError,
    NormalizationError,
    ParameterError,
    PositivityError,
)
from qreduction.linalg import max_abs_diff, min_eigenvalue
from qreduction.objects import (
    DensityOperator,
    Instrument,
    Observable,
    Povm,
    StateVector,
    apply_instrument,
    choi_matrix,
    commutes,
    mix,
    pure_state,
    purity,
)
from qreduction.sampling import random_density, random_hermitian, random_ket, random_unitary

SX = np.array([[0, 1], [1, 0]])
SZ = np.diag([1.0, -1.0])
KET0 = np.diag([1.0, 0.0])
KET1 = np.diag([0.0, 1.0])


def test_pure_state_examples():
    assert np.array_equal(pure_state([1, 0]).matrix.real, KET0)
    plus = pure_state(StateVector([1, 1], normalize=True))
    assert max_abs_diff(plus.matrix, 0.5 * np.ones((2, 2))) < 1e-15


def test_pure_states_have_unit_purity(rng):
    for _ in range(10):
        rho = pure_state(random_ket(int(rng.integers(2, 6)), rng))
        assert abs(np.trace(rho.matrix @ rho.matrix) - 1) < 1e-12
        assert np.linalg.matrix_rank(rho.matrix, tol=1e-9) == 1


def test_state_vector_requires_normalization():
    with pytest.raises(NormalizationError):
        StateVector([1, 1])
    with pytest.raises(NormalizationError):
        StateVector([0, 0], normalize=True)


def test_density_operator_validation():
    with pytest.raises(NormalizationError):
        DensityOperator(np.diag([0.6, 0.5]))
    with pytest.raises(PositivityError):
        DensityOperator(np.diag([1.01, -0.01]))
    with pytest.raises(HermiticityError):
        DensityOperator(np.array([[0.5, 0.1], [0.0, 0.5]]))
    with pytest.raises(DimensionError):
        DensityOperator(np.ones((2, 3)) / 2)


def test_mix_examples(rng):
    assert max_abs_diff(mix(KET0, KET1, 0.5).matrix, np.eye(2) / 2) < 1e-15
    rho = random_density(3, rng)
    assert max_abs_diff(mix(rho, rho, 0.3).matrix, rho.matrix) < 1e-15
    for _ in range(10):
        r1, r2 = random_density(3, rng), random_density(3, rng)
        alpha = rng.uniform(0.01, 0.99)
        m = mix(r1, r2, alpha)
        assert abs(np.trace(m.matrix) - 1) < 1e-12
        assert max_abs_diff(m.matrix, alpha * r1.matrix + (1 - alpha) * r2.matrix) < 1e-15


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.5])
def test_mix_rejects_weights_outside_open_interval(alpha):
    with pytest.raises(ParameterError):
        mix(KET0, KET1, alpha)


def test_mix_rejects_dimension_mismatch():
    with pytest.raises(DimensionError):
        mix(KET0, np.eye(3) / 3, 0.5)


def test_observable_spectrum_and_projector_lookup():
    a = Observable(SZ)
    assert a.labels.tolist() == [-1.0, 1.0]
    assert np.array_equal(a.projector(1.0).real, KET0)
    # not an eigenvalue: E(a) = 0
    assert np.count_nonzero(a.projector(0.3)) == 0
    assert a.is_nondegenerate()


def test_observable_from_spectrum_rebuilds_matrix():
    a = Observable.from_spectrum([(2.0, KET1), (-3.0, KET0)])
    assert a.labels.tolist() == [-3.0, 2.0]
    assert max_abs_diff(a.matrix, np.diag([-3.0, 2.0])) < 1e-15
    with pytest.raises(ParameterError):
        Observable.from_spectrum([(1.0, KET0)])
    with pytest.raises(ParameterError):
        Observable.from_spectrum([(1.0, KET0), (1.0, KET1)])


def test_observable_eigenvectors_are_unit_and_phase_fixed(rng):
    u = random_unitary(3, rng)
    a = Observable(u @ np.diag([0.0, 1.0, 5.0]) @ u.conj().T)
    for (label, e), v in zip(a.spectrum, a.eigenvectors()):
        assert abs(np.linalg.norm(v) - 1) < 1e-12
        assert max_abs_diff(np.outer(v, v.conj()), e) < 1e-12
        assert max_abs_diff(a.matrix @ v, label * v) < 1e-10
    assert np.allclose(Observable(np.diag([3.0, 1.0, 2.0])).eigenvectors(), np.eye(3)[[1, 2, 0]])


def test_commutes_examples(rng):
    assert commutes(SZ, SZ @ SZ)
    assert not commutes(SX, SZ)
    for _ in range(5):
        a, b = random_hermitian(2, rng), random_hermitian(3, rng)
        assert commutes(np.kron(a, np.eye(3)), np.kron(np.eye(2), b))
    with pytest.raises(DimensionError):
        commutes(SZ, np.eye(3))


def test_choi_identity_channel():
    choi = choi_matrix([np.eye(2)])
    omega = np.array([1, 0, 0, 1.0])
    assert max_abs_diff(choi, np.outer(omega, omega)) < 1e-15
    assert np.allclose(np.linalg.eigvalsh(choi), [0, 0, 0, 2])


def test_choi_zero_operator():
    assert np.count_nonzero(choi_matrix([np.zeros((2, 2))])) == 0


def test_choi_matches_definition(rng):
    ops = [rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(2)]
    omega = np.eye(3).reshape(-1)
    expected = sum(np.kron(k, np.eye(3)) @ np.outer(omega, omega) @ np.kron(k, np.eye(3)).conj().T for k in ops)
    assert max_abs_diff(choi_matrix(ops), expected) < 1e-12


def test_choi_of_projective_branch_is_psd():
    for e in (KET0, KET1):
        assert min_eigenvalue(choi_matrix([e])) >= -1e-12


def test_choi_dimension_errors():
    with pytest.raises(DimensionError):
        choi_matrix([])
    with pytest.raises(DimensionError):
        choi_matrix([np.eye(2), np.eye(3)])


def _projective_instrument(obs):
    return Instrument([(a, [e]) for a, e in Observable(obs).spectrum])


def test_identity_instrument(rng):
    rho = random_density(3, rng)
    (out,) = apply_instrument(Instrument([(0.0, [np.eye(3)])]), rho)
    assert out.probability == pytest.approx(1.0)
    assert max_abs_diff(out.post_state.matrix, rho.matrix) < 1e-14


def test_projective_instrument_on_plus():
    plus = pure_state(StateVector([1, 1], normalize=True))
    results = apply_instrument(_projective_instrument(SZ), plus)
    assert [r.label for r in results] == [-1.0, 1.0]
    assert [r.probability for r in results] == pytest.approx([0.5, 0.5], abs=1e-15)
    assert max_abs_diff(results[0].post_state.matrix, KET1) < 1e-15
    assert max_abs_diff(results[1].post_state.matrix, KET0) < 1e-15


def test_zero_probability_branch_has_no_post_state():
    results = apply_instrument(_projective_instrument(SZ), KET0)
    assert results[0].probability == 0.0
    assert results[0].post_state is None


def _random_instrument(dim, rng, n_branches=3, n_kraus=2):
    # rows of a random isometry C^dim -> C^(dim * n) cut into Kraus operators
    n = n_branches * n_kraus
    iso = random_unitary(dim * n, rng)[:, :dim]
    blocks = [iso[k * dim:(k + 1) * dim] for k in range(n)]
    return Instrument([(float(b), blocks[b * n_kraus:(b + 1) * n_kraus]) for b in range(n_branches)])


def test_apply_instrument_matches_unnormalized_sum(rng):
    inst = _random_instrument(3, rng)
    rho = random_density(3, rng)
    results = apply_instrument(inst, rho)
    assert sum(r.probability for r in results) == pytest.approx(1.0, abs=1e-9)
    recombined = sum(r.probability * r.post_state.matrix for r in results)
    direct = sum(k @ rho.matrix @ k.conj().T for _, ops in inst.branches for k in ops)
    assert max_abs_diff(recombined, direct) < 1e-12
    for r in results:
        assert -1e-12 <= r.probability <= 1 + 1e-12


def test_instrument_rejects_non_normalized_family():
    with pytest.raises(NormalizationError):
        Instrument([(0.0, [KET0]), (1.0, [0.5 * KET1])])


def test_instrument_rejects_inconsistent_shapes():
    with pytest.raises(DimensionError):
        Instrument([(0.0, [np.eye(2)]), (1.0, [np.zeros((3, 3))])])


def test_apply_instrument_dimension_mismatch(rng):
    with pytest.raises(DimensionError):
        apply_instrument(_projective_instrument(SZ), random_density(3, rng))


def test_instrument_povm(rng):
    inst = _random_instrument(2, rng)
    povm = inst.povm()
    rho = random_density(2, rng)
    probs = [r.probability for r in apply_instrument(inst, rho)]
    assert np.allclose(povm.probabilities(rho), probs, atol=1e-12)


def test_povm_validation():
    Povm([(0.0, KET0), (1.0, KET1)])
    with pytest.raises(NormalizationError):
        Povm([(0.0, KET0)])
    with pytest.raises(PositivityError):
        Povm([(0.0, np.diag([1.5, 0.0])), (1.0, np.diag([-0.5, 1.0]))])


def test_purity_helper(rng):
    assert purity(np.eye(4) / 4) == pytest.approx(0.25)
