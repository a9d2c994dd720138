import numpy as np
import pytest

from modules.errors import DimensionError, NormalizationError, RangeError, ValidationError
from modules.quanton_state import (PureState, QuantonState, Tolerances, dephase_matrices, validate,
                                   validate_batch)


def test_validate_maximally_mixed():
    report = validate(np.eye(2) / 2)
    assert report.passed
    assert report.verdict == 'pass'
    assert report.hermitian_defect == 0.0
    assert report.trace_defect == 0.0
    assert report.min_eigenvalue == pytest.approx(0.5)


def test_validate_not_positive():
    report = validate([[0.5, 0.6], [0.6, 0.5]])
    assert not report.passed
    assert report.min_eigenvalue == pytest.approx(-0.1, abs=1e-12)
    assert 'positive semi-definite' in report.reason


def test_validate_not_hermitian():
    report = validate([[0.5, 0.1j], [0.1j, 0.5]])
    assert not report.passed
    assert report.hermitian_defect == pytest.approx(0.2)
    assert 'Hermitian' in report.reason


def test_validate_trace_and_non_finite():
    assert not validate(np.eye(2)).passed
    report = validate([[np.nan, 0], [0, 0.5]])
    assert not report.passed
    assert 'non-finite' in report.reason


@pytest.mark.parametrize('matrix', [np.ones((2, 3)), np.ones((1, 1)), np.eye(65) / 65, np.ones(4)])
def test_validate_dimension_errors(matrix):
    with pytest.raises(DimensionError):
        validate(matrix)


def test_tolerance_scales_with_n():
    assert Tolerances().psd(8) == pytest.approx(8e-10)
    tiny_negative = np.diag([0.5 + 5e-11, 0.5, -5e-11])
    assert validate(tiny_negative).passed


def test_quanton_state_rejects_invalid():
    with pytest.raises(ValidationError) as info:
        QuantonState([[0.5, 0.6], [0.6, 0.5]])
    assert info.value.report.min_eigenvalue < 0
    assert info.value.exit_code == 2


def test_quanton_state_is_read_only():
    state = QuantonState.maximally_mixed(3)
    with pytest.raises(ValueError):
        state.rho[0, 0] = 1.0
    assert state.report.passed
    assert state.n == 3


def test_from_matrix_renormalize():
    with pytest.raises(ValidationError):
        QuantonState.from_matrix(np.eye(2))
    state = QuantonState.from_matrix(np.eye(2), renormalize=True)
    np.testing.assert_allclose(state.rho, np.eye(2) / 2)
    with pytest.raises(NormalizationError):
        QuantonState.from_matrix(np.zeros((2, 2)), renormalize=True)


def test_diagonal_clamps_small_negatives():
    state = QuantonState(np.diag([1.0 + 1e-11, -1e-11]))
    assert state.diagonal().min() == 0.0


def test_from_pure_examples(state_manager):
    np.testing.assert_array_equal(state_manager.from_pure(PureState([1, 0])).rho, np.diag([1, 0]))
    np.testing.assert_allclose(state_manager.from_pure(PureState.equal_superposition(2)).rho,
                               np.full((2, 2), 0.5), atol=1e-15)
    biased = state_manager.from_pure(PureState([np.sqrt(0.9), np.sqrt(0.1)]))
    np.testing.assert_allclose(biased.rho, [[0.9, 0.3], [0.3, 0.1]], atol=1e-15)


def test_from_pure_keeps_phases(state_manager):
    state = state_manager.from_pure(PureState([1 / np.sqrt(2), 1j / np.sqrt(2)]))
    assert state.rho[0, 1] == pytest.approx(-0.5j)
    assert state.rho[1, 0] == pytest.approx(0.5j)


def test_pure_state_normalization():
    with pytest.raises(NormalizationError):
        PureState([1.0, 1.0])
    state = PureState.from_amplitudes([3.0, 4.0], renormalize=True)
    np.testing.assert_allclose(state.c, [0.6, 0.8])
    with pytest.raises(NormalizationError):
        PureState.from_amplitudes([0.0, 0.0], renormalize=True)
    with pytest.raises(DimensionError):
        PureState([1.0])


def test_basis_uses_path_labels():
    assert PureState.basis(3, 1).c[0] == 1
    assert PureState.basis(3, 3).c[2] == 1
    with pytest.raises(RangeError):
        PureState.basis(3, 0)


def test_dephase_examples(state_manager, equal_pure2, biased_pure):
    assert state_manager.dephase(biased_pure, 1.0) is biased_pure
    np.testing.assert_array_equal(state_manager.dephase(biased_pure, 0.0).rho,
                                  np.diag(biased_pure.rho.diagonal()))
    np.testing.assert_allclose(state_manager.dephase(equal_pure2, 0.5).rho,
                               [[0.5, 0.25], [0.25, 0.5]], atol=1e-15)
    with pytest.raises(RangeError):
        state_manager.dephase(equal_pure2, 1.5)
    with pytest.raises(RangeError):
        state_manager.dephase(equal_pure2, -0.1)


def test_depolarize_examples(state_manager, equal_pure2):
    assert state_manager.depolarize(equal_pure2, 0.0) is equal_pure2
    np.testing.assert_allclose(state_manager.depolarize(equal_pure2, 1.0).rho, np.eye(2) / 2, atol=1e-15)
    np.testing.assert_allclose(state_manager.depolarize(equal_pure2, 0.5).rho,
                               [[0.5, 0.25], [0.25, 0.5]], atol=1e-15)
    with pytest.raises(RangeError):
        state_manager.depolarize(equal_pure2, 2.0)


def test_dephase_composes_multiplicatively():
    rng = np.random.default_rng(7)
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    nested = dephase_matrices(dephase_matrices(rho, 0.3), 0.7)
    np.testing.assert_allclose(nested, dephase_matrices(rho, 0.21), rtol=0, atol=1e-15)


def test_depolarize_preserves_trace(state_manager, biased_pure):
    for p in np.linspace(0.0, 1.0, 7):
        state = state_manager.depolarize(biased_pure, p)
        assert abs(np.trace(state.rho) - 1.0) <= 1e-14


def test_purity(state_manager, equal_pure2):
    assert state_manager.purity(equal_pure2) == pytest.approx(1.0)
    assert state_manager.is_pure(equal_pure2)
    mixed = QuantonState.maximally_mixed(4)
    assert state_manager.purity(mixed) == pytest.approx(0.25)
    assert not state_manager.is_pure(mixed)


def test_validate_batch_matches_single():
    stack = np.array([np.eye(2) / 2, [[0.5, 0.6], [0.6, 0.5]], np.diag([1.0, 0.0])], dtype=complex)
    batch = validate_batch(stack)
    assert batch['passed'].tolist() == [True, False, True]
    for index, matrix in enumerate(stack):
        assert batch['min_eigenvalue'][index] == pytest.approx(validate(matrix).min_eigenvalue)


def test_principal_submatrix_bound():
    rng = np.random.default_rng(11)
    for _ in range(50):
        g = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        rho = g @ g.conj().T
        state = QuantonState.from_matrix(rho, renormalize=True)
        roots = np.sqrt(state.diagonal())
        assert np.all(np.abs(state.rho) <= np.outer(roots, roots) + 1e-12)
