import numpy as np
import pytest

from modules.data_manager import state_to_document
from modules.ensembles import (DEFAULT_SEED, EnsembleSampler, EnsembleSpec, FamilySpec, derive_seed,
                               sample_generator)
from modules.errors import DimensionError, RangeError, ValidationError
from modules.measures import DualityMeasures, batch_reports
from modules.quanton_state import QuantonState, validate_batch

sampler = EnsembleSampler()
measures = DualityMeasures()


def test_sample_pure_is_normalized_and_deterministic():
    first = sampler.sample_pure(5, 12345)
    second = sampler.sample_pure(5, 12345)
    assert abs(np.sum(np.abs(first.c) ** 2) - 1.0) <= 1e-14
    np.testing.assert_array_equal(first.c, second.c)
    assert not np.array_equal(first.c, sampler.sample_pure(5, 12345, index=1).c)
    assert not np.array_equal(first.c, sampler.sample_pure(5, 12346).c)


def test_batch_rows_match_single_samples():
    batch = sampler.sample_pure_batch(3, 7, 10, 15)
    for row, index in enumerate(range(10, 15)):
        np.testing.assert_array_equal(batch[row], sampler.sample_pure(3, 7, index).c)


def test_haar_first_probability_mean():
    amplitudes = sampler.sample_pure_batch(4, DEFAULT_SEED, 0, 10000)
    assert np.mean(np.abs(amplitudes[:, 0]) ** 2) == pytest.approx(0.25, abs=0.01)


def test_sample_mixed_properties():
    rhos = sampler.sample_mixed_batch(4, 4, 5, 0, 500)
    assert np.all(validate_batch(rhos)['passed'])
    assert np.linalg.eigvalsh(rhos).min() >= -1e-12
    rank_one = sampler.sample_mixed(5, 1, 5)
    assert abs(measures.duality_report(rank_one).residual) <= 1e-12


def test_hilbert_schmidt_mean_purity_two_paths():
    values = batch_reports(sampler.sample_mixed_batch(2, 2, DEFAULT_SEED, 0, 10000))
    assert np.mean(values['purity']) == pytest.approx(0.8, abs=0.01)


def test_sample_mixed_rank_range():
    with pytest.raises(RangeError):
        sampler.sample_mixed(3, 4, 1)
    with pytest.raises(RangeError):
        sampler.sample_mixed(3, 0, 1)
    with pytest.raises(DimensionError):
        sampler.sample_pure(1, 1)


def test_ensemble_spec_validation():
    assert EnsembleSpec('haar_pure', 3).rank == 1
    assert EnsembleSpec('hilbert_schmidt_mixed', 3).rank == 3
    assert EnsembleSpec('rank_k_mixed', 4, rank=2).rank == 2
    with pytest.raises(RangeError):
        EnsembleSpec('bures', 3)
    with pytest.raises(RangeError):
        EnsembleSpec('rank_k_mixed', 3)
    with pytest.raises(RangeError):
        EnsembleSpec('haar_pure', 3, rank=2)
    with pytest.raises(RangeError):
        EnsembleSpec('haar_pure', 3, seed=-1)
    with pytest.raises(RangeError):
        EnsembleSpec('haar_pure', 3, seed=2 ** 64)
    with pytest.raises(DimensionError):
        EnsembleSpec('haar_pure', 1)


def test_sample_batch_follows_ensemble_settings():
    spec = EnsembleSpec('rank_k_mixed', 4, rank=2, seed=9)
    rhos = sampler.sample_batch(spec, 0, 50)
    assert rhos.shape == (50, 4, 4)
    assert np.max(np.linalg.matrix_rank(rhos, tol=1e-10)) == 2
    np.testing.assert_array_equal(sampler.sample_state(spec, 17).rho, rhos[17])


def test_identical_spec_serializes_identically():
    spec = EnsembleSpec('hilbert_schmidt_mixed', 3, seed=77)
    assert state_to_document(sampler.sample_state(spec, 4)) == state_to_document(sampler.sample_state(spec, 4))


def test_seed_streams():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert derive_seed(1, 2, 3) != derive_seed(1, 3, 2)
    first = sample_generator(5, 0).standard_normal(4)
    np.testing.assert_array_equal(first, sample_generator(5, 0).standard_normal(4))


def test_sample_diagonal_floor():
    probabilities = sampler.sample_diagonal_batch(5, 3, 0, 200, floor=1e-3)
    assert probabilities.min() >= 1e-3
    np.testing.assert_allclose(probabilities.sum(axis=1), 1.0)
    with pytest.raises(RangeError):
        sampler.sample_diagonal_batch(5, 3, 0, 10, floor=0.3)
    assert isinstance(sampler.sample_diagonal(3, 1), QuantonState)


def test_two_slit_bias_family():
    family = sampler.family_states(FamilySpec('two_slit_bias', 3))
    assert [parameter for parameter, _ in family] == [0.0, 0.5, 1.0]
    midpoint = measures.duality_report(family[1][1])
    assert midpoint.predictability == 0.0
    assert midpoint.coherence == pytest.approx(1.0)
    end = measures.duality_report(family[2][1])
    assert end.predictability == 1.0
    assert end.coherence == 0.0


def test_two_slit_bias_point():
    parameter, state = sampler.family_states(FamilySpec('two_slit_bias', 11))[9]
    assert parameter == pytest.approx(0.9)
    report = measures.duality_report(state)
    assert report.predictability == pytest.approx(0.8, abs=1e-12)
    assert report.coherence == pytest.approx(0.6, abs=1e-12)
    assert abs(report.residual) <= 1e-12


def test_two_slit_bias_traces_quarter_circle():
    family = sampler.family_states(FamilySpec('two_slit_bias', 1000))
    values = batch_reports(np.stack([state.rho for _, state in family]))
    assert np.max(np.abs(values['residual'])) <= 1e-12


def test_channel_families(equal_pure2):
    dephased = sampler.family_states(FamilySpec('dephase_path', 5, equal_pure2))
    assert len(dephased) == 5
    assert measures.coherence(dephased[0][1]) == 0.0
    assert measures.coherence(dephased[-1][1]) == pytest.approx(1.0)
    depolarized = sampler.family_states(FamilySpec('depolarize_path', 3, equal_pure2))
    assert measures.duality_report(depolarized[1][1]).duality_sum == pytest.approx(0.25)


def test_family_spec_validation(equal_pure2):
    with pytest.raises(RangeError):
        FamilySpec('two_slit_bias', 1)
    with pytest.raises(RangeError):
        FamilySpec('dephase_path', 5)
    with pytest.raises(RangeError):
        FamilySpec('spiral', 5, equal_pure2)
    with pytest.raises(ValidationError):
        FamilySpec('dephase_path', 5, [[0.5, 0.6], [0.6, 0.5]])
    np.testing.assert_array_equal(FamilySpec('two_slit_bias', 4).grid(), np.linspace(0, 1, 4))
