import logging
from dataclasses import dataclass

import numpy as np

from .ensembles import (EnsembleSampler, EnsembleSpec, FamilySpec, check_paths, derive_seed,
                        sample_generator)
from .errors import FlagError
from .interference import DEFAULT_POINTS, InterferenceSimulator, fringe_visibility_batch
from .measures import (DualityMeasures, coherence_batch, distinguishability_batch,
                       durr_visibility_batch, gy_predictability_batch, predictability_batch,
                       three_slit_batch)
from .parallel_sampler import ParallelSampler, evaluate_chunk
from .quanton_state import DEFAULT_TOLERANCES, QuantonState, dephase_matrices, depolarize_matrices, validate_batch

logger = logging.getLogger(__name__)

# derive_seed のストリーム番号になるので順序を変えないこと
CHECK_NAMES = (
    'pure_states_valid',
    'principal_submatrix_bound',
    'dephase_composition',
    'depolarize_trace',
    'duality_inequality',
    'pure_state_saturation',
    'identity_form',
    'coherence_below_cross_sum',
    'ensemble_states_valid',
    'two_path_reduction',
    'dephasing_split',
    'predictability_maximum',
    'predictability_minimum',
    'equalizing_transfer',
    'predictability_continuity',
    'perturbed_predictability',
    'detector_reduction',
    'three_slit_forms',
    'haar_mean_probability',
    'hilbert_schmidt_mean_purity',
    'two_slit_bias_circle',
    'pattern_invariants',
    'fringe_visibility_coherence',
    'fringe_visibility_dephasing',
)
CHECK_IDS = {name: index for index, name in enumerate(CHECK_NAMES)}

TIGHT = 1e-12
EXACT_REDUCTION = 1e-14
COMPOSITION_TOLERANCE = 1e-15
FRINGE_TOLERANCE = 1e-3
FRINGE_DEPHASING_TOLERANCE = 2e-3
# 1状態あたり n^2 要素として、チャンク内の要素数をこの程度に抑える
CHUNK_ELEMENTS = 2 ** 18
PATTERN_CHUNK_ELEMENTS = 2 ** 21
MAX_PATTERN_STATES = 10 ** 4
MAX_PERTURBED_STATES = 1000
BIAS_GRID_STEPS = 1000
CONTINUITY_FLOOR = 1e-3
CONTINUITY_STEPS = 11
CONTINUITY_JUDGED = (8, 9, 10)
CONTINUITY_RATIO = 0.55
# 一様分布（Pの折れ点）からこれ以上離れた基点のみ使う
CONTINUITY_KINK_DISTANCE = 1e-2
MIN_TRANSFER_GAP = 1e-2
MIN_PERTURBED_GAP = 1e-3
MEAN_SIGMAS = 5.0


@dataclass(frozen=True)
class CheckResult:
    """1つの不変条件チェックの結果（worst は大きいほど悪い統計量）"""

    check: str
    n: int
    trials: int
    worst: float
    tolerance: float
    passed: bool
    detail: str = ''

    @property
    def verdict(self):
        return 'pass' if self.passed else 'fail'

    def to_dict(self):
        return {
            'check': self.check,
            'n': self.n,
            'trials': self.trials,
            'worst': self.worst,
            'tolerance': self.tolerance,
            'verdict': self.verdict,
            'detail': self.detail,
        }


@dataclass(frozen=True)
class VerificationReport:
    n_max: int
    samples: int
    seed: int
    results: tuple

    @property
    def passed(self):
        return all(result.passed for result in self.results)

    @property
    def failures(self):
        return [result for result in self.results if not result.passed]

    def to_dict(self):
        return {
            'n_max': self.n_max,
            'samples': self.samples,
            'seed': self.seed,
            'passed': self.passed,
            'checks': [result.to_dict() for result in self.results],
        }


def _diagonal_stack(probabilities):
    count, n = probabilities.shape
    rhos = np.zeros((count, n, n), dtype=np.complex128)
    index = np.arange(n)
    rhos[:, index, index] = probabilities
    return rhos


def _result(name, n, trials, worst, tolerance, detail='', strict=False):
    worst = float(worst)
    passed = worst < tolerance if strict else worst <= tolerance
    return CheckResult(name, n, int(trials), worst, float(tolerance), bool(passed), detail)


def run_checks_for_n(n, samples, seed):
    """経路数 n の全チェックを実行する（並列処理用ワーカー）"""
    return InvariantChecker().run_for_n(n, samples, seed)


class InvariantChecker:
    """状態・指標・アンサンブル・干渉縞の不変条件を乱数試行で検証するクラス"""

    def __init__(self):
        self.sampler = EnsembleSampler()
        self.measures = DualityMeasures()
        self.simulator = InterferenceSimulator()

    def _seed(self, seed, name, n):
        return derive_seed(seed, CHECK_IDS[name], n)

    def _rng(self, seed, name, n):
        return sample_generator(self._seed(seed, name, n), 0)

    @staticmethod
    def _chunks(trials, n, elements=CHUNK_ELEMENTS):
        size = max(1, elements // (n * n))
        return [(start, min(start + size, trials)) for start in range(0, trials, size)]

    def _mixed(self, seed, name, n, start, stop):
        return self.sampler.sample_mixed_batch(n, n, self._seed(seed, name, n), start, stop)

    # --- state-core ---

    def check_pure_states_valid(self, n, trials, seed):
        name = 'pure_states_valid'
        worst, passed = 0.0, True
        for start, stop in self._chunks(trials, n):
            c = self.sampler.sample_pure_batch(n, self._seed(seed, name, n), start, stop)
            report = validate_batch(c[:, :, None] * c.conj()[:, None, :])
            worst = max(worst, float(np.max(report['hermitian_defect'])),
                        float(np.max(report['trace_defect'])), float(np.max(-report['min_eigenvalue'])))
            passed = passed and bool(np.all(report['passed']))
        return CheckResult(name, n, trials, worst, DEFAULT_TOLERANCES.herm, passed, 'validate(from_pure(c)) passes')

    def check_principal_submatrix_bound(self, n, trials, seed):
        name = 'principal_submatrix_bound'
        worst = -np.inf
        for start, stop in self._chunks(trials, n):
            rhos = self._mixed(seed, name, n, start, stop)
            roots = np.sqrt(np.clip(np.diagonal(rhos, axis1=-2, axis2=-1).real, 0.0, 1.0))
            excess = np.abs(rhos) - roots[:, :, None] * roots[:, None, :]
            worst = max(worst, float(np.max(excess)))
        return _result(name, n, trials, worst, TIGHT, 'max |rho_jk| - sqrt(rho_jj rho_kk)')

    def check_dephase_composition(self, n, trials, seed):
        name = 'dephase_composition'
        rng = self._rng(seed, name, n)
        worst = 0.0
        for start, stop in self._chunks(trials, n):
            rhos = self._mixed(seed, name, n, start, stop)
            first, second = rng.uniform(size=(2, stop - start))
            nested = dephase_matrices(dephase_matrices(rhos, first), second)
            direct = dephase_matrices(rhos, first * second)
            worst = max(worst, float(np.max(np.abs(nested - direct))))
        return _result(name, n, trials, worst, COMPOSITION_TOLERANCE, 'dephase(dephase(s, a), b) vs dephase(s, ab)')

    def check_depolarize_trace(self, n, trials, seed):
        name = 'depolarize_trace'
        rng = self._rng(seed, name, n)
        worst = 0.0
        for start, stop in self._chunks(trials, n):
            rhos = self._mixed(seed, name, n, start, stop)
            mixed = depolarize_matrices(rhos, rng.uniform(size=stop - start))
            defect = np.abs(np.trace(mixed, axis1=-2, axis2=-1) - 1.0)
            worst = max(worst, float(np.max(defect)))
        return _result(name, n, trials, worst, EXACT_REDUCTION, 'trace defect after depolarize')

    # --- measures ---

    def _ensemble_values(self, spec, trials):
        chunks = [evaluate_chunk(spec, start, stop)['values'] for start, stop in self._chunks(trials, spec.n)]
        return {key: np.concatenate([chunk[key] for chunk in chunks]) for key in chunks[0]}

    def check_monte_carlo(self, n, trials, seed):
        """HS混合・ハール純粋・ランクk混合の各アンサンブルで P^2 + C^2 ≤ 1 関連をまとめて検証"""
        hs = self._ensemble_values(
            EnsembleSpec('hilbert_schmidt_mixed', n, seed=self._seed(seed, 'duality_inequality', n)), trials)
        pure = self._ensemble_values(
            EnsembleSpec('haar_pure', n, seed=self._seed(seed, 'pure_state_saturation', n)), trials)
        rank = max(1, n // 2)
        rank_k = self._ensemble_values(
            EnsembleSpec('rank_k_mixed', n, rank=rank, seed=self._seed(seed, 'ensemble_states_valid', n)), trials)

        identity_gap = max(float(hs['identity_gap'].max()), float(pure['identity_gap'].max()))
        coherence_excess = max(float(np.max(v['coherence'] - v['cross_sum'])) for v in (hs, pure, rank_k))
        invalid = sum(int(np.count_nonzero(~v['valid'])) for v in (hs, pure, rank_k))
        results = [
            _result('duality_inequality', n, trials, -hs['residual'].min(), TIGHT,
                    'hilbert_schmidt_mixed: -min(1 - P^2 - C^2)'),
            _result('pure_state_saturation', n, trials, np.max(np.abs(pure['residual'])), TIGHT,
                    'haar_pure: max |1 - P^2 - C^2|'),
            _result('identity_form', n, 2 * trials, identity_gap, TIGHT, '|P^2 + C^2 - (1 - A^2 + B^2)|'),
            _result('coherence_below_cross_sum', n, 3 * trials, coherence_excess, TIGHT, 'max C - A'),
            CheckResult('ensemble_states_valid', n, 3 * trials, float(invalid), 0.0, invalid == 0,
                        f"invalid states across haar_pure, hilbert_schmidt_mixed, rank_k_mixed (rank {rank})"),
        ]
        if rank == 1:
            results.append(_result('pure_state_saturation', n, trials, np.max(np.abs(rank_k['residual'])), TIGHT,
                                   'rank_k_mixed with rank 1: max |1 - P^2 - C^2|'))
        return results

    def check_two_path_reduction(self, n, trials, seed):
        name = 'two_path_reduction'
        rhos = self._mixed(seed, name, n, 0, trials)
        twice_off = 2.0 * np.abs(rhos[:, 0, 1])
        worst = max(
            float(np.max(np.abs(predictability_batch(rhos) - gy_predictability_batch(rhos)))),
            float(np.max(np.abs(coherence_batch(rhos) - twice_off))),
            float(np.max(np.abs(durr_visibility_batch(rhos) - twice_off))),
        )
        return _result(name, n, trials, worst, TIGHT, 'P vs two-path P; C and V vs 2|rho_12|')

    def check_dephasing_split(self, n, trials, seed):
        name = 'dephasing_split'
        rng = self._rng(seed, name, n)
        predictability_change, coherence_error = 0.0, 0.0
        for start, stop in self._chunks(trials, n):
            rhos = self._mixed(seed, name, n, start, stop)
            lam = rng.uniform(size=stop - start)
            dephased = dephase_matrices(rhos, lam)
            predictability_change = max(predictability_change, float(np.max(
                np.abs(predictability_batch(dephased) - predictability_batch(rhos)))))
            coherence_error = max(coherence_error, float(np.max(
                np.abs(coherence_batch(dephased) - lam * coherence_batch(rhos)))))
        return [
            _result(name, n, trials, predictability_change, 0.0, 'P unchanged by dephasing'),
            _result(name, n, trials, coherence_error, TIGHT, 'C scales by lambda'),
        ]

    def check_predictability_maximum(self, n, trials, seed):
        name = 'predictability_maximum'
        basis = predictability_batch(_diagonal_stack(np.eye(n)))
        probabilities = self.sampler.sample_diagonal_batch(n, self._seed(seed, name, n), 0, trials)
        above = float(np.max(predictability_batch(_diagonal_stack(probabilities)))) - 1.0
        worst = max(float(np.max(np.abs(basis - 1.0))), above)
        return _result(name, n, trials + n, worst, 0.0, 'P = 1 on basis states and P <= 1 elsewhere')

    def check_predictability_minimum(self, n, trials, seed):
        name = 'predictability_minimum'
        rng = self._rng(seed, name, n)
        uniform = float(predictability_batch(_diagonal_stack(np.full((1, n), 1.0 / n)))[0])

        probabilities = self.sampler.sample_diagonal_batch(n, self._seed(seed, name, n), 0, trials)
        probabilities = probabilities[np.max(np.abs(probabilities - 1.0 / n), axis=1) >= 1e-6]
        # 一様分布から 1e-6 だけずらした状態
        nudged = np.full((trials, n), 1.0 / n)
        rows = np.arange(trials)
        j = rng.integers(0, n, size=trials)
        k = (j + rng.integers(1, n, size=trials)) % n
        nudged[rows, j] += 1e-6
        nudged[rows, k] -= 1e-6
        smallest = float(np.min(predictability_batch(_diagonal_stack(np.vstack([probabilities, nudged])))))
        passed = uniform == 0.0 and smallest > 0.0
        return CheckResult(name, n, len(probabilities) + trials + 1, -smallest, 0.0, passed,
                           f"P(uniform) = {uniform!r}; smallest P off uniform = {smallest:.3g}")

    def check_equalizing_transfer(self, n, trials, seed):
        """ρ_kk から ρ_jj（ρ_jj < ρ_kk）へ δ ∈ (0, 差/2] を移すと P が厳密に減少する"""
        name = 'equalizing_transfer'
        rng = self._rng(seed, name, n)
        base_seed = self._seed(seed, name, n)
        chosen, start = [], 0
        while sum(len(block) for block in chosen) < trials:
            block = self.sampler.sample_diagonal_batch(n, base_seed, start, start + trials)
            start += trials
            chosen.append(block[np.ptp(block, axis=1) >= 2 * MIN_TRANSFER_GAP])
        probabilities = np.vstack(chosen)[:trials]

        rows = np.arange(trials)
        j = rng.integers(0, n, size=trials)
        k = (j + rng.integers(1, n, size=trials)) % n
        low = np.where(probabilities[rows, j] <= probabilities[rows, k], j, k)
        high = np.where(low == j, k, j)
        gap = probabilities[rows, high] - probabilities[rows, low]
        small = gap < MIN_TRANSFER_GAP
        low = np.where(small, probabilities.argmin(axis=1), low)
        high = np.where(small, probabilities.argmax(axis=1), high)
        gap = probabilities[rows, high] - probabilities[rows, low]

        delta = rng.uniform(0.01, 1.0, size=trials) * gap / 2.0
        moved = probabilities.copy()
        moved[rows, low] += delta
        moved[rows, high] -= delta
        change = predictability_batch(_diagonal_stack(moved)) - predictability_batch(_diagonal_stack(probabilities))
        return _result(name, n, trials, np.max(change), 0.0, 'max P(after) - P(before)', strict=True)

    def check_predictability_continuity(self, n, trials, seed):
        """ε を半分にすると |ΔP| も半分以下になる（ε = 1e-2·2^-m の漸近で判定）"""
        name = 'predictability_continuity'
        rng = self._rng(seed, name, n)
        base_seed = self._seed(seed, name, n)
        chosen, start = [], 0
        while sum(len(block) for block in chosen) < trials:
            block = self.sampler.sample_diagonal_batch(n, base_seed, start, start + trials, CONTINUITY_FLOOR)
            start += trials
            chosen.append(block[np.max(np.abs(block - 1.0 / n), axis=1) >= CONTINUITY_KINK_DISTANCE])
        probabilities = np.vstack(chosen)[:trials]

        rows = np.arange(trials)
        giver = probabilities.argmax(axis=1)
        taker = (giver + rng.integers(1, n, size=trials)) % n
        direction = np.zeros_like(probabilities)
        direction[rows, taker] = 1.0
        direction[rows, giver] = -1.0

        differences = np.full((trials, CONTINUITY_STEPS), np.nan)
        for m in range(CONTINUITY_STEPS):
            epsilon = 1e-2 * 2.0 ** -m
            valid = np.min(probabilities[rows[:, None], np.stack([giver, taker], axis=1)], axis=1) >= epsilon
            plus = predictability_batch(_diagonal_stack(probabilities + epsilon * direction))
            minus = predictability_batch(_diagonal_stack(np.clip(probabilities - epsilon * direction, 0.0, 1.0)))
            differences[:, m] = np.where(valid, np.abs(plus - minus), np.nan)

        worst = 0.0
        for m in CONTINUITY_JUDGED:
            with np.errstate(divide='ignore', invalid='ignore'):
                ratio = differences[:, m] / differences[:, m - 1]
            # 数値誤差に埋もれるほど小さい差は収束済みとみなす
            ratio = np.where(differences[:, m] <= TIGHT, 0.0, ratio)
            worst = max(worst, float(np.max(ratio)))
        return _result(name, n, trials, worst, CONTINUITY_RATIO, 'max |dP(eps/2)| / |dP(eps)| over m = 8..10')

    def check_perturbed_predictability(self, n, trials, seed):
        name = 'perturbed_predictability'
        trials = min(trials, MAX_PERTURBED_STATES)
        rng = self._rng(seed, name, n)
        base_seed = self._seed(seed, name, n)
        worst, index, tested = -np.inf, 0, 0
        while tested < trials:
            p = np.sort(self.sampler.sample_diagonal_batch(n, base_seed, index, index + 1)[0])
            index += 1
            gap = np.sqrt(p[1]) - np.sqrt(p[0])
            if gap < MIN_PERTURBED_GAP:
                continue
            state = QuantonState.diagonal_state(p, renormalize=True)
            epsilon = rng.uniform(0.01, 0.99) * gap
            change = self.measures.perturbed_predictability(state, 1, 2, epsilon) - self.measures.predictability(state)
            worst = max(worst, change)
            tested += 1
        return _result(name, n, trials, worst, 0.0, "max P' - P", strict=True)

    def check_detector_reduction(self, n, trials, seed):
        name = 'detector_reduction'
        ones, identity = np.ones((n, n)), np.eye(n)
        reduction, orthogonal = 0.0, 0.0
        for start, stop in self._chunks(trials, n):
            c = self.sampler.sample_pure_batch(n, self._seed(seed, name, n), start, stop)
            rhos = c[:, :, None] * c.conj()[:, None, :]
            reduction = max(reduction, float(np.max(
                np.abs(distinguishability_batch(c, ones) - predictability_batch(rhos)))))
            orthogonal = max(orthogonal, float(np.max(np.abs(distinguishability_batch(c, identity) - 1.0))))
        return [
            _result(name, n, trials, reduction, EXACT_REDUCTION, 'identical detectors: |D - P(from_pure)|'),
            _result(name, n, trials, orthogonal, 0.0, 'orthogonal detectors: |D - 1|'),
        ]

    def check_three_slit_forms(self, n, trials, seed):
        name = 'three_slit_forms'
        rhos = self._mixed(seed, name, n, 0, trials)
        c, p = three_slit_batch(rhos)
        worst = max(float(np.max(np.abs(c - coherence_batch(rhos)))),
                    float(np.max(np.abs(p - predictability_batch(rhos)))))
        return _result(name, n, trials, worst, EXACT_REDUCTION, 'explicit three-path forms vs general forms')

    # --- ensembles ---

    def check_haar_mean_probability(self, n, trials, seed):
        name = 'haar_mean_probability'
        first = np.concatenate([
            np.abs(self.sampler.sample_pure_batch(n, self._seed(seed, name, n), start, stop)[:, 0]) ** 2
            for start, stop in self._chunks(trials, n)
        ])
        return self._mean_result(name, n, first, 1.0 / n, 'mean |c_1|^2 vs 1/n')

    def check_hilbert_schmidt_mean_purity(self, n, trials, seed):
        name = 'hilbert_schmidt_mean_purity'
        purity = np.concatenate([
            evaluate_chunk(EnsembleSpec('hilbert_schmidt_mixed', n, seed=self._seed(seed, name, n)),
                           start, stop)['values']['purity']
            for start, stop in self._chunks(trials, n)
        ])
        return self._mean_result(name, n, purity, 2.0 * n / (n * n + 1.0), 'mean purity vs 2n/(n^2+1)')

    @staticmethod
    def _mean_result(name, n, values, expected, detail):
        """標本平均と期待値の差を標準誤差の MEAN_SIGMAS 倍で判定"""
        trials = values.shape[0]
        spread = float(np.std(values, ddof=1)) if trials > 1 else float(np.abs(values[0] - expected))
        tolerance = MEAN_SIGMAS * spread / np.sqrt(trials)
        deviation = abs(float(np.mean(values)) - expected)
        return _result(name, n, trials, deviation, tolerance, f"{detail} (mean {float(np.mean(values)):.6f})")

    def check_two_slit_bias_circle(self, n, trials, seed):
        name = 'two_slit_bias_circle'
        states = self.sampler.family_states(FamilySpec('two_slit_bias', BIAS_GRID_STEPS))
        worst = max(abs(self.measures.duality_report(state).residual) for _, state in states)
        return _result(name, n, len(states), worst, TIGHT, 'max |residual| along a in [0, 1]')

    # --- interference ---

    def check_pattern_invariants(self, n, trials, seed):
        name = 'pattern_invariants'
        trials = min(trials, MAX_PATTERN_STATES)
        negative, mean_error, excess = -np.inf, 0.0, -np.inf
        for start, stop in self._chunks(trials, 1, PATTERN_CHUNK_ELEMENTS // DEFAULT_POINTS):
            intensity = self.simulator.pattern_batch(self._mixed(seed, name, n, start, stop), DEFAULT_POINTS)
            negative = max(negative, float(np.max(-intensity)))
            mean_error = max(mean_error, float(np.max(np.abs(intensity.mean(axis=1) - 1.0))))
            excess = max(excess, float(np.max(intensity)) - n)
        return [
            _result(name, n, trials, negative, TIGHT, 'max -I(phi)'),
            _result(name, n, trials, mean_error, TIGHT, '|mean I - 1|'),
            _result(name, n, trials, excess, TIGHT, 'max I(phi) - n'),
        ]

    def check_fringe_visibility(self, n, trials, seed):
        trials = min(trials, MAX_PATTERN_STATES)
        rng = self._rng(seed, 'fringe_visibility_dephasing', n)
        coherence_error, dephasing_error = 0.0, 0.0
        for start, stop in self._chunks(trials, 1, PATTERN_CHUNK_ELEMENTS // DEFAULT_POINTS):
            rhos = self._mixed(seed, 'fringe_visibility_coherence', n, start, stop)
            visibility = fringe_visibility_batch(self.simulator.pattern_batch(rhos, DEFAULT_POINTS))
            coherence_error = max(coherence_error, float(np.max(np.abs(visibility - coherence_batch(rhos)))))
            lam = rng.uniform(size=stop - start)
            dephased = fringe_visibility_batch(self.simulator.pattern_batch(dephase_matrices(rhos, lam), DEFAULT_POINTS))
            dephasing_error = max(dephasing_error, float(np.max(np.abs(dephased - lam * visibility))))
        return [
            _result('fringe_visibility_coherence', n, trials, coherence_error, FRINGE_TOLERANCE,
                    '|fringe visibility - C|'),
            _result('fringe_visibility_dephasing', n, trials, dephasing_error, FRINGE_DEPHASING_TOLERANCE,
                    '|V(dephase(s, lambda)) - lambda V(s)|'),
        ]

    def run_for_n(self, n, samples, seed):
        """経路数 n に適用されるチェックをすべて実行"""
        checks = [
            self.check_pure_states_valid,
            self.check_principal_submatrix_bound,
            self.check_dephase_composition,
            self.check_depolarize_trace,
            self.check_monte_carlo,
            self.check_dephasing_split,
            self.check_predictability_maximum,
            self.check_predictability_minimum,
            self.check_equalizing_transfer,
            self.check_predictability_continuity,
            self.check_detector_reduction,
            self.check_haar_mean_probability,
            self.check_hilbert_schmidt_mean_purity,
            self.check_pattern_invariants,
        ]
        if n == 2:
            checks += [self.check_two_path_reduction, self.check_perturbed_predictability,
                       self.check_two_slit_bias_circle, self.check_fringe_visibility]
        if n == 3:
            checks.append(self.check_three_slit_forms)

        results = []
        for check in checks:
            outcome = check(n, samples, seed)
            results.extend(outcome if isinstance(outcome, list) else [outcome])
        for result in results:
            if not result.passed:
                logger.warning(f"Check {result.check} failed for n = {n}: worst {result.worst:.3g} "
                               f"> tolerance {result.tolerance:.3g} ({result.detail})")
        logger.debug(f"Finished {len(results)} checks for n = {n}")
        return results

    def run(self, n_max, samples, seed, sampler=None):
        """n = 2..n_max の全チェックを経路数ごとに並列実行し、n の昇順で結果を返す"""
        if isinstance(n_max, bool) or int(n_max) != n_max or int(n_max) < 2:
            raise FlagError(f"n-max must be an integer >= 2, got {n_max!r}")
        if isinstance(samples, bool) or int(samples) != samples or int(samples) < 1:
            raise FlagError(f"samples must be an integer >= 1, got {samples!r}")
        n_max = check_paths(n_max)
        samples = int(samples)
        sampler = sampler or ParallelSampler()

        logger.info(f"Running invariant checks for n = 2..{n_max} with {samples} samples (seed {seed})")
        tasks = [(n, samples, seed) for n in range(2, n_max + 1)]
        per_n = sampler.map_ordered(run_checks_for_n, tasks, label='path counts')
        results = tuple(result for results in per_n for result in results)
        return VerificationReport(n_max, samples, seed, results)
