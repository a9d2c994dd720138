import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from multiprocessing import cpu_count
from typing import Optional

import numpy as np

from .ensembles import EnsembleSampler, EnsembleSpec
from .errors import FlagError
from .measures import batch_reports
from .quanton_state import validate_batch

THREADS_ENV = 'DUALITY_LAB_THREADS'
MAX_AUTO_WORKERS = 8
# チャンク分割はワーカー数に依存させない（結果の決定性のため）
DEFAULT_CHUNK_SIZE = 5000
VIOLATION_THRESHOLD = -1e-12
SATURATION_TOLERANCE = 1e-12
IDENTITY_TOLERANCE = 1e-12

logger = logging.getLogger(__name__)


def resolve_workers(requested=None):
    """ワーカー数を決める。未指定なら環境変数、0ならCPUコア数と8の小さい方"""
    if requested is None:
        raw = os.environ.get(THREADS_ENV, '0').strip() or '0'
        try:
            requested = int(raw)
        except ValueError as e:
            raise FlagError(f"{THREADS_ENV} must be a non-negative integer, got {raw!r}") from e
    if requested < 0:
        raise FlagError(f"worker count must be >= 0, got {requested}")
    return requested or min(cpu_count(), MAX_AUTO_WORKERS)


def evaluate_chunk(spec, start, stop, keep_states=False):
    """インデックス [start, stop) の状態を生成して全指標を計算する（並列処理用ワーカー）"""
    sampler = EnsembleSampler()
    if spec.kind == 'haar_pure':
        amplitudes = sampler.sample_pure_batch(spec.n, spec.seed, start, stop)
        rhos = amplitudes[:, :, None] * amplitudes.conj()[:, None, :]
        states = amplitudes
    else:
        rhos = sampler.sample_batch(spec, start, stop)
        states = rhos
    values = batch_reports(rhos)
    values['valid'] = validate_batch(rhos)['passed']
    values['seed_index'] = np.arange(start, stop)
    return {'start': start, 'values': values, 'states': states if keep_states else None}


@dataclass(frozen=True)
class SampleSummary:
    """Monte-Carlo サンプリングの集計結果"""

    kind: str
    n: int
    rank: int
    seed: int
    count: int
    residual_min: float
    residual_max: float
    residual_mean: float
    residual_max_abs: float
    violations: int
    saturation_violations: Optional[int]
    invalid_states: int
    identity_gap_max: float
    worst_index: int
    worst_residual: float

    @property
    def passed(self):
        return (self.violations == 0 and not self.saturation_violations
                and self.invalid_states == 0 and self.identity_gap_max <= IDENTITY_TOLERANCE)

    def to_dict(self):
        return {
            'kind': self.kind,
            'n': self.n,
            'rank': self.rank,
            'seed': self.seed,
            'count': self.count,
            'residual_min': self.residual_min,
            'residual_max': self.residual_max,
            'residual_mean': self.residual_mean,
            'residual_max_abs': self.residual_max_abs,
            'violations': self.violations,
            'saturation_violations': self.saturation_violations,
            'invalid_states': self.invalid_states,
            'identity_gap_max': self.identity_gap_max,
            'worst_index': self.worst_index,
            'worst_residual': self.worst_residual,
            'passed': self.passed,
        }


@dataclass
class SampleRun:
    """サンプリング結果（集計・指標配列・必要なら生成状態）"""

    summary: SampleSummary
    values: dict
    states: Optional[np.ndarray] = None


class ParallelSampler:
    """チャンク単位でプロセスプールに分配して状態を評価するクラス"""

    def __init__(self, max_workers=None, chunk_size=DEFAULT_CHUNK_SIZE):
        self.max_workers = resolve_workers(max_workers)
        self.chunk_size = chunk_size
        self.logger = logging.getLogger(__name__)

    def map_ordered(self, function, tasks, label='tasks'):
        """tasks（引数タプルのリスト）を並列実行し、入力順に結果を返す"""
        total_count = len(tasks)
        results = [None] * total_count
        start_time = time.time()

        if self.max_workers == 1 or total_count <= 1:
            for completed_count, args in enumerate(tasks, 1):
                results[completed_count - 1] = function(*args)
                self._log_progress(label, completed_count, total_count, start_time)
            return results

        self.logger.info(f"Using {self.max_workers} parallel workers for {total_count} {label}")
        with ProcessPoolExecutor(max_workers=self.max_workers) as executor:
            future_to_index = {
                executor.submit(function, *args): index
                for index, args in enumerate(tasks)
            }
            completed_count = 0
            for future in as_completed(future_to_index):
                results[future_to_index[future]] = future.result()
                completed_count += 1
                self._log_progress(label, completed_count, total_count, start_time)
        return results

    def _log_progress(self, label, completed_count, total_count, start_time):
        progress_percent = (completed_count / total_count) * 100
        elapsed_time = time.time() - start_time
        estimated_remaining = elapsed_time / completed_count * (total_count - completed_count)
        self.logger.info(f"Progress: {completed_count}/{total_count} {label} ({progress_percent:.1f}%) "
                         f"Elapsed: {elapsed_time:.1f}s "
                         f"ETA: {estimated_remaining:.1f}s")

    def chunks(self, count):
        return [(start, min(start + self.chunk_size, count)) for start in range(0, count, self.chunk_size)]

    def sample(self, spec, count, keep_states=False):
        """EnsembleSpec に従って count 個の状態を生成・評価し SampleRun を返す"""
        if not isinstance(spec, EnsembleSpec):
            raise TypeError(f"expected an EnsembleSpec, got {type(spec).__name__}")
        if isinstance(count, bool) or int(count) != count or int(count) < 1:
            raise FlagError(f"count must be an integer >= 1, got {count!r}")
        count = int(count)

        self.logger.info(f"Sampling {count} {spec.kind} states (n = {spec.n}, rank = {spec.rank}, seed = {spec.seed})")
        tasks = [(spec, start, stop, keep_states) for start, stop in self.chunks(count)]
        chunk_results = self.map_ordered(evaluate_chunk, tasks, label='chunks')

        values = {
            name: np.concatenate([chunk['values'][name] for chunk in chunk_results])
            for name in chunk_results[0]['values']
        }
        states = None
        if keep_states:
            states = np.concatenate([chunk['states'] for chunk in chunk_results])
        return SampleRun(self.summarize(spec, values), values, states)

    def summarize(self, spec, values):
        residual = values['residual']
        count = residual.shape[0]
        pure = spec.rank == 1
        # 純粋状態では |残差| 最大、混合状態では残差最小の状態が最悪値
        worst = int(np.argmax(np.abs(residual))) if pure else int(np.argmin(residual))
        violations = int(np.count_nonzero(residual < VIOLATION_THRESHOLD))
        saturation_violations = None
        if pure:
            saturation_violations = int(np.count_nonzero(np.abs(residual) > SATURATION_TOLERANCE))

        summary = SampleSummary(
            kind=spec.kind,
            n=spec.n,
            rank=spec.rank,
            seed=spec.seed,
            count=count,
            residual_min=float(residual.min()),
            residual_max=float(residual.max()),
            residual_mean=float(np.mean(residual)),
            residual_max_abs=float(np.max(np.abs(residual))),
            violations=violations,
            saturation_violations=saturation_violations,
            invalid_states=int(np.count_nonzero(~values['valid'])),
            identity_gap_max=float(values['identity_gap'].max()),
            worst_index=int(values['seed_index'][worst]),
            worst_residual=float(residual[worst]),
        )
        if summary.passed:
            self.logger.info(f"{spec.kind} n = {spec.n}: {count} states, no violations "
                             f"(min residual {summary.residual_min:.3g})")
        else:
            self.logger.warning(f"{spec.kind} n = {spec.n}: {violations} violations, "
                                f"{summary.invalid_states} invalid states, worst index {summary.worst_index}")
        return summary

    def worst_state(self, spec, summary):
        """最悪値を出した状態をインデックスから再生成"""
        return EnsembleSampler().sample_state(spec, summary.worst_index)
