import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionError, RangeError
from .quanton_state import MAX_PATHS, MIN_PATHS, PureState, QuantonState, StateManager

GENERATOR_IDENTITY = 'numpy.random.Philox'
DEFAULT_SEED = 20190425
MAX_SEED = 2 ** 64

ENSEMBLE_KINDS = ('haar_pure', 'hilbert_schmidt_mixed', 'rank_k_mixed')
FAMILY_KINDS = ('dephase_path', 'depolarize_path', 'two_slit_bias')

logger = logging.getLogger(__name__)


def check_paths(n):
    if isinstance(n, bool) or int(n) != n:
        raise DimensionError(f"path count must be an integer, got {n!r}")
    n = int(n)
    if not MIN_PATHS <= n <= MAX_PATHS:
        raise DimensionError(f"path count must be in [{MIN_PATHS}, {MAX_PATHS}], got {n}")
    return n


def check_seed(seed):
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= int(seed) < MAX_SEED:
        raise RangeError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


def check_rank(n, rank):
    if isinstance(rank, bool) or int(rank) != rank or not 1 <= int(rank) <= n:
        raise RangeError(f"rank must be an integer in [1, {n}], got {rank!r}")
    return int(rank)


def sample_generator(seed, index):
    """(seed, index) から決まるサンプルごとの乱数生成器"""
    sequence = np.random.SeedSequence(check_seed(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(sequence))


def derive_seed(seed, *stream):
    """seed と識別子列から別ストリーム用の64bitシードを作る"""
    sequence = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(s) for s in stream))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def complex_normal(rng, shape):
    """実部・虚部それぞれ N(0, 1/2) の複素正規乱数"""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5)


@dataclass(frozen=True)
class EnsembleSpec:
    """ランダム状態アンサンブルの指定"""

    kind: str
    n: int
    rank: Optional[int] = None
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.kind not in ENSEMBLE_KINDS:
            raise RangeError(f"unknown ensemble kind {self.kind!r}; expected one of {ENSEMBLE_KINDS}")
        n = check_paths(self.n)
        object.__setattr__(self, 'n', n)
        object.__setattr__(self, 'seed', check_seed(self.seed))
        if self.kind == 'haar_pure':
            rank = 1 if self.rank is None else self.rank
            if rank != 1:
                raise RangeError(f"haar_pure states have rank 1, got rank {rank}")
        elif self.kind == 'hilbert_schmidt_mixed':
            rank = n if self.rank is None else self.rank
            if rank != n:
                raise RangeError(f"hilbert_schmidt_mixed states have rank n = {n}, got rank {rank}")
        else:
            if self.rank is None:
                raise RangeError("rank_k_mixed needs an explicit rank")
            rank = check_rank(n, self.rank)
        object.__setattr__(self, 'rank', rank)


@dataclass(frozen=True)
class FamilySpec:
    """パラメータ付き状態族の指定（グリッドは [0, 1] の等間隔、両端を含む）"""

    kind: str
    steps: int
    base: Optional[QuantonState] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise RangeError(f"unknown family {self.kind!r}; expected one of {FAMILY_KINDS}")
        if isinstance(self.steps, bool) or int(self.steps) != self.steps or int(self.steps) < 2:
            raise RangeError(f"steps must be an integer >= 2, got {self.steps!r}")
        object.__setattr__(self, 'steps', int(self.steps))
        if self.kind != 'two_slit_bias':
            if self.base is None:
                raise RangeError(f"family {self.kind!r} needs a base state")
            if not isinstance(self.base, QuantonState):
                object.__setattr__(self, 'base', QuantonState(self.base))

    def grid(self):
        return np.linspace(0.0, 1.0, self.steps)


class EnsembleSampler:
    """シード付きでランダムな純粋状態・混合状態を生成するクラス"""

    def __init__(self, state_manager=None):
        self.state_manager = state_manager or StateManager()

    def sample_pure_batch(self, n, seed, start, stop):
        """インデックス [start, stop) のハール純粋状態の振幅 (count, n)"""
        n = check_paths(n)
        amplitudes = np.empty((max(stop - start, 0), n), dtype=np.complex128)
        for row, index in enumerate(range(start, stop)):
            c = complex_normal(sample_generator(seed, index), n)
            amplitudes[row] = c / np.linalg.norm(c)
        return amplitudes

    def sample_pure(self, n, seed, index=0):
        return PureState(self.sample_pure_batch(n, seed, index, index + 1)[0])

    def sample_mixed_batch(self, n, rank, seed, start, stop):
        """G·G†/tr(G·G†)（G は n×rank の複素正規行列）のスタック"""
        n = check_paths(n)
        rank = check_rank(n, rank)
        rhos = np.empty((max(stop - start, 0), n, n), dtype=np.complex128)
        for row, index in enumerate(range(start, stop)):
            g = complex_normal(sample_generator(seed, index), (n, rank))
            rho = g @ g.conj().T
            rho = 0.5 * (rho + rho.conj().T)
            rhos[row] = rho / np.trace(rho).real
        return rhos

    def sample_mixed(self, n, rank, seed, index=0):
        return QuantonState(self.sample_mixed_batch(n, rank, seed, index, index + 1)[0])

    def sample_diagonal_batch(self, n, seed, start, stop, floor=0.0):
        """一様ディリクレ分布の経路確率（各成分 floor 以上）"""
        n = check_paths(n)
        if not 0.0 <= floor < 1.0 / n:
            raise RangeError(f"floor must be in [0, 1/n), got {floor}")
        probabilities = np.empty((max(stop - start, 0), n))
        for row, index in enumerate(range(start, stop)):
            p = sample_generator(seed, index).dirichlet(np.ones(n))
            probabilities[row] = floor + (1.0 - n * floor) * p
        return probabilities

    def sample_diagonal(self, n, seed, index=0, floor=0.0):
        return QuantonState.diagonal_state(self.sample_diagonal_batch(n, seed, index, index + 1, floor)[0])

    def sample_batch(self, spec, start, stop):
        """EnsembleSpec に従う密度行列のスタック"""
        if spec.kind == 'haar_pure':
            c = self.sample_pure_batch(spec.n, spec.seed, start, stop)
            return c[:, :, None] * c.conj()[:, None, :]
        return self.sample_mixed_batch(spec.n, spec.rank, spec.seed, start, stop)

    def sample_state(self, spec, index):
        """インデックス index の状態を再生成"""
        return QuantonState(self.sample_batch(spec, index, index + 1)[0])

    def family_states(self, spec):
        """状態族を (パラメータ, 状態) のリストとして返す"""
        states = []
        for parameter in spec.grid():
            parameter = float(parameter)
            if spec.kind == 'dephase_path':
                state = self.state_manager.dephase(spec.base, parameter)
            elif spec.kind == 'depolarize_path':
                state = self.state_manager.depolarize(spec.base, parameter)
            else:
                amplitudes = [np.sqrt(parameter), np.sqrt(1.0 - parameter)]
                state = self.state_manager.from_pure(PureState(amplitudes))
            states.append((parameter, state))
        logger.debug(f"Generated {len(states)} states for family {spec.kind}")
        return states
