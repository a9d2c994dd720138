import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, NormalizationError, RangeError, ValidationError

MIN_PATHS = 2
MAX_PATHS = 64

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tolerances:
    """検証に使う許容誤差のセット"""

    herm: float = 1e-10
    trace: float = 1e-10
    psd_per_path: float = 1e-10

    def psd(self, n):
        return self.psd_per_path * n

    def to_dict(self):
        return {'herm': self.herm, 'trace': self.trace, 'psd_per_path': self.psd_per_path}


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class ValidationReport:
    """密度行列の検証結果"""

    n: int
    hermitian_defect: float
    trace_defect: float
    min_eigenvalue: float
    passed: bool
    reason: str

    @property
    def verdict(self):
        return 'pass' if self.passed else 'fail'

    def to_dict(self):
        return {
            'n': self.n,
            'hermitian_defect': self.hermitian_defect,
            'trace_defect': self.trace_defect,
            'min_eigenvalue': self.min_eigenvalue,
            'verdict': self.verdict,
            'reason': self.reason,
        }


def _check_square(matrix):
    """正方行列かつ 2 <= n <= 64 であることを確認して complex128 配列を返す"""
    try:
        array = np.asarray(matrix, dtype=np.complex128)
    except (TypeError, ValueError) as e:
        raise DimensionError(f"matrix is not numeric: {e}") from e
    if array.ndim != 2 or array.shape[0] != array.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {array.shape}")
    n = array.shape[0]
    if n < MIN_PATHS or n > MAX_PATHS:
        raise DimensionError(f"path count must be in [{MIN_PATHS}, {MAX_PATHS}], got {n}")
    return array


def validate(matrix, tolerances=DEFAULT_TOLERANCES):
    """エルミート性・トレース・半正定値性を検査してValidationReportを返す"""
    rho = _check_square(matrix)
    n = rho.shape[0]

    if not np.all(np.isfinite(rho)):
        return ValidationReport(n, float('inf'), float('inf'), float('-inf'), False,
                                'matrix contains non-finite entries')

    hermitian_defect = float(np.max(np.abs(rho - rho.conj().T)))
    trace_defect = float(abs(np.trace(rho) - 1.0))
    # 固有値はエルミート部分から計算する（反エルミート成分はhermitian_defectで検出済み）
    min_eigenvalue = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
    min_diagonal = float(np.min(rho.diagonal().real))

    problems = []
    if hermitian_defect > tolerances.herm:
        problems.append(f"not Hermitian (defect {hermitian_defect:.3g})")
    if trace_defect > tolerances.trace:
        problems.append(f"trace differs from 1 by {trace_defect:.3g}")
    if min_eigenvalue < -tolerances.psd(n):
        problems.append(f"not positive semi-definite (min eigenvalue {min_eigenvalue:.3g})")
    elif min_diagonal < -tolerances.psd(n):
        problems.append(f"negative diagonal entry {min_diagonal:.3g}")

    passed = not problems
    reason = 'ok' if passed else '; '.join(problems)
    return ValidationReport(n, hermitian_defect, trace_defect, min_eigenvalue, passed, reason)


def validate_batch(stack, tolerances=DEFAULT_TOLERANCES):
    """(count, n, n) の密度行列スタックをまとめて検証し、各欠陥値の配列を返す"""
    rhos = np.asarray(stack, dtype=np.complex128)
    if rhos.ndim != 3 or rhos.shape[1] != rhos.shape[2]:
        raise DimensionError(f"expected a (count, n, n) stack, got shape {rhos.shape}")
    n = rhos.shape[1]
    adjoint = np.conj(np.swapaxes(rhos, -1, -2))
    hermitian_defect = np.max(np.abs(rhos - adjoint), axis=(-2, -1))
    trace_defect = np.abs(np.trace(rhos, axis1=-2, axis2=-1) - 1.0)
    min_eigenvalue = np.linalg.eigvalsh(0.5 * (rhos + adjoint))[:, 0]
    passed = ((hermitian_defect <= tolerances.herm)
              & (trace_defect <= tolerances.trace)
              & (min_eigenvalue >= -tolerances.psd(n)))
    return {
        'hermitian_defect': hermitian_defect,
        'trace_defect': trace_defect,
        'min_eigenvalue': min_eigenvalue,
        'passed': passed,
    }


@dataclass(frozen=True, eq=False)
class QuantonState:
    """n経路クオントンの密度行列（生成時に検証済み・変更不可）"""

    rho: np.ndarray
    tolerances: Tolerances = field(default=DEFAULT_TOLERANCES)

    def __post_init__(self):
        rho = _check_square(self.rho).copy()
        report = validate(rho, self.tolerances)
        if not report.passed:
            raise ValidationError(report)
        rho.setflags(write=False)
        object.__setattr__(self, 'rho', rho)
        object.__setattr__(self, 'report', report)

    @property
    def n(self):
        return self.rho.shape[0]

    def diagonal(self):
        """経路確率 ρ_jj（微小な負値は0にクランプ）"""
        return np.clip(self.rho.diagonal().real, 0.0, 1.0)

    @classmethod
    def from_matrix(cls, matrix, renormalize=False, tolerances=DEFAULT_TOLERANCES):
        """行列から状態を作成。renormalize=Trueならトレースで割る"""
        rho = _check_square(matrix)
        if renormalize:
            trace = np.trace(rho).real
            if not np.isfinite(trace) or trace <= 0.0:
                raise NormalizationError(f"cannot renormalize a matrix with trace {trace}")
            if abs(trace - 1.0) > tolerances.trace:
                logger.info(f"Renormalizing state with trace {trace:.17g}")
            rho = rho / trace
        return cls(rho, tolerances)

    @classmethod
    def maximally_mixed(cls, n):
        return cls(np.eye(n, dtype=np.complex128) / n)

    @classmethod
    def diagonal_state(cls, probabilities, renormalize=False):
        return cls.from_matrix(np.diag(np.asarray(probabilities, dtype=float)), renormalize)


@dataclass(frozen=True, eq=False)
class PureState:
    """経路基底での振幅ベクトル c_j"""

    c: np.ndarray
    tolerances: Tolerances = field(default=DEFAULT_TOLERANCES)

    def __post_init__(self):
        try:
            c = np.array(self.c, dtype=np.complex128)
        except (TypeError, ValueError) as e:
            raise DimensionError(f"amplitudes are not numeric: {e}") from e
        if c.ndim != 1:
            raise DimensionError(f"amplitudes must be a vector, got shape {c.shape}")
        if c.shape[0] < MIN_PATHS or c.shape[0] > MAX_PATHS:
            raise DimensionError(f"path count must be in [{MIN_PATHS}, {MAX_PATHS}], got {c.shape[0]}")
        if not np.all(np.isfinite(c)):
            raise NormalizationError("amplitudes contain non-finite entries")
        norm_sq = float(np.sum(c.real ** 2 + c.imag ** 2))
        if abs(norm_sq - 1.0) > self.tolerances.trace:
            raise NormalizationError(f"amplitudes are not normalized (sum |c_j|^2 = {norm_sq:.17g})")
        c.setflags(write=False)
        object.__setattr__(self, 'c', c)

    @property
    def n(self):
        return self.c.shape[0]

    @classmethod
    def from_amplitudes(cls, amplitudes, renormalize=False, tolerances=DEFAULT_TOLERANCES):
        """振幅から純粋状態を作成。renormalize=Trueならノルムで割る"""
        c = np.asarray(amplitudes, dtype=np.complex128)
        if renormalize:
            norm = float(np.linalg.norm(c))
            if not np.isfinite(norm) or norm == 0.0:
                raise NormalizationError("cannot renormalize a zero or non-finite amplitude vector")
            c = c / norm
        return cls(c, tolerances)

    @classmethod
    def equal_superposition(cls, n):
        return cls(np.full(n, 1.0 / np.sqrt(n), dtype=np.complex128))

    @classmethod
    def basis(cls, n, j):
        """経路 j（1始まり）を確実に通る状態"""
        if not 1 <= j <= n:
            raise RangeError(f"path label must be in [1, {n}], got {j}")
        c = np.zeros(n, dtype=np.complex128)
        c[j - 1] = 1.0
        return cls(c)


def _off_diagonal_mask(n):
    return ~np.eye(n, dtype=bool)


def _check_unit_interval(name, value):
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise RangeError(f"{name} must be in [0, 1], got {value}")
    return value


def dephase_matrices(rhos, lam):
    """非対角成分を λ 倍（rhos は (..., n, n)、lam はスカラーまたは先頭次元に対応する配列）"""
    rhos = np.asarray(rhos, dtype=np.complex128)
    lam = np.asarray(lam, dtype=float)
    n = rhos.shape[-1]
    factor = np.where(_off_diagonal_mask(n), lam[..., None, None], 1.0)
    return rhos * factor


def depolarize_matrices(rhos, p):
    """(1-p)ρ + p·I/n（p はスカラーまたは先頭次元に対応する配列）"""
    rhos = np.asarray(rhos, dtype=np.complex128)
    p = np.asarray(p, dtype=float)[..., None, None]
    n = rhos.shape[-1]
    return (1.0 - p) * rhos + p * np.eye(n) / n


class StateManager:
    """状態の生成と量子チャネル（デフェージング・脱分極）を扱うクラス"""

    def __init__(self, tolerances=DEFAULT_TOLERANCES):
        self.tolerances = tolerances

    def validate(self, matrix):
        return validate(matrix, self.tolerances)

    def validate_batch(self, stack):
        return validate_batch(stack, self.tolerances)

    def from_pure(self, state):
        """|ψ><ψ| を作る（ρ_jk = c_j conj(c_k)）"""
        if not isinstance(state, PureState):
            state = PureState(state, self.tolerances)
        return QuantonState(np.outer(state.c, state.c.conj()), self.tolerances)

    def dephase(self, state, lam):
        """非対角成分をすべて λ 倍する"""
        lam = _check_unit_interval('lambda', lam)
        if lam == 1.0:
            return state
        return QuantonState(dephase_matrices(state.rho, lam), state.tolerances)

    def depolarize(self, state, p):
        """(1-p)ρ + p·I/n を返す"""
        p = _check_unit_interval('p', p)
        if p == 0.0:
            return state
        return QuantonState(depolarize_matrices(state.rho, p), state.tolerances)

    def purity(self, state):
        """tr ρ²"""
        rho = state.rho
        return float(np.sum(rho.real ** 2 + rho.imag ** 2))

    def is_pure(self, state):
        return abs(self.purity(state) - 1.0) <= self.tolerances.psd(state.n)
