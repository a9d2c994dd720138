import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, RangeError
from .quanton_state import MIN_PATHS, MAX_PATHS, PureState, QuantonState

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ['n', 'coherence', 'predictability', 'durr_visibility',
                  'duality_sum', 'residual', 'purity']

# これを超える経路数では補償付き加算（math.fsum）を使う
COMPENSATED_SUM_THRESHOLD = 16
CLAMP_LOG_THRESHOLD = 1e-10
IDENTITY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class MeasureReport:
    """1状態分の双対性指標"""

    n: int
    coherence: float
    predictability: float
    durr_visibility: float
    duality_sum: float
    residual: float
    purity: float

    def to_dict(self):
        return {name: getattr(self, name) for name in REPORT_COLUMNS}

    def to_row(self):
        return [getattr(self, name) for name in REPORT_COLUMNS]


@dataclass(frozen=True, eq=False)
class DetectorGram:
    """検出器状態の重なりの大きさ |<d_i|d_j>| の行列"""

    overlap: np.ndarray

    def __post_init__(self):
        try:
            g = np.array(self.overlap, dtype=float)
        except (TypeError, ValueError) as e:
            raise DimensionError(f"overlap matrix is not real-valued: {e}") from e
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise DimensionError(f"expected a square overlap matrix, got shape {g.shape}")
        if g.shape[0] < MIN_PATHS or g.shape[0] > MAX_PATHS:
            raise DimensionError(f"path count must be in [{MIN_PATHS}, {MAX_PATHS}], got {g.shape[0]}")
        if not np.all(np.isfinite(g)):
            raise RangeError("overlap matrix contains non-finite entries")
        if np.max(np.abs(g - g.T)) > 1e-12:
            raise RangeError("overlap matrix must be symmetric")
        if np.max(np.abs(g.diagonal() - 1.0)) > 1e-12:
            raise RangeError("overlap matrix must have a unit diagonal")
        if g.min() < -1e-12 or g.max() > 1.0 + 1e-12:
            raise RangeError("overlap magnitudes must lie in [0, 1]")
        g = np.clip(g, 0.0, 1.0)
        g.setflags(write=False)
        object.__setattr__(self, 'overlap', g)

    @property
    def n(self):
        return self.overlap.shape[0]

    @classmethod
    def identical(cls, n):
        """全検出器状態が同一（経路情報なし）"""
        return cls(np.ones((n, n)))

    @classmethod
    def orthogonal(cls, n):
        """直交する検出器状態（完全な経路情報）"""
        return cls(np.eye(n))

    @classmethod
    def uniform(cls, n, overlap):
        """非対角がすべて同じ重なり s の Gram 行列 (1-s)I + sJ"""
        overlap = float(overlap)
        if not 0.0 <= overlap <= 1.0:
            raise RangeError(f"overlap must be in [0, 1], got {overlap}")
        return cls((1.0 - overlap) * np.eye(n) + overlap * np.ones((n, n)))

    @classmethod
    def from_detector_states(cls, vectors):
        """規格化された検出器状態ベクトル（行）から重なりの大きさを計算"""
        d = np.asarray(vectors, dtype=np.complex128)
        if d.ndim != 2:
            raise DimensionError(f"detector states must be given as rows of a matrix, got shape {d.shape}")
        norms = np.linalg.norm(d, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-10):
            raise RangeError("detector states must be normalized")
        g = np.clip(np.abs(d.conj() @ d.T), 0.0, 1.0)
        np.fill_diagonal(g, 1.0)
        return cls(0.5 * (g + g.T))


def _as_stack(rhos):
    rhos = np.asarray(rhos, dtype=np.complex128)
    if rhos.ndim == 2:
        rhos = rhos[None]
    return rhos


def _pair_sum(terms, n):
    """非対角項（順序付きペア）の和。n > 16 では補償付き加算"""
    if n > COMPENSATED_SUM_THRESHOLD:
        return np.array([math.fsum(row) for row in terms])
    return terms.sum(axis=-1)


def _off_diagonal(matrices):
    n = matrices.shape[-1]
    return matrices[..., ~np.eye(n, dtype=bool)]


def _diagonal_roots(rhos):
    """√ρ_jj（対角は [0, 1] にクランプ）"""
    return np.sqrt(np.clip(np.diagonal(rhos, axis1=-2, axis2=-1).real, 0.0, 1.0))


def _spread(roots):
    """Σ_{j<k} (s_j - s_k)^2 / (n-1)。単位トレースのもとで 1 - A に等しい"""
    n = roots.shape[-1]
    diffs = roots[..., :, None] - roots[..., None, :]
    return 0.5 * _pair_sum(_off_diagonal(diffs * diffs), n) / (n - 1)


def _root_from_complement(one_minus, label):
    """√(1 - X^2) を x = 1 - X から評価し [0, 1] にクランプ

    x ≤ 1/2 では x(2-x)、x > 1/2 では 1 - (1-x)^2 を使う（x = 1 付近で丸めずに 1 を返す）。
    """
    one_minus = np.asarray(one_minus, dtype=float)
    raw = np.where(one_minus > 0.5, 1.0 - (1.0 - one_minus) ** 2, one_minus * (2.0 - one_minus))
    clamp = np.maximum(raw - 1.0, -raw)
    if np.any(clamp > CLAMP_LOG_THRESHOLD):
        logger.warning(f"{label}: clamped square-root argument by {float(np.max(clamp)):.3g}")
    return np.sqrt(np.clip(raw, 0.0, 1.0))


def coherence_batch(rhos):
    """C = (1/(n-1)) Σ_{j≠k} |ρ_jk|"""
    rhos = _as_stack(rhos)
    n = rhos.shape[-1]
    return _pair_sum(np.abs(_off_diagonal(rhos)), n) / (n - 1)


def cross_sum_batch(rhos):
    """A = (1/(n-1)) Σ_{j≠k} √ρ_jj √ρ_kk（順序付きペアの直接和）"""
    rhos = _as_stack(rhos)
    n = rhos.shape[-1]
    roots = _diagonal_roots(rhos)
    return _pair_sum(_off_diagonal(roots[..., :, None] * roots[..., None, :]), n) / (n - 1)


def predictability_batch(rhos):
    rhos = _as_stack(rhos)
    return _root_from_complement(_spread(_diagonal_roots(rhos)), 'predictability')


def durr_visibility_batch(rhos):
    """V = √((n/(n-1)) Σ_{j≠k} |ρ_jk|^2)"""
    rhos = _as_stack(rhos)
    n = rhos.shape[-1]
    off = _off_diagonal(rhos)
    return np.sqrt(n / (n - 1) * _pair_sum(off.real ** 2 + off.imag ** 2, n))


def purity_batch(rhos):
    rhos = _as_stack(rhos)
    n = rhos.shape[-1]
    flat = rhos.reshape(rhos.shape[0], n * n)
    return _pair_sum(flat.real ** 2 + flat.imag ** 2, n)


def gy_predictability_batch(rhos):
    """2経路の √(1 - 4ρ_11ρ_22)。単位トレースでは 1 - 4ρ_11ρ_22 = (ρ_11 - ρ_22)^2"""
    rhos = _as_stack(rhos)
    if rhos.shape[-1] != 2:
        raise DimensionError(f"two-path predictability needs n = 2, got n = {rhos.shape[-1]}")
    probabilities = np.clip(np.diagonal(rhos, axis1=-2, axis2=-1).real, 0.0, 1.0)
    return np.sqrt(np.clip((probabilities[:, 0] - probabilities[:, 1]) ** 2, 0.0, 1.0))


def distinguishability_batch(amplitudes, overlap):
    """D = √(1 - [(1/(n-1)) Σ_{i≠j} |c_i c_j| |<d_i|d_j>|]^2)

    1 - (内側の和) を「全検出器が同一の場合の値」と「重なりの不足分」の和として評価する。
    """
    amplitudes = np.asarray(amplitudes, dtype=np.complex128)
    if amplitudes.ndim == 1:
        amplitudes = amplitudes[None]
    n = amplitudes.shape[-1]
    # from_pure の対角と同じ計算で |c_j| を得る
    roots = np.sqrt(np.clip((amplitudes * amplitudes.conj()).real, 0.0, 1.0))
    cross = _off_diagonal(roots[..., :, None] * roots[..., None, :])
    deficit = _pair_sum(cross * _off_diagonal(1.0 - np.asarray(overlap, dtype=float)), n) / (n - 1)
    return _root_from_complement(_spread(roots) + deficit, 'distinguishability')


def three_slit_batch(rhos):
    """3経路の明示式 C = |ρ12|+|ρ23|+|ρ13| と P = √(1-(s1s2+s2s3+s1s3)^2)

    P は展開形のままではなく、単位トレースでの恒等式
    1 - (s1s2+s2s3+s1s3) = ((s1-s2)^2 + (s2-s3)^2 + (s1-s3)^2)/2 を通して評価する。
    """
    rhos = _as_stack(rhos)
    if rhos.shape[-1] != 3:
        raise DimensionError(f"three-slit forms need n = 3, got n = {rhos.shape[-1]}")
    c = np.abs(rhos[:, 0, 1]) + np.abs(rhos[:, 1, 2]) + np.abs(rhos[:, 0, 2])
    s = _diagonal_roots(rhos)
    s1, s2, s3 = s[:, 0], s[:, 1], s[:, 2]
    one_minus = 0.5 * ((s1 - s2) ** 2 + (s2 - s3) ** 2 + (s1 - s3) ** 2)
    return c, _root_from_complement(one_minus, 'three-slit predictability')


def batch_reports(rhos):
    """(count, n, n) スタックに対して全指標を配列でまとめて計算"""
    rhos = _as_stack(rhos)
    n = rhos.shape[-1]
    coherence = coherence_batch(rhos)
    predictability = predictability_batch(rhos)
    cross = cross_sum_batch(rhos)
    duality_sum = predictability ** 2 + coherence ** 2
    identity_sum = 1.0 - cross ** 2 + coherence ** 2
    return {
        'n': np.full(rhos.shape[0], n),
        'coherence': coherence,
        'predictability': predictability,
        'durr_visibility': durr_visibility_batch(rhos),
        'duality_sum': duality_sum,
        'residual': 1.0 - duality_sum,
        'purity': purity_batch(rhos),
        'cross_sum': cross,
        'identity_gap': np.abs(duality_sum - identity_sum),
    }


def _require_state(state):
    """QuantonStateでなければ検証付きで変換（不正ならValidationError）"""
    if isinstance(state, QuantonState):
        return state
    return QuantonState(state)


def _path_label(label, n, name):
    if isinstance(label, bool) or int(label) != label:
        raise RangeError(f"{name} must be an integer path label, got {label!r}")
    label = int(label)
    if not 1 <= label <= n:
        raise RangeError(f"{name} must be in [1, {n}], got {label}")
    return label - 1


class DualityMeasures:
    """コヒーレンス・予測可能性・可視度などの双対性指標を計算するクラス"""

    def coherence(self, state):
        return float(coherence_batch(_require_state(state).rho)[0])

    def predictability(self, state):
        """n経路の予測可能性 P = √(1 - A^2)

        1 - A は単位トレースのもとで Σ_{j<k}(√ρ_jj - √ρ_kk)^2/(n-1) に等しく、
        一様分布付近での桁落ちを避けるためこちらで評価する。
        """
        return float(predictability_batch(_require_state(state).rho)[0])

    def gy_predictability(self, state):
        """2経路の予測可能性 √(1 - 4ρ_11ρ_22)"""
        return float(gy_predictability_batch(_require_state(state).rho)[0])

    def durr_visibility(self, state):
        return float(durr_visibility_batch(_require_state(state).rho)[0])

    def purity(self, state):
        return float(purity_batch(_require_state(state).rho)[0])

    def distinguishability(self, state, gram):
        """検出器の重なりから経路識別度 D を計算"""
        if not isinstance(state, PureState):
            state = PureState(state)
        if not isinstance(gram, DetectorGram):
            gram = DetectorGram(gram)
        n = state.n
        if gram.n != n:
            raise DimensionError(f"detector Gram has n = {gram.n}, state has n = {n}")
        return float(distinguishability_batch(state.c, gram.overlap)[0])

    def identity_form(self, state):
        """(A, B, 1 - A^2 + B^2) を返す（B はコヒーレンス）"""
        state = _require_state(state)
        a = float(cross_sum_batch(state.rho)[0])
        b = self.coherence(state)
        return a, b, 1.0 - a * a + b * b

    def identity_gap(self, state):
        state = _require_state(state)
        p = self.predictability(state)
        c = self.coherence(state)
        return abs(p * p + c * c - self.identity_form(state)[2])

    def duality_report(self, state):
        """P^2 + C^2 ≤ 1 の各項をまとめたMeasureReportを作成"""
        state = _require_state(state)
        values = batch_reports(state.rho)
        gap = float(values['identity_gap'][0])
        if gap > IDENTITY_TOLERANCE:
            logger.warning(f"P^2+C^2 differs from 1-A^2+B^2 by {gap:.3g}")
        return MeasureReport(
            n=state.n,
            coherence=float(values['coherence'][0]),
            predictability=float(values['predictability'][0]),
            durr_visibility=float(values['durr_visibility'][0]),
            duality_sum=float(values['duality_sum'][0]),
            residual=float(values['residual'][0]),
            purity=float(values['purity'][0]),
        )

    def perturbed_predictability(self, state, j, k, epsilon):
        """√ρ_jj → √ρ_jj + ε, √ρ_kk → √ρ_kk - ε と置き換えた後の予測可能性

        j, k は1始まりの経路ラベル。対角状態のみ受け付ける。置き換え後の対角和は
        1 - 2ε(√ρ_kk - √ρ_jj - ε) となり単位トレースを保たない（再規格化はしない）。
        """
        state = _require_state(state)
        n = state.n
        jj = _path_label(j, n, 'j')
        kk = _path_label(k, n, 'k')
        if jj == kk:
            raise RangeError("j and k must be different paths")
        off = _off_diagonal(state.rho)
        if off.size and np.max(np.abs(off)) > state.tolerances.herm:
            raise RangeError("perturbed predictability is defined for diagonal states only")
        probabilities = state.diagonal()
        if not probabilities[jj] < probabilities[kk]:
            raise RangeError(f"requires rho_{j}{j} < rho_{k}{k}, got "
                             f"{probabilities[jj]:.17g} >= {probabilities[kk]:.17g}")
        roots = np.sqrt(probabilities)
        gap = roots[kk] - roots[jj]
        epsilon = float(epsilon)
        if not 0.0 < epsilon < gap:
            raise RangeError(f"epsilon must be in (0, {gap:.17g}), got {epsilon}")

        shifted = roots.copy()
        shifted[jj] += epsilon
        shifted[kk] -= epsilon
        trace_defect = 2.0 * epsilon * (gap - epsilon)
        logger.debug(f"perturbed diagonal has trace 1 - {trace_defect:.3g}")
        one_minus = _spread(shifted[None]) + trace_defect
        return float(_root_from_complement(one_minus, 'perturbed predictability')[0])

    def three_slit_forms(self, state):
        """3経路の明示式による (C, P)。P は差の二乗和の恒等式経由で計算（three_slit_batch 参照）"""
        c, p = three_slit_batch(_require_state(state).rho)
        return float(c[0]), float(p[0])
