import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import DegeneratePatternError, NumericalError, RangeError
from .quanton_state import QuantonState

DEFAULT_POINTS = 4096
MIN_POINTS = 16
IMAGINARY_TOLERANCE = 1e-12

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PhasePattern:
    """1周期分の遠方場強度 I(φ)（周期平均が1）"""

    n: int
    points: int
    phi: np.ndarray
    intensity: np.ndarray


def fringe_visibility_batch(intensity):
    """(count, points) の強度配列から各行の (I_max - I_min)/(I_max + I_min)"""
    i_max = intensity.max(axis=-1)
    i_min = intensity.min(axis=-1)
    total = i_max + i_min
    if np.any(total <= 0.0):
        raise DegeneratePatternError("interference pattern is identically zero")
    return np.clip((i_max - i_min) / total, 0.0, 1.0)


class InterferenceSimulator:
    """点スリット・等間隔・等振幅モデルでn重スリットの干渉縞を計算するクラス

    幾何はすべて換算位相 φ = (2πd/λ)sinθ にまとめ、I(φ) = Σ_jk ρ_jk exp(i(j-k)φ) / tr ρ（周期平均が1になるよう規格化）。
    """

    @staticmethod
    def _check_points(points, n):
        if isinstance(points, bool) or int(points) != points:
            raise RangeError(f"points must be an integer, got {points!r}")
        points = int(points)
        # points < n だと格子上でエイリアシングが起き、周期平均がトレースに一致しない
        if points < max(MIN_POINTS, n):
            raise RangeError(f"points must be >= {max(MIN_POINTS, n)}, got {points}")
        return points

    def pattern(self, state, points=DEFAULT_POINTS):
        if not isinstance(state, QuantonState):
            state = QuantonState(state)
        points = self._check_points(points, state.n)

        # 検証の許容誤差内のエルミート性・トレースのずれをここで吸収する
        rho = 0.5 * (state.rho + state.rho.conj().T)
        trace = float(np.trace(rho).real)
        phi = 2.0 * np.pi * np.arange(points) / points
        paths = np.arange(1, state.n + 1)
        # v_j = exp(-ijφ) として I(φ) = <v|ρ|v> / tr ρ
        v = np.exp(-1j * np.outer(phi, paths))
        values = np.einsum('mj,jk,mk->m', v.conj(), rho, v) / trace

        residue = float(np.max(np.abs(values.imag)))
        if residue > IMAGINARY_TOLERANCE:
            raise NumericalError(f"intensity has imaginary residue {residue:.3g}")
        intensity = values.real
        intensity.setflags(write=False)
        phi.setflags(write=False)
        return PhasePattern(state.n, points, phi, intensity)

    def pattern_batch(self, rhos, points=DEFAULT_POINTS):
        """(count, n, n) スタックの強度を (count, points) 配列で返す

        I(φ) = (t_0 + 2 Re Σ_{d≥1} t_d e^{idφ}) / t_0（t_d はエルミート部分の d 番目の下側対角和）の形で評価する。
        入力の検証は呼び出し側で済ませておくこと。
        """
        rhos = np.asarray(rhos, dtype=np.complex128)
        if rhos.ndim == 2:
            rhos = rhos[None]
        rhos = 0.5 * (rhos + np.conj(np.swapaxes(rhos, -1, -2)))
        n = rhos.shape[-1]
        points = self._check_points(points, n)
        phi = 2.0 * np.pi * np.arange(points) / points
        sums = np.stack([np.trace(rhos, offset=-d, axis1=-2, axis2=-1) for d in range(n)], axis=-1)
        waves = np.exp(1j * np.outer(np.arange(1, n), phi))
        intensity = sums[:, :1].real + 2.0 * (sums[:, 1:] @ waves).real
        return intensity / sums[:, :1].real

    def fringe_visibility(self, pattern):
        """(I_max - I_min)/(I_max + I_min)（格子上の極値から計算）

        n = 2 では 2|ρ_12| に一致する。n > 2 ではコヒーレンスやDürrの可視度との一致は主張しない。
        """
        visibility = float(fringe_visibility_batch(np.asarray(pattern.intensity)[None])[0])
        if pattern.n > 2:
            logger.debug(f"fringe visibility for n = {pattern.n} is reported without a duality claim")
        return visibility

    def pattern_frame(self, pattern):
        return pd.DataFrame({'phi': pattern.phi, 'intensity': pattern.intensity})
