"""duality_lab の例外クラスと終了コードの対応"""

EXIT_OK = 0
EXIT_INVALID_STATE = 2
EXIT_PARSE_ERROR = 3
EXIT_FLAG_ERROR = 4
EXIT_VERIFICATION_FAILURE = 5


class DualityLabError(Exception):
    """全例外の基底クラス"""

    exit_code = EXIT_VERIFICATION_FAILURE


class DimensionError(DualityLabError, ValueError):
    """行列・ベクトルの次元が不正"""

    exit_code = EXIT_FLAG_ERROR


class RangeError(DualityLabError, ValueError):
    """パラメータが許容範囲外"""

    exit_code = EXIT_FLAG_ERROR


class NormalizationError(DualityLabError, ValueError):
    """規格化されていない入力"""

    exit_code = EXIT_INVALID_STATE


class ValidationError(DualityLabError, ValueError):
    """密度行列の検証に失敗（ValidationReportを保持）"""

    exit_code = EXIT_INVALID_STATE

    def __init__(self, report):
        self.report = report
        super().__init__(f"invalid quanton state: {report.reason}")


class StateParseError(DualityLabError, ValueError):
    """状態ファイルのパースに失敗"""

    exit_code = EXIT_PARSE_ERROR


class DegeneratePatternError(DualityLabError, ValueError):
    """強度がすべてゼロの干渉パターン"""

    exit_code = EXIT_VERIFICATION_FAILURE


class NumericalError(DualityLabError, ArithmeticError):
    """数値誤差が許容値を超えた"""

    exit_code = EXIT_VERIFICATION_FAILURE


class FlagError(DualityLabError):
    """コマンドライン引数の誤用"""

    exit_code = EXIT_FLAG_ERROR


class VerificationFailure(DualityLabError):
    """不変条件チェックの失敗"""

    exit_code = EXIT_VERIFICATION_FAILURE
