import json
import logging
import shlex
from dataclasses import dataclass, field
from numbers import Real
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .csv_exporter import CSVExporter
from .ensembles import GENERATOR_IDENTITY
from .errors import DimensionError, StateParseError
from .measures import REPORT_COLUMNS
from .parquet_exporter import ParquetExporter
from .quanton_state import DEFAULT_TOLERANCES, PureState, QuantonState, StateManager

logger = logging.getLogger(__name__)

INTEGER_COLUMNS = ['n', 'seed_index', 'rank']


@dataclass(frozen=True)
class RunMetadata:
    """出力ファイルに付与する実行情報"""

    tool_version: str
    command_line: str
    seeds: dict
    generator: str
    timestamp: str
    tolerances: dict = field(default_factory=DEFAULT_TOLERANCES.to_dict)

    @classmethod
    def create(cls, argv, seeds=None, tolerances=DEFAULT_TOLERANCES):
        return cls(
            tool_version=__version__,
            command_line=' '.join(shlex.quote(str(arg)) for arg in argv),
            seeds=dict(seeds or {}),
            generator=f"{GENERATOR_IDENTITY} (numpy {np.__version__})",
            timestamp=pd.Timestamp.now(tz='UTC').isoformat(),
            tolerances=tolerances.to_dict(),
        )

    def to_dict(self):
        return {
            'tool_version': self.tool_version,
            'command_line': self.command_line,
            'seeds': self.seeds,
            'generator': self.generator,
            'timestamp': self.timestamp,
            'tolerances': self.tolerances,
        }

    def comment_lines(self):
        """CSV先頭に書く `# key: value` 形式の行"""
        lines = []
        for key, value in self.to_dict().items():
            if isinstance(value, dict):
                value = json.dumps(value, sort_keys=True)
            lines.append(f"# {key}: {value}")
        return lines


def _parse_complex(entry, where):
    """[re, im] の組（または実数）を複素数に変換"""
    if isinstance(entry, bool):
        raise StateParseError(f"{where}: expected [re, im], got {entry!r}")
    if isinstance(entry, Real):
        return complex(float(entry), 0.0)
    if (not isinstance(entry, list) or len(entry) != 2
            or any(isinstance(part, bool) or not isinstance(part, Real) for part in entry)):
        raise StateParseError(f"{where}: expected [re, im], got {entry!r}")
    return complex(float(entry[0]), float(entry[1]))


def _complex_pair(value):
    return [float(value.real), float(value.imag)]


def parse_state_document(document, renormalize=False, tolerances=DEFAULT_TOLERANCES):
    """状態JSON（"rho" または "amplitudes"）を QuantonState / PureState に変換"""
    if not isinstance(document, dict):
        raise StateParseError("state document must be a JSON object")
    has_rho = 'rho' in document
    has_amplitudes = 'amplitudes' in document
    if has_rho and has_amplitudes:
        raise StateParseError("state document must not contain both 'rho' and 'amplitudes'")
    if not has_rho and not has_amplitudes:
        raise StateParseError("state document needs either 'rho' or 'amplitudes'")
    n = document.get('n')
    if isinstance(n, bool) or not isinstance(n, int):
        raise StateParseError(f"'n' must be an integer, got {n!r}")

    try:
        if has_amplitudes:
            entries = document['amplitudes']
            if not isinstance(entries, list) or len(entries) != n:
                raise StateParseError(f"'amplitudes' must be a list of {n} entries")
            c = np.array([_parse_complex(e, f"amplitudes[{j + 1}]") for j, e in enumerate(entries)])
            return PureState.from_amplitudes(c, renormalize, tolerances)

        rows = document['rho']
        if not isinstance(rows, list) or len(rows) != n:
            raise StateParseError(f"'rho' must be a list of {n} rows")
        matrix = np.empty((n, n), dtype=np.complex128)
        for j, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != n:
                raise StateParseError(f"rho row {j + 1} must have {n} entries")
            for k, entry in enumerate(row):
                matrix[j, k] = _parse_complex(entry, f"rho[{j + 1}][{k + 1}]")
        return QuantonState.from_matrix(matrix, renormalize, tolerances)
    except DimensionError as e:
        raise StateParseError(str(e)) from e


def state_to_document(state):
    """QuantonState / PureState を状態JSONの辞書に変換"""
    if isinstance(state, PureState):
        return {'n': state.n, 'amplitudes': [_complex_pair(v) for v in state.c]}
    return {'n': state.n, 'rho': [[_complex_pair(v) for v in row] for row in state.rho]}


def dumps(payload):
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False)


class DataManager:
    """状態ファイル・結果テーブルの読み書きを管理するクラス"""

    def __init__(self, tolerances=DEFAULT_TOLERANCES):
        self.tolerances = tolerances
        self.state_manager = StateManager(tolerances)
        # Exporterインスタンスを初期化
        self.csv_exporter = CSVExporter(self)
        self.parquet_exporter = ParquetExporter(self)

    def load_state_document(self, path, renormalize=False):
        """JSONファイルから状態を読み込む（純粋状態は PureState のまま返す）"""
        path = Path(path)
        try:
            with open(path, 'r', encoding='utf-8') as f:
                document = json.load(f)
        except OSError as e:
            raise StateParseError(f"cannot read state file {path}: {e}") from e
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise StateParseError(f"{path} is not valid JSON: {e}") from e
        state = parse_state_document(document, renormalize, self.tolerances)
        logger.debug(f"Loaded {type(state).__name__} with n = {state.n} from {path}")
        return state

    def load_state_file(self, path, renormalize=False):
        """JSONファイルから密度行列を読み込む"""
        state = self.load_state_document(path, renormalize)
        if isinstance(state, PureState):
            return self.state_manager.from_pure(state)
        return state

    def save_state_file(self, state, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(dumps(state_to_document(state)) + '\n')
        return path

    def dump_states_jsonl(self, path, states, start=0, append=False):
        """状態の配列を1行1状態のJSON-linesで書き出す（seed_index付き）

        states は振幅 (count, n) または密度行列 (count, n, n) の配列。
        """
        states = np.asarray(states, dtype=np.complex128)
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'a' if append else 'w', encoding='utf-8', newline='\n') as f:
            for offset, values in enumerate(states):
                if values.ndim == 1:
                    document = {'n': values.shape[0], 'amplitudes': [_complex_pair(v) for v in values]}
                else:
                    document = {'n': values.shape[0],
                                'rho': [[_complex_pair(v) for v in row] for row in values]}
                document['seed_index'] = start + offset
                f.write(json.dumps(document, sort_keys=True) + '\n')
        return path

    def reports_frame(self, values, extra=None):
        """batch_reports の結果を MeasureReport 列順の DataFrame にする"""
        columns = {}
        for name, column in (extra or {}).items():
            columns[name] = np.asarray(column)
        for name in REPORT_COLUMNS:
            columns[name] = np.asarray(values[name])
        return pd.DataFrame(columns)

    def optimize_dataframe_types(self, df):
        """整数列のみダウンキャストする（浮動小数点は往復可能なfloat64のまま）"""
        for col in INTEGER_COLUMNS:
            if col in df.columns and pd.api.types.is_integer_dtype(df[col]):
                df[col] = pd.to_numeric(df[col], downcast='integer')
        return df

    def save_table(self, dataframe, path, metadata):
        """拡張子が .parquet なら Parquet、それ以外は CSV で保存"""
        path = Path(path)
        if path.suffix.lower() == '.parquet':
            return self.parquet_exporter.save_frame(dataframe, path, metadata)
        return self.csv_exporter.save_frame(dataframe, path, metadata)

    def load_table(self, path):
        path = Path(path)
        if path.suffix.lower() == '.parquet':
            return self.parquet_exporter.load_frame(path)
        return self.csv_exporter.load_frame(path)
