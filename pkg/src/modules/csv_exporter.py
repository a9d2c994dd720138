import logging
import sys
from pathlib import Path

import pandas as pd

# 17桁で書けば float64 は往復で一致する
FLOAT_FORMAT = '%.17g'


class CSVExporter:
    """CSV出力に関する処理を担当するクラス"""

    def __init__(self, data_manager):
        self.data_manager = data_manager
        self.logger = logging.getLogger(__name__)

    def write_frame(self, dataframe, stream, metadata=None):
        """メタデータを `#` コメント行として書いた後にCSV本体を書く"""
        if metadata is not None:
            for line in metadata.comment_lines():
                stream.write(line + '\n')
        dataframe.to_csv(stream, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')

    def save_frame(self, dataframe, path, metadata=None):
        """DataFrameをCSVファイルに保存"""
        if dataframe is None:
            return None
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            self.write_frame(dataframe, f, metadata)
        self.logger.info(f"CSV file saved: {path} ({len(dataframe)} rows)")
        return path

    def print_frame(self, dataframe, metadata=None):
        self.write_frame(dataframe, sys.stdout, metadata)

    def load_frame(self, path):
        """`#` コメント行を読み飛ばしてCSVを読み込む"""
        return pd.read_csv(path, comment='#', float_precision='round_trip')

    def read_metadata(self, path):
        """先頭の `# key: value` 行を辞書として返す"""
        metadata = {}
        with open(path, 'r', encoding='utf-8') as f:
            for line in f:
                if not line.startswith('#'):
                    break
                key, _, value = line[1:].strip().partition(': ')
                metadata[key] = value
        return metadata
