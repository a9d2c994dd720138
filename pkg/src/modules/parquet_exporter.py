import json
import logging
from pathlib import Path

import pandas as pd

METADATA_KEY = b'duality_lab'


class ParquetExporter:
    """Parquet出力に関する処理を担当するクラス"""

    def __init__(self, data_manager):
        self.data_manager = data_manager
        self.logger = logging.getLogger(__name__)

    def save_frame(self, dataframe, path, metadata=None):
        """DataFrameをParquetファイルに保存（実行情報はスキーマのメタデータに格納）"""
        if dataframe is None:
            return None

        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)

        try:
            import pyarrow as pa
            import pyarrow.parquet as pq

            # データ型の最適化
            optimized_df = self.data_manager.optimize_dataframe_types(dataframe.copy())
            table = pa.Table.from_pandas(optimized_df, preserve_index=False)
            if metadata is not None:
                schema_metadata = dict(table.schema.metadata or {})
                schema_metadata[METADATA_KEY] = json.dumps(metadata.to_dict(), sort_keys=True).encode('utf-8')
                table = table.replace_schema_metadata(schema_metadata)

            # Parquetファイルに保存（圧縮あり）
            pq.write_table(table, path, compression='snappy')
            self.logger.info(f"Parquet file saved: {path} ({len(dataframe)} rows)")
            return path

        except ImportError as e:
            self.logger.error("pyarrow not installed. Install with: pip install pyarrow")
            self.logger.error(f"ImportError details: {str(e)}")
            self.logger.warning("FALLBACK: Saving as CSV instead of Parquet")
            return self.data_manager.csv_exporter.save_frame(dataframe, path.with_suffix('.csv'), metadata)
        except Exception as e:
            self.logger.error(f"Failed to save to parquet: {str(e)}")
            self.logger.error(f"Exception type: {type(e).__name__}")
            self.logger.warning("FALLBACK: Saving as CSV instead of Parquet")
            return self.data_manager.csv_exporter.save_frame(dataframe, path.with_suffix('.csv'), metadata)

    def load_frame(self, path):
        return pd.read_parquet(path, engine='pyarrow')

    def read_metadata(self, path):
        import pyarrow.parquet as pq

        schema_metadata = pq.read_schema(path).metadata or {}
        if METADATA_KEY not in schema_metadata:
            return {}
        return json.loads(schema_metadata[METADATA_KEY].decode('utf-8'))
