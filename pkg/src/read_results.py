import argparse
import os
import sys

from modules.data_manager import DataManager


def read_results_file(path):
    """
    sweep / sample が出力したCSVまたはParquetファイルを読み込み、内容を表示する関数
    """
    data_manager = DataManager()

    try:
        df = data_manager.load_table(path)
        if path.lower().endswith('.parquet'):
            metadata = data_manager.parquet_exporter.read_metadata(path)
        else:
            metadata = data_manager.csv_exporter.read_metadata(path)

        # 基本的な情報を表示
        print("=== 結果ファイルの内容 ===")
        print(f"ファイルパス: {path}")
        print(f"データ形状: {df.shape}")
        print(f"カラム数: {len(df.columns)}")
        print(f"行数: {len(df)}")

        print("\n=== 実行情報 ===")
        for key, value in metadata.items():
            print(f"{key}: {value}")

        print("\n=== カラム情報 ===")
        for i, col in enumerate(df.columns):
            print(f"{i+1:2d}. {col}")

        print("\n=== 最初の5行 ===")
        print(df.head())

        print("\n=== 基本統計情報 ===")
        print(df.describe())

        return df

    except FileNotFoundError:
        print(f"エラー: ファイル '{path}' が見つかりません。", file=sys.stderr)
        print("現在のディレクトリ:", os.getcwd(), file=sys.stderr)
        return None
    except Exception as e:
        print(f"エラーが発生しました: {str(e)}", file=sys.stderr)
        return None


def main(argv=None):
    """メイン関数"""
    parser = argparse.ArgumentParser(description='Inspect a sweep or sample result table')
    parser.add_argument('path', help='CSV or Parquet file written by duality_lab.py')
    args = parser.parse_args(argv)

    df = read_results_file(args.path)
    if df is None:
        return 1

    if 'residual' in df.columns:
        print("\n=== 残差の要約 ===")
        print(f"最小残差: {df['residual'].min():.3g}")
        print(f"負の残差（< -1e-12）の数: {int((df['residual'] < -1e-12).sum())}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
