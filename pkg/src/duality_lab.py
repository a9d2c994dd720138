import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from modules import __version__
from modules.data_manager import DataManager, RunMetadata, dumps, state_to_document
from modules.ensembles import DEFAULT_SEED, EnsembleSampler, EnsembleSpec, FamilySpec, check_paths
from modules.errors import (EXIT_FLAG_ERROR, EXIT_INVALID_STATE, EXIT_OK, EXIT_VERIFICATION_FAILURE,
                            DualityLabError, FlagError, ValidationError)
from modules.interference import DEFAULT_POINTS, InterferenceSimulator
from modules.invariant_checker import InvariantChecker
from modules.measures import REPORT_COLUMNS, DualityMeasures, batch_reports
from modules.parallel_sampler import ParallelSampler
from modules.quanton_state import PureState

FAMILIES = {
    'dephase': 'dephase_path',
    'depolarize': 'depolarize_path',
    'two-slit-bias': 'two_slit_bias',
}
ENSEMBLES = {
    'pure': 'haar_pure',
    'hs': 'hilbert_schmidt_mixed',
    'rank-k': 'rank_k_mixed',
}
DEFAULT_STEPS = 11
DEFAULT_COUNT = 10000
DEFAULT_SAMPLES = 10000
DEFAULT_N_MAX = 8


class DualityLabArgumentParser(argparse.ArgumentParser):
    """使い方の誤りを終了コード4に対応するFlagErrorとして送出する"""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise FlagError(message)


class DualityLab:
    """双対性指標の計算・掃引・サンプリング・検証を行うメインクラス"""

    def __init__(self, argv, level=logging.INFO, log_file=None):
        self.argv = ['duality_lab.py'] + list(argv)
        self.setup_logging(level, log_file)
        self.data_manager = DataManager()
        self.state_manager = self.data_manager.state_manager
        self.measures = DualityMeasures()
        self.ensemble_sampler = EnsembleSampler(self.state_manager)
        self.simulator = InterferenceSimulator()

    def setup_logging(self, level, log_file=None):
        """ログ設定を初期化（標準出力は結果専用なので標準エラーに出す）"""
        handlers = [logging.StreamHandler(sys.stderr)]
        if log_file:
            Path(log_file).parent.mkdir(parents=True, exist_ok=True)
            handlers.append(logging.FileHandler(log_file, mode='w', encoding='utf-8'))
        logging.basicConfig(
            level=level,
            format='%(asctime)s - %(levelname)s - %(message)s',
            handlers=handlers,
            force=True,
        )
        self.logger = logging.getLogger(__name__)

    def metadata(self, seeds=None):
        return RunMetadata.create(self.argv, seeds, self.data_manager.tolerances)

    def emit_json(self, payload):
        sys.stdout.write(dumps(payload) + '\n')

    def emit_frame(self, dataframe, metadata):
        self.data_manager.csv_exporter.print_frame(dataframe, metadata)

    def cmd_measures(self, args):
        """状態ファイル1つの MeasureReport を出力"""
        state = self.data_manager.load_state_file(args.state_file, args.renormalize)
        report = self.measures.duality_report(state)
        self.logger.info(f"n = {report.n}: C = {report.coherence:.6f}, P = {report.predictability:.6f}, "
                         f"residual = {report.residual:.3g}")
        metadata = self.metadata()
        if args.csv:
            self.emit_frame(pd.DataFrame([report.to_row()], columns=REPORT_COLUMNS), metadata)
        else:
            self.emit_json({**report.to_dict(), 'metadata': metadata.to_dict()})
        return EXIT_OK

    def _sweep_base(self, args, n):
        if args.state is not None:
            base = self.data_manager.load_state_file(args.state, args.renormalize)
            if args.n is not None and args.n != base.n:
                raise FlagError(f"--n {args.n} does not match the state file (n = {base.n})")
            return base
        if args.base == 'random':
            return self.ensemble_sampler.sample_mixed(n, n, args.seed)
        return self.state_manager.from_pure(PureState.equal_superposition(n))

    def cmd_sweep(self, args):
        """パラメータ付き状態族に沿って指標を計算しCSV/Parquetに出力"""
        kind = FAMILIES[args.family]
        if kind == 'two_slit_bias':
            if args.n not in (None, 2):
                raise FlagError(f"two-slit-bias is a two-path family, got --n {args.n}")
            if args.state is not None:
                raise FlagError("two-slit-bias does not take a base state")
            spec = FamilySpec(kind, args.steps)
        else:
            n = check_paths(args.n if args.n is not None else 2)
            spec = FamilySpec(kind, args.steps, self._sweep_base(args, n))

        family = self.ensemble_sampler.family_states(spec)
        parameters = np.array([parameter for parameter, _ in family])
        values = batch_reports(np.stack([state.rho for _, state in family]))
        frame = self.data_manager.reports_frame(values, extra={'parameter': parameters})
        self.logger.info(f"Swept {args.family} over {len(frame)} steps "
                         f"(max P^2+C^2 = {float(values['duality_sum'].max()):.6f})")

        metadata = self.metadata({'seed': args.seed})
        if args.out:
            self.data_manager.save_table(frame, args.out, metadata)
        else:
            self.emit_frame(frame, metadata)
        return EXIT_OK

    def cmd_sample(self, args):
        """ランダム状態を生成して P^2 + C^2 ≤ 1 と純粋状態での等号をチェック"""
        spec = EnsembleSpec(ENSEMBLES[args.ensemble], args.n, args.rank, args.seed)
        sampler = ParallelSampler()
        run = sampler.sample(spec, args.count, keep_states=args.dump is not None)
        summary = run.summary
        metadata = self.metadata({'seed': spec.seed})

        if args.dump:
            self.data_manager.dump_states_jsonl(args.dump, run.states)
            self.logger.info(f"Dumped {len(run.states)} states to {args.dump}")
        if args.table:
            frame = self.data_manager.reports_frame(run.values, extra={'seed_index': run.values['seed_index']})
            self.data_manager.save_table(frame, args.table, metadata)

        worst = sampler.worst_state(spec, summary)
        if args.csv:
            self.emit_frame(pd.DataFrame([summary.to_dict()]), metadata)
        else:
            self.emit_json({
                'metadata': metadata.to_dict(),
                'summary': summary.to_dict(),
                'worst_state': state_to_document(worst),
            })

        if args.check_duality and not summary.passed:
            self.logger.error(f"Duality check failed: {summary.violations} violations, "
                              f"{summary.saturation_violations or 0} saturation violations, "
                              f"{summary.invalid_states} invalid states")
            return EXIT_VERIFICATION_FAILURE
        return EXIT_OK

    def cmd_pattern(self, args):
        """干渉縞 I(φ) をCSVに出力し、縞の可視度を標準エラーに表示"""
        state = self.data_manager.load_state_file(args.state_file, args.renormalize)
        pattern = self.simulator.pattern(state, args.points)
        visibility = self.simulator.fringe_visibility(pattern)
        frame = self.simulator.pattern_frame(pattern)

        metadata = self.metadata()
        if args.out:
            self.data_manager.csv_exporter.save_frame(frame, args.out, metadata)
        else:
            self.emit_frame(frame, metadata)
        print(f"fringe_visibility = {visibility:.17g} (n = {pattern.n}, points = {pattern.points})",
              file=sys.stderr)
        return EXIT_OK

    def cmd_verify(self, args):
        """全不変条件チェックを実行して結果表を出力"""
        report = InvariantChecker().run(args.n_max, args.samples, args.seed)
        frame = pd.DataFrame([result.to_dict() for result in report.results])
        for line in frame[['check', 'n', 'trials', 'worst', 'tolerance', 'verdict']].to_string(index=False).splitlines():
            self.logger.info(line)

        metadata = self.metadata({'seed': args.seed})
        if args.csv:
            self.emit_frame(frame, metadata)
        else:
            self.emit_json({**report.to_dict(), 'metadata': metadata.to_dict()})

        self.logger.info(f"=== Verification {'passed' if report.passed else 'FAILED'} "
                         f"({len(report.results) - len(report.failures)}/{len(report.results)} checks) ===")
        return EXIT_OK if report.passed else EXIT_VERIFICATION_FAILURE


def _add_output_selector(parser):
    group = parser.add_mutually_exclusive_group()
    group.add_argument('--csv', action='store_true', help='CSV output')
    group.add_argument('--json', action='store_true', help='JSON output (default)')


def build_parser():
    parser = DualityLabArgumentParser(
        prog='duality_lab.py',
        description='Wave-particle duality measures for n-path quanton states',
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    parser.add_argument('--log-file', help='also write the log to this file')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true', help='debug logging')
    verbosity.add_argument('-q', '--quiet', action='store_true', help='warnings and errors only')
    subparsers = parser.add_subparsers(dest='command', required=True)

    measures = subparsers.add_parser('measures', help='duality report of one state file')
    measures.add_argument('state_file')
    measures.add_argument('--renormalize', action='store_true', help='divide by the trace (or norm)')
    _add_output_selector(measures)
    measures.set_defaults(handler=DualityLab.cmd_measures)

    sweep = subparsers.add_parser('sweep', help='measures along a state family')
    sweep.add_argument('--family', required=True, choices=sorted(FAMILIES))
    sweep.add_argument('--n', type=int, default=None)
    sweep.add_argument('--steps', type=int, default=DEFAULT_STEPS)
    sweep.add_argument('--seed', type=int, default=DEFAULT_SEED)
    sweep.add_argument('--base', choices=['equal', 'random'], default='equal',
                       help='base state of the dephase/depolarize families')
    sweep.add_argument('--state', help='state file used as the base state')
    sweep.add_argument('--renormalize', action='store_true')
    sweep.add_argument('--out', help='output file (.csv or .parquet); stdout when omitted')
    sweep.set_defaults(handler=DualityLab.cmd_sweep)

    sample = subparsers.add_parser('sample', help='Monte-Carlo check of P^2 + C^2 <= 1')
    sample.add_argument('--n', type=int, required=True)
    sample.add_argument('--count', type=int, default=DEFAULT_COUNT)
    sample.add_argument('--ensemble', choices=sorted(ENSEMBLES), default='hs')
    sample.add_argument('--rank', type=int, default=None)
    sample.add_argument('--seed', type=int, default=DEFAULT_SEED)
    sample.add_argument('--check-duality', action=argparse.BooleanOptionalAction, default=True,
                        help='exit 5 when a violation is found')
    sample.add_argument('--dump', help='write the generated states as JSON lines')
    sample.add_argument('--table', help='write per-state reports (.csv or .parquet)')
    _add_output_selector(sample)
    sample.set_defaults(handler=DualityLab.cmd_sample)

    pattern = subparsers.add_parser('pattern', help='n-slit interference pattern of a state file')
    pattern.add_argument('state_file')
    pattern.add_argument('--points', type=int, default=DEFAULT_POINTS)
    pattern.add_argument('--renormalize', action='store_true')
    pattern.add_argument('--out', help='output CSV file; stdout when omitted')
    pattern.set_defaults(handler=DualityLab.cmd_pattern)

    verify = subparsers.add_parser('verify', help='run the invariant check suite')
    verify.add_argument('--n-max', type=int, default=DEFAULT_N_MAX)
    verify.add_argument('--samples', type=int, default=DEFAULT_SAMPLES)
    verify.add_argument('--seed', type=int, default=DEFAULT_SEED)
    _add_output_selector(verify)
    verify.set_defaults(handler=DualityLab.cmd_verify)
    return parser


def main(argv=None):
    """メイン関数（終了コードを返す）"""
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except FlagError as e:
        print(f"{parser.prog}: error: {e}", file=sys.stderr)
        return EXIT_FLAG_ERROR
    except SystemExit as e:
        # --help / --version
        return EXIT_OK if e.code in (0, None) else EXIT_FLAG_ERROR

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    lab = DualityLab(argv, level, args.log_file)
    try:
        return args.handler(lab, args)
    except ValidationError as e:
        lab.logger.error(str(e))
        print(json.dumps(e.report.to_dict(), sort_keys=True), file=sys.stderr)
        return EXIT_INVALID_STATE
    except DualityLabError as e:
        lab.logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        lab.logger.exception(f"Unexpected error: {str(e)}")
        return EXIT_VERIFICATION_FAILURE


if __name__ == '__main__':
    sys.exit(main())
