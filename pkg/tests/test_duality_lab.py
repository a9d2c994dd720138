import io
import json

import pandas as pd
import pytest

from duality_lab import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def read_csv_output(text):
    return pd.read_csv(io.StringIO(text), comment='#', float_precision='round_trip')


def test_measures_json(capsys, jsons_dir):
    code, out, _ = run_cli(capsys, 'measures', str(jsons_dir / 'biased_pure.json'))
    assert code == 0
    payload = json.loads(out)
    assert payload['n'] == 2
    assert payload['predictability'] == pytest.approx(0.8, abs=1e-12)
    assert payload['coherence'] == pytest.approx(0.6, abs=1e-12)
    assert abs(payload['residual']) <= 1e-12
    assert payload['metadata']['tool_version']


def test_measures_csv(capsys, jsons_dir):
    code, out, _ = run_cli(capsys, 'measures', '--csv', str(jsons_dir / 'identity3.json'))
    assert code == 0
    assert out.startswith('# tool_version: ')
    frame = read_csv_output(out)
    assert len(frame) == 1
    assert frame['coherence'][0] == 0.0
    assert frame['predictability'][0] == pytest.approx(0.0, abs=1e-12)
    assert frame['purity'][0] == pytest.approx(1 / 3)


def test_measures_invalid_state(capsys, jsons_dir):
    code, out, err = run_cli(capsys, 'measures', str(jsons_dir / 'non_psd.json'))
    assert code == 2
    assert out == ''
    assert '"min_eigenvalue"' in err


def test_measures_unnormalized_state(capsys, tmp_path):
    path = tmp_path / 'double.json'
    path.write_text(json.dumps({'n': 2, 'rho': [[1, 0], [0, 1]]}), encoding='utf-8')
    assert run_cli(capsys, 'measures', str(path))[0] == 2
    code, out, _ = run_cli(capsys, 'measures', '--renormalize', str(path))
    assert code == 0
    assert json.loads(out)['purity'] == pytest.approx(0.5)


def test_measures_parse_errors(capsys, tmp_path, jsons_dir):
    assert run_cli(capsys, 'measures', str(tmp_path / 'missing.json'))[0] == 3
    broken = tmp_path / 'broken.json'
    broken.write_text('{"n": 2, "amplitudes": [[1, 0]]}', encoding='utf-8')
    assert run_cli(capsys, 'measures', str(broken))[0] == 3


def test_sweep_two_slit_bias(capsys):
    code, out, _ = run_cli(capsys, 'sweep', '--family', 'two-slit-bias', '--steps', '11')
    assert code == 0
    frame = read_csv_output(out)
    assert len(frame) == 11
    assert list(frame.columns[:3]) == ['parameter', 'n', 'coherence']
    assert frame['predictability'][9] == pytest.approx(0.8, abs=1e-12)
    assert frame['coherence'][9] == pytest.approx(0.6, abs=1e-12)
    assert frame['residual'].abs().max() <= 1e-12


def test_sweep_dephase_to_file(capsys, tmp_path):
    out_path = tmp_path / 'dephase.csv'
    code, out, _ = run_cli(capsys, 'sweep', '--family', 'dephase', '--n', '3', '--steps', '5',
                           '--out', str(out_path))
    assert code == 0
    assert out == ''
    frame = read_csv_output(out_path.read_text(encoding='utf-8'))
    assert frame['coherence'].tolist() == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])
    assert frame['predictability'].abs().max() <= 1e-7


def test_sweep_flag_errors(capsys, jsons_dir):
    assert run_cli(capsys, 'sweep', '--family', 'two-slit-bias', '--n', '3')[0] == 4
    assert run_cli(capsys, 'sweep', '--family', 'dephase', '--n', '1')[0] == 4
    assert run_cli(capsys, 'sweep', '--family', 'dephase', '--steps', '1')[0] == 4
    assert run_cli(capsys, 'sweep', '--family', 'spiral')[0] == 4
    assert run_cli(capsys, 'sweep', '--family', 'depolarize', '--n', '3',
                   '--state', str(jsons_dir / 'identity2.json'))[0] == 4


def test_sample_pure(capsys):
    code, out, _ = run_cli(capsys, 'sample', '--n', '5', '--count', '200', '--ensemble', 'pure', '--seed', '1')
    assert code == 0
    payload = json.loads(out)
    assert payload['summary']['passed'] is True
    assert payload['summary']['residual_max_abs'] <= 1e-12
    assert payload['worst_state']['n'] == 5


def test_sample_is_reproducible(capsys):
    argv = ('sample', '--n', '4', '--count', '150', '--seed', '42')
    first = json.loads(run_cli(capsys, *argv)[1])
    second = json.loads(run_cli(capsys, *argv)[1])
    for payload in (first, second):
        payload['metadata'].pop('timestamp')
    assert first == second


def test_sample_dump_and_table(capsys, tmp_path):
    dump = tmp_path / 'states.jsonl'
    table = tmp_path / 'reports.csv'
    code, out, _ = run_cli(capsys, 'sample', '--n', '3', '--count', '25', '--ensemble', 'rank-k', '--rank', '2',
                           '--dump', str(dump), '--table', str(table), '--csv')
    assert code == 0
    assert len(dump.read_text(encoding='utf-8').splitlines()) == 25
    assert len(read_csv_output(table.read_text(encoding='utf-8'))) == 25
    assert bool(read_csv_output(out)['passed'][0])


def test_sample_flag_errors(capsys):
    assert run_cli(capsys, 'sample', '--n', '3', '--ensemble', 'rank-k')[0] == 4
    assert run_cli(capsys, 'sample', '--n', '1')[0] == 4
    assert run_cli(capsys, 'sample', '--n', '3', '--count', '0')[0] == 4
    assert run_cli(capsys, 'sample', '--count', '10')[0] == 4


def test_pattern(capsys, jsons_dir):
    code, out, err = run_cli(capsys, 'pattern', str(jsons_dir / 'equal_pure2.json'), '--points', '64')
    assert code == 0
    frame = read_csv_output(out)
    assert list(frame.columns) == ['phi', 'intensity']
    assert len(frame) == 64
    assert frame['intensity'][0] == pytest.approx(2.0)
    line = next(line for line in err.splitlines() if line.startswith('fringe_visibility = '))
    assert float(line.split()[2]) == pytest.approx(1.0, abs=1e-3)


def test_pattern_errors(capsys, jsons_dir):
    assert run_cli(capsys, 'pattern', str(jsons_dir / 'equal_pure2.json'), '--points', '8')[0] == 4
    assert run_cli(capsys, 'pattern', str(jsons_dir / 'non_psd.json'))[0] == 2


@pytest.mark.parametrize('name, expected', [('coherence_03.json', 0.6), ('identity2.json', 0.0)])
def test_pattern_visibility_of_mixed_states(capsys, jsons_dir, name, expected):
    code, out, err = run_cli(capsys, 'pattern', str(jsons_dir / name))
    assert code == 0
    assert len(read_csv_output(out)) == 4096
    line = next(line for line in err.splitlines() if line.startswith('fringe_visibility = '))
    assert float(line.split()[2]) == pytest.approx(expected, abs=1e-3)


def test_pattern_of_maximally_mixed_three_paths(capsys, jsons_dir, tmp_path):
    out_path = tmp_path / 'flat.csv'
    code, out, _ = run_cli(capsys, 'pattern', str(jsons_dir / 'identity3.json'), '--out', str(out_path))
    assert code == 0
    assert out == ''
    frame = read_csv_output(out_path.read_text(encoding='utf-8'))
    assert (frame['intensity'] - 1.0).abs().max() <= 1e-12


def test_verify(capsys):
    code, out, _ = run_cli(capsys, 'verify', '--n-max', '2', '--samples', '50')
    assert code == 0
    payload = json.loads(out)
    assert payload['passed'] is True
    assert all(check['verdict'] == 'pass' for check in payload['checks'])
    assert payload['metadata']['seeds'] == {'seed': 20190425}


def test_verify_flag_errors(capsys):
    assert run_cli(capsys, 'verify', '--n-max', '1')[0] == 4
    assert run_cli(capsys, 'verify', '--samples', '0')[0] == 4


def test_usage(capsys):
    assert run_cli(capsys, '--help')[0] == 0
    code, out, _ = run_cli(capsys, '--version')
    assert code == 0
    assert '1.0.0' in out
    assert run_cli(capsys)[0] == 4
    assert run_cli(capsys, 'unknown')[0] == 4


def test_pattern_accepts_near_hermitian_file(capsys, tmp_path):
    path = tmp_path / 'near_hermitian.json'
    path.write_text(json.dumps({'n': 2, 'rho': [[0.5, 0.3], [[0.3, 5e-11], 0.5]]}), encoding='utf-8')
    assert run_cli(capsys, 'measures', str(path))[0] == 0
    code, out, err = run_cli(capsys, 'pattern', str(path), '--points', '64')
    assert code == 0
    assert len(read_csv_output(out)) == 64
    line = next(line for line in err.splitlines() if line.startswith('fringe_visibility = '))
    assert float(line.split()[2]) == pytest.approx(0.6, abs=1e-3)
