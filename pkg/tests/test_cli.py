import json

import numpy as np
import pytest

import linalg
from model import MatrixDao
from model.entities import IndexSet
from service.verify_service import random_unitary


def last_json_line(text):
    return json.loads(text.strip().splitlines()[-1])


def test_bounds_picket_fence(runner):
    result = runner.invoke(args = ['bounds', '--dft', '16', '--P', 'picket:16/4', '--Q', 'interval:0+4', '--no-timestamp'])
    assert result.exit_code == 0, result.stderr
    report = json.loads(result.stdout)
    assert report['exact_delta'] == pytest.approx(0.5, abs = 1e-12)
    assert report['P'] == [4, 8, 12, 16]
    assert report['is_dft']
    assert report['sieve_bound'] >= report['exact_delta']
    assert 'created_at' not in report


def test_bounds_is_reproducible_without_timestamp(runner):
    args = ['bounds', '--dft', '12', '--P', '1,5,6', '--Q', 'interval:10+4', '--no-timestamp']
    assert runner.invoke(args = args).stdout == runner.invoke(args = args).stdout


def test_bounds_empty_set(runner):
    result = runner.invoke(args = ['bounds', '--dft', '8', '--P', 'empty', '--Q', 'all', '--no-timestamp'])
    assert result.exit_code == 0
    report = json.loads(result.stdout)
    assert report['exact_delta'] == 0
    assert report['exact_sigma'] == 0
    assert report['P'] == []


def test_bounds_from_matrix_file_with_csv_report(runner, tmp_path):
    rng = np.random.default_rng(0)
    matrix = str(tmp_path / 'U.csv')
    MatrixDao().write_matrix(matrix, random_unitary(rng, 6), fmt = 'csv')
    out = tmp_path / 'report.csv'

    result = runner.invoke(args = ['bounds', '--matrix', matrix, '--P', '1,2', '--Q', '3,4,5',
                                   '--out', str(out), '--format', 'csv'])
    assert result.exit_code == 0, result.stderr
    lines = out.read_text().splitlines()
    assert lines[0] == 'key,value'
    assert any(line.startswith('exact_delta,') for line in lines)


def test_bounds_csv_report_on_stdout(runner):
    result = runner.invoke(args = ['bounds', '--dft', '16', '--P', 'picket:16/4', '--Q', 'interval:0+4',
                                   '--format', 'csv', '--no-timestamp'])
    assert result.exit_code == 0, result.stderr
    lines = result.stdout.splitlines()
    assert lines[0] == 'key,value'
    delta = [line for line in lines if line.startswith('exact_delta,')]
    assert len(delta) == 1
    assert float(delta[0].split(',')[1]) == pytest.approx(0.5, abs = 1e-12)


def test_bounds_rejects_non_unitary_matrix(runner, tmp_path):
    matrix = tmp_path / 'U.csv'
    matrix.write_text('1,1\n0,1\n')
    result = runner.invoke(args = ['bounds', '--matrix', str(matrix), '--P', '1', '--Q', '1'])
    assert result.exit_code == 1
    assert last_json_line(result.stderr)['message'] == 'VALIDATION_ERROR'


def test_bounds_rejects_mismatched_set_spec(runner):
    result = runner.invoke(args = ['bounds', '--dft', '16', '--P', 'picket:8/2', '--Q', '1'])
    assert result.exit_code == 1
    assert last_json_line(result.stderr)['message'] == 'DOMAIN_ERROR'


def test_recover_linear(runner, tmp_path):
    m = 16
    F = linalg.dft_matrix(m)
    P = IndexSet.picket_fence(m, 4)
    p = F[:, :4] @ np.array([1, -1j, 0.5, 2])
    observed = str(tmp_path / 'y.csv')
    MatrixDao().write_vector(observed, linalg.restrict(p, P.complement()), fmt = 'csv')

    result = runner.invoke(args = ['recover', '--method', 'linear', '--dft', '16', '--P', 'picket:16/4',
                                   '--Q', 'interval:0+4', '--observed', observed, '--no-timestamp'])
    assert result.exit_code == 0, result.stderr
    report = json.loads(result.stdout)
    assert report['constant'] == pytest.approx(2)
    signal = np.array([complex(re, im) for re, im in report['signal']])
    np.testing.assert_allclose(signal, p, atol = 1e-10)


def test_recover_l1_with_trace(runner, tmp_path):
    m = 16
    F = linalg.dft_matrix(m)
    p = F[:, 0] * 2
    observed = str(tmp_path / 'y.csv')
    MatrixDao().write_vector(observed, p + 3 * np.eye(m)[5], fmt = 'csv')
    out = tmp_path / 'denoised.json'

    result = runner.invoke(args = ['recover', '--method', 'l1', '--dft', '16', '--Q', '1',
                                   '--observed', observed, '--trace', '--out', str(out)])
    assert result.exit_code == 0, result.stderr
    report = json.loads(out.read_text())
    assert report['status'] == 'converged'
    signal = np.array([complex(re, im) for re, im in report['signal']])
    np.testing.assert_allclose(signal, p, atol = 1e-6)
    assert (tmp_path / 'denoised.trace.json').exists()


def test_separate_counterexample(runner, tmp_path):
    problem = str(tmp_path / 'counterexample.json')
    assert runner.invoke(args = ['gen', 'counterexample', '--m', '16', '--out', problem]).exit_code == 0

    result = runner.invoke(args = ['separate', problem, '--no-timestamp'])
    assert result.exit_code == 0, result.stderr
    report = json.loads(result.stdout)
    assert report['solution']['objective'] == pytest.approx(2, abs = 1e-6)
    assert report['solution']['threshold']['holds'] is False
    assert report['coherence']['mutual'] == pytest.approx(0.25)

    p0 = json.loads(runner.invoke(args = ['separate', problem, '--algorithm', 'p0', '--no-timestamp']).stdout)
    assert p0['solution']['support'] == [4, 12]
    assert p0['planted_error'] == pytest.approx(0, abs = 1e-8)


def test_separate_iteration_cap_exits_with_solver_code(runner, tmp_path):
    problem = str(tmp_path / 'counterexample.json')
    runner.invoke(args = ['gen', 'counterexample', '--out', problem])
    result = runner.invoke(args = ['separate', problem, '--max-iter', '1'])
    assert result.exit_code == 2
    assert json.loads(result.stdout)['solution']['solver_status'] == 'max_iter'
    assert last_json_line(result.stderr)['message'] == 'SOLVER_ERROR'


def test_separate_rejects_empty_problem_file(runner, tmp_path):
    problem = tmp_path / 'empty.json'
    problem.write_text('')
    result = runner.invoke(args = ['separate', str(problem)])
    assert result.exit_code == 1
    assert last_json_line(result.stderr)['message'] == 'DAO_ERROR'


def test_generated_clipping_problem_round_trip(runner, tmp_path):
    problem = str(tmp_path / 'clip.json')
    result = runner.invoke(args = ['gen', 'clip', '--m', '16', '--known-locations', '--seed', '0', '--out', problem])
    assert result.exit_code == 0, result.stderr

    result = runner.invoke(args = ['separate', problem, '--no-timestamp'])
    assert result.exit_code == 0, result.stderr
    report = json.loads(result.stdout)
    if report['solution']['threshold']['holds']:
        assert report['planted_error'] <= 1e-5


def test_generated_inpainting_problem_is_recovered(runner, tmp_path):
    problem = str(tmp_path / 'inpaint.json')
    result = runner.invoke(args = ['gen', 'inpaint', '--m', '16', '--missing', '2,7,11,13', '--seed', '1', '--out', problem])
    assert result.exit_code == 0, result.stderr

    report = json.loads(runner.invoke(args = ['separate', problem, '--no-timestamp']).stdout)
    assert report['solution']['threshold']['holds']
    assert report['planted_error'] <= 1e-5


def test_gen_picket_and_comb(runner, tmp_path):
    picket = json.loads(runner.invoke(args = ['gen', 'picket', '--m', '16', '--n', '4']).stdout)
    assert picket['P'] == [4, 8, 12, 16]

    comb = json.loads(runner.invoke(args = ['gen', 'comb', '--m', '16', '--a', '8']).stdout)
    assert np.flatnonzero(comb['d']).tolist() == [7, 15]

    out = str(tmp_path / 'd.csv')
    assert runner.invoke(args = ['gen', 'comb', '--m', '16', '--a', '4', '--out', out, '--format', 'csv']).exit_code == 0
    assert np.flatnonzero(MatrixDao().read_vector(out)).tolist() == [3, 7, 11, 15]

    result = runner.invoke(args = ['gen', 'picket', '--m', '16', '--n', '3'])
    assert result.exit_code == 1


def test_verify_suite_is_deterministic(runner):
    args = ['verify', '--suite', 'comb-identity,projector', '--seed', '7', '--no-timestamp']
    first = runner.invoke(args = args)
    assert first.exit_code == 0, first.stderr
    assert json.loads(first.stdout)['passed']
    assert runner.invoke(args = args).stdout == first.stdout


def test_verify_unknown_suite(runner):
    result = runner.invoke(args = ['verify', '--suite', 'nonsense'])
    assert result.exit_code == 1
    assert last_json_line(result.stderr)['message'] == 'DOMAIN_ERROR'


def test_experiment_commands(runner, tmp_path):
    result = runner.invoke(args = ['experiment', 'counterexample', '--m', '16', '--no-timestamp'])
    assert result.exit_code == 0, result.stderr
    report = json.loads(result.stdout)
    assert all(report['checks'].values())
    assert 'wall_time' not in report

    config = tmp_path / 'sieve.json'
    config.write_text(json.dumps({'name': 'sieve', 'seed': 2, 'params': {'cases': 20}}))
    result = runner.invoke(args = ['experiment', 'run', str(config), '--no-timestamp'])
    assert result.exit_code == 0, result.stderr
    assert json.loads(result.stdout)['metrics']['cases'] == 20


def test_experiment_com_mc_scalar_case(runner):
    result = runner.invoke(args = ['experiment', 'com-mc', '--trials', '20000', '--no-timestamp'])
    assert result.exit_code == 0, result.stderr
    assert json.loads(result.stdout)['checks']['within_bound']
