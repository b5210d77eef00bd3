import click
from flask import Blueprint

from model.entities import ExperimentConfig
from utils import EXIT_VALIDATION, emit, handle_errors, output_options


def create_experiment_commands(experiment_service, problem_dao, report_dao, default_seed = 0):
    experiment_bp = Blueprint('experiment', __name__, cli_group = 'experiment')

    def execute(name, seed, params, out, fmt, no_timestamp):
        config = ExperimentConfig(name, default_seed if seed is None else seed, params)
        report = experiment_service.run_experiment(config)
        emit(report_dao, report, out, fmt, no_timestamp)
        if not report.passed:
            raise click.exceptions.Exit(EXIT_VALIDATION)

    @experiment_bp.cli.command('run')
    @click.argument('config_path', type = click.Path(dir_okay = False))
    @output_options
    @handle_errors
    def run(config_path, out, fmt, no_timestamp):
        """ ExperimentConfig JSON 파일 실행 """
        config = problem_dao.read_experiment_config(config_path)
        execute(config.name, config.seed, config.params, out, fmt, no_timestamp)

    @experiment_bp.cli.command('counterexample')
    @click.option('--m', type = int, default = 16, show_default = True, help = 'Square of an even integer.')
    @click.option('--seed', type = int, default = None)
    @output_options
    @handle_errors
    def counterexample(m, seed, out, fmt, no_timestamp):
        execute('counterexample', seed, {'m': m}, out, fmt, no_timestamp)

    @experiment_bp.cli.command('injectivity')
    @click.option('--m', type = int, default = 6, show_default = True)
    @click.option('--p', type = int, default = 8, show_default = True)
    @click.option('--q', type = int, default = 2, show_default = True)
    @click.option('--s', type = int, default = 1, show_default = True)
    @click.option('--t', type = int, default = 1, show_default = True)
    @click.option('--trials', type = int, default = 100, show_default = True)
    @click.option('--seed', type = int, default = None)
    @output_options
    @handle_errors
    def injectivity(m, p, q, s, t, trials, seed, out, fmt, no_timestamp):
        """ Gaussian [A B] support-enumeration rank check """
        execute('injectivity', seed, {'m': m, 'p': p, 'q': q, 's': s, 't': t, 'trials': trials}, out, fmt, no_timestamp)

    @experiment_bp.cli.command('com-mc')
    @click.option('--p', type = int, default = 1, show_default = True)
    @click.option('--m', type = int, default = 1, show_default = True)
    @click.option('--r', type = float, default = 1.0, show_default = True)
    @click.option('--delta', type = float, default = 0.3, show_default = True)
    @click.option('--trials', type = int, default = 100000, show_default = True)
    @click.option('--seed', type = int, default = None)
    @output_options
    @handle_errors
    def com_mc(p, m, r, delta, trials, seed, out, fmt, no_timestamp):
        """ Monte Carlo check of P[||A u + v|| < delta] against its bound """
        params = {'p': p, 'm': m, 'r': r, 'delta': delta, 'trials': trials}
        if p == 1 and m == 1:
            params.update({'u': [1.0], 'v': [0.0]})
        execute('com-mc', seed, params, out, fmt, no_timestamp)

    @experiment_bp.cli.command('sieve')
    @click.option('--cases', type = int, default = 1000, show_default = True)
    @click.option('--seed', type = int, default = None)
    @output_options
    @handle_errors
    def sieve(cases, seed, out, fmt, no_timestamp):
        execute('sieve', seed, {'cases': cases}, out, fmt, no_timestamp)

    @experiment_bp.cli.command('boxdim')
    @click.option('--samples', type = int, default = 10000, show_default = True)
    @click.option('--seed', type = int, default = None)
    @output_options
    @handle_errors
    def boxdim(samples, seed, out, fmt, no_timestamp):
        """ box-counting dimension of a segment and a disk """
        execute('boxdim', seed, {'samples': samples}, out, fmt, no_timestamp)

    return experiment_bp
