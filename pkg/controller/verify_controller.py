import click
from flask import Blueprint

from utils import EXIT_VALIDATION, emit, handle_errors, output_options


def create_verify_commands(verify_service, report_dao, default_seed = 0):
    verify_bp = Blueprint('verify', __name__, cli_group = None)

    @verify_bp.cli.command('verify')
    @click.option('--suite', default = 'all', show_default = True,
                  help = 'Suite name, comma-separated names or "all".')
    @click.option('--seed', type = int, default = None)
    @click.option('--workers', type = int, default = None, help = 'Threads running suites concurrently.')
    @output_options
    @handle_errors
    def verify(suite, seed, workers, out, fmt, no_timestamp):
        """ 불변식 검증 suite 실행; exit 0 only when every selected suite passes """
        summary = verify_service.run(suite, default_seed if seed is None else seed, workers)
        emit(report_dao, summary, out, fmt, no_timestamp)
        if not summary['passed']:
            failed = [name for name, result in summary['suites'].items() if not result['passed']]
            click.echo(f'failed suites: {", ".join(failed)}', err = True)
            raise click.exceptions.Exit(EXIT_VALIDATION)

    return verify_bp
