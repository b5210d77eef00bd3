import click
from flask import Blueprint

from utils import emit, handle_errors, output_options, parse_set_spec


def create_bounds_commands(uncertainty_service, report_dao):
    bounds_bp = Blueprint('bounds', __name__, cli_group = None)

    @bounds_bp.cli.command('bounds')
    @click.option('--dft', type = int, default = None, help = 'Use the m x m DFT matrix.')
    @click.option('--matrix', type = click.Path(dir_okay = False), default = None, help = 'Unitary matrix file (CSV or JSON).')
    @click.option('--P', 'p_spec', default = '', help = 'Set spec for P, e.g. "4,8,12,16", "picket:16/4".')
    @click.option('--Q', 'q_spec', default = '', help = 'Set spec for Q, e.g. "interval:0+4".')
    @click.option('--lambda', 'lam', type = float, default = None, help = 'Fixed sieve window length.')
    @output_options
    @handle_errors
    def bounds(dft, matrix, p_spec, q_spec, lam, out, fmt, no_timestamp):
        """
        Delta / Sigma 와 상하한 report

        Exact uncertainty functionals and every applicable bound for (U, P, Q).
        """
        U = uncertainty_service.load_unitary(matrix, dft)
        m = U.shape[0]
        P = parse_set_spec(p_spec, m)
        Q = parse_set_spec(q_spec, m)
        report = uncertainty_service.bound_report(U, P, Q, lam)
        emit(report_dao, report, out, fmt, no_timestamp)

    return bounds_bp
