import click
import numpy as np
from flask import Blueprint

import linalg
from utils import check_converged, emit, handle_errors, output_options, parse_set_spec


def create_recovery_commands(recovery_service, uncertainty_service, matrix_dao, report_dao):
    recovery_bp = Blueprint('recovery', __name__, cli_group = None)

    @recovery_bp.cli.command('recover')
    @click.option('--method', type = click.Choice(['linear', 'l1']), default = 'linear', show_default = True)
    @click.option('--dft', type = int, default = None)
    @click.option('--matrix', type = click.Path(dir_okay = False), default = None)
    @click.option('--P', 'p_spec', default = '', help = 'Erased entries (linear method).')
    @click.option('--Q', 'q_spec', required = True, help = 'Support of the signal in the basis U.')
    @click.option('--observed', type = click.Path(dir_okay = False), required = True, help = 'Observation vector file.')
    @click.option('--tol', type = float, default = None, help = 'Overrides the solver absolute tolerance.')
    @click.option('--max-iter', 'max_iter', type = int, default = None)
    @click.option('--trace', is_flag = True, help = 'Write the solver residual trace next to --out.')
    @output_options
    @handle_errors
    def recover(method, dft, matrix, p_spec, q_spec, observed, tol, max_iter, trace, out, fmt, no_timestamp):
        """
        erasure / 잡음 관측 복원

        linear : p_hat = (I - D_P P_Q(U))^{-1} D_{P^c} y with its constant C.
        l1     : l1 projection of y onto the subspace spanned by U_Q.
        """
        U = uncertainty_service.load_unitary(matrix, dft)
        m = U.shape[0]
        Q = parse_set_spec(q_spec, m)
        y = matrix_dao.read_vector(observed)

        if method == 'linear':
            P = parse_set_spec(p_spec, m)
            p_hat, constant = recovery_service.stable_linear_recovery(U, Q, P, y)
            emit(report_dao, {'method': method, 'signal': p_hat, 'constant': constant}, out, fmt, no_timestamp)
            return

        cfg = recovery_service.solver_config(abs_tolerance = tol, max_iterations = max_iter, trace = trace)
        result = recovery_service.l1_subspace_denoise(U, Q, y, cfg)
        report = {
            'method': method,
            'signal': result.x,
            'objective': result.objective,
            'status': result.status,
            'iterations': result.iterations
        }
        emit(report_dao, report, out, fmt, no_timestamp)
        if trace and out:
            report_dao.write_trace(out, result.trace, result.iterations, result.status)
        check_converged(result.status, result.iterations)

    @recovery_bp.cli.command('separate')
    @click.argument('problem', type = click.Path(dir_okay = False))
    @click.option('--algorithm', type = click.Choice(['p0', 'p1']), default = 'p1', show_default = True)
    @click.option('--max-support', 'max_support', type = int, default = None, help = '(P0) largest support size scanned.')
    @click.option('--alternative', type = click.Path(dir_okay = False), default = None,
                  help = 'Second candidate y; flags near-degenerate (P1) optima.')
    @click.option('--seed', type = int, default = None,
                  help = 'Recorded in the solver config; both solvers are deterministic.')
    @click.option('--tol', type = float, default = None)
    @click.option('--max-iter', 'max_iter', type = int, default = None)
    @click.option('--trace', is_flag = True)
    @output_options
    @handle_errors
    def separate(problem, algorithm, max_support, alternative, seed, tol, max_iter, trace, out, fmt, no_timestamp):
        """ 희소 신호 분리 (P0) / (P1) """
        separation = recovery_service.load_problem(problem)
        cfg = recovery_service.solver_config(abs_tolerance = tol, max_iterations = max_iter, trace = trace, seed = seed)

        if algorithm == 'p0':
            solution = recovery_service.separate_p0(separation, max_support, cfg)
        else:
            candidate = matrix_dao.read_vector(alternative) if alternative else None
            solution = recovery_service.separate_p1(separation, cfg, candidate)

        report = {'solution': solution}
        if separation.planted_y is not None:
            report['planted_error'] = float(np.linalg.norm(solution.y - separation.planted_y))
        report['coherence'] = {
            'A': linalg.coherence(separation.A),
            'B': linalg.coherence(separation.B) if separation.B.cols else 0.0,
            'mutual': linalg.mutual_coherence(separation.A, separation.B)
        }
        emit(report_dao, report, out, fmt, no_timestamp)
        if trace and out and solution.trace is not None:
            report_dao.write_trace(out, solution.trace, solution.iterations, solution.solver_status)
        check_converged(solution.solver_status, solution.iterations)

    return recovery_bp
