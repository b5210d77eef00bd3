import click
import numpy as np
from flask import Blueprint

import linalg
from model.entities import Dictionary
from service.experiment_service import random_missing_set, random_sparse_vector
from utils import handle_errors, named_rng, parse_set_spec


def create_gen_commands(experiment_service, problem_dao, matrix_dao, report_dao, default_seed = 0):
    gen_bp = Blueprint('gen', __name__, cli_group = 'gen')

    def dictionary(name, m):
        return Dictionary(linalg.dft_matrix(m) if name == 'dft' else linalg.dct_matrix(m))

    def write_problem(problem, out):
        text = problem_dao.write_problem(out, problem)
        if text is not None:
            click.echo(text)

    @gen_bp.cli.command('clip')
    @click.option('--m', type = int, default = 16, show_default = True)
    @click.option('--dictionary', 'dictionary_name', type = click.Choice(['dft', 'dct']), default = 'dct', show_default = True)
    @click.option('--sparsity', type = int, default = 1, show_default = True)
    @click.option('--clip-level', 'clip_level', type = float, default = None,
                  help = 'Clip level a; defaults to the 90th percentile of |A y|.')
    @click.option('--known-locations', 'known_locations', is_flag = True,
                  help = 'B holds only the identity columns at clipped entries.')
    @click.option('--seed', type = int, default = None)
    @click.option('--out', type = click.Path(dir_okay = False), default = None)
    @handle_errors
    def clip(m, dictionary_name, sparsity, clip_level, known_locations, seed, out):
        """ 클리핑 분리 문제 생성 """
        rng = named_rng(default_seed if seed is None else seed, 'gen-clip')
        A = dictionary(dictionary_name, m)
        y = random_sparse_vector(m, sparsity, rng)
        if clip_level is None:
            clip_level = float(np.quantile(np.abs(A.matrix @ y), 0.9))
        write_problem(experiment_service.make_clipping_scenario(y, A, clip_level, known_locations), out)

    @gen_bp.cli.command('inpaint')
    @click.option('--m', type = int, default = 16, show_default = True)
    @click.option('--dictionary', 'dictionary_name', type = click.Choice(['dft', 'dct']), default = 'dft', show_default = True)
    @click.option('--sparsity', type = int, default = 1, show_default = True)
    @click.option('--missing', 'missing_spec', default = None, help = 'Set spec of missing entries.')
    @click.option('--missing-count', 'missing_count', type = int, default = None,
                  help = 'Random missing set of this size (default sqrt(m)).')
    @click.option('--seed', type = int, default = None)
    @click.option('--out', type = click.Path(dir_okay = False), default = None)
    @handle_errors
    def inpaint(m, dictionary_name, sparsity, missing_spec, missing_count, seed, out):
        """ 결측 복원 분리 문제 생성 """
        rng = named_rng(default_seed if seed is None else seed, 'gen-inpaint')
        A = dictionary(dictionary_name, m)
        y = random_sparse_vector(m, sparsity, rng)
        if missing_spec is not None:
            missing = parse_set_spec(missing_spec, m)
        else:
            missing = random_missing_set(m, int(np.sqrt(m)) if missing_count is None else missing_count, rng)
        write_problem(experiment_service.make_inpainting_scenario(y, A, missing), out)

    @gen_bp.cli.command('counterexample')
    @click.option('--m', type = int, default = 16, show_default = True)
    @click.option('--out', type = click.Path(dir_okay = False), default = None)
    @handle_errors
    def counterexample(m, out):
        """ equal-sparsity separation problem with A = F and B the picket columns """
        write_problem(experiment_service.counterexample_problem(m), out)

    @gen_bp.cli.command('picket')
    @click.option('--m', type = int, required = True)
    @click.option('--n', type = int, required = True)
    @handle_errors
    def picket(m, n):
        P = experiment_service.picket_fence(m, n)
        click.echo(report_dao.dumps({'m': m, 'n': n, 'P': P}, timestamp = False))

    @gen_bp.cli.command('comb')
    @click.option('--m', type = int, required = True)
    @click.option('--a', type = int, required = True)
    @click.option('--out', type = click.Path(dir_okay = False), default = None)
    @click.option('--format', 'fmt', type = click.Choice(['json', 'csv']), default = 'json', show_default = True)
    @handle_errors
    def comb(m, a, out, fmt):
        """ comb vector d^(a) """
        d = experiment_service.comb_vector(m, a)
        if out:
            matrix_dao.write_vector(out, d, fmt)
        else:
            click.echo(report_dao.dumps({'m': m, 'a': a, 'd': d.real}, timestamp = False))

    return gen_bp
