import functools
import json
import logging
import re
import zlib

import click
import numpy as np

from custom_error import DaoError, DomainError, ServiceError, SolverError
from model.entities import IndexSet

logger = logging.getLogger(__name__)

# CLI 종료 코드
EXIT_OK         = 0
EXIT_VALIDATION = 1
EXIT_SOLVER     = 2
EXIT_INTERNAL   = 3

PICKET_SPEC   = re.compile(r'^picket:(\d+)/(\d+)$')
INTERVAL_SPEC = re.compile(r'^interval:(\d+)\+(\d+)$')


def parse_set_spec(spec, m = None):
    """ 인덱스 집합 문자열 파싱

    Grammar:
        ""  | "empty"        the empty set
        "all"                {1, ..., m}
        "4,8,12,16"          explicit 1-based list
        "picket:m/n"         {m/n, 2m/n, ..., m}
        "interval:l+n"       {l+1, ..., l+n} circular in {1, ..., m}

    args :
        spec : set specification
        m    : universe size; may be omitted for picket specs

    returns :
        IndexSet
    """
    spec = (spec or '').strip().replace(' ', '')

    picket = PICKET_SPEC.match(spec)
    if picket:
        size, n = int(picket.group(1)), int(picket.group(2))
        if m is not None and m != size:
            raise DomainError(f'picket spec {spec!r} does not match m = {m}')
        return IndexSet.picket_fence(size, n)

    if m is None:
        raise DomainError(f'set spec {spec!r} needs the universe size m')

    if spec in ('', 'empty'):
        return IndexSet.empty(m)
    if spec == 'all':
        return IndexSet.full(m)

    interval = INTERVAL_SPEC.match(spec)
    if interval:
        return IndexSet.interval(m, int(interval.group(1)), int(interval.group(2)))

    try:
        indices = [int(token) for token in spec.split(',') if token]
    except ValueError:
        raise DomainError(f'cannot parse set spec {spec!r}')
    return IndexSet.from_one_based(m, indices)


def named_rng(seed, name, *indices):
    """ seed 와 이름으로부터 독립적인 난수 스트림 생성

    The same (seed, name, indices) always yields the same stream, and streams
    with different names or indices are statistically independent.
    """
    entropy = [int(seed) & 0xFFFFFFFF, zlib.crc32(name.encode('utf-8'))]
    entropy.extend(int(i) for i in indices)
    return np.random.default_rng(np.random.SeedSequence(entropy))


def complex_normal(rng, size):
    """ i.i.d. circularly-symmetric complex standard normal entries """
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2)


def _fail(error, exit_code):
    detail = getattr(error, 'message', None) or repr(error)
    click.echo(json.dumps({'message': str(error) if isinstance(error, (ServiceError, DaoError)) else 'INTERNAL_ERROR',
                           'detail': detail}), err = True)
    raise click.exceptions.Exit(exit_code)


def handle_errors(func):
    """ 커맨드 에러 처리 데코레이터

    Maps failures onto the exit-code contract: 1 for file and validation
    errors, 2 for solver non-convergence, 3 for anything unexpected.
    """
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (click.exceptions.Exit, click.ClickException, click.exceptions.Abort):
            raise
        except SolverError as e:
            logger.warning('solver failure: %s', e.message)
            _fail(e, EXIT_SOLVER)
        except (ServiceError, DaoError) as e:
            _fail(e, EXIT_VALIDATION)
        except Exception as e:
            logger.exception('internal error')
            _fail(e, EXIT_INTERNAL)
    return wrapper


def output_options(func):
    """ --out / --format / --no-timestamp 공통 옵션 """
    func = click.option('--no-timestamp', 'no_timestamp', is_flag = True,
                        help = 'Omit created_at and wall_time so reruns are byte-identical.')(func)
    func = click.option('--format', 'fmt', type = click.Choice(['json', 'csv']), default = 'json', show_default = True)(func)
    func = click.option('--out', type = click.Path(dir_okay = False), default = None,
                        help = 'Output file; the report goes to stdout when omitted.')(func)
    return func


def emit(report_dao, report, out, fmt, no_timestamp):
    """ write the report to --out, or print it """
    text = report_dao.write_report(out, report, fmt, timestamp = not no_timestamp)
    if not out:
        click.echo(text, nl = False)
    return text


def check_converged(status, iterations):
    """ non-converged solver runs end the command with the solver exit code """
    if status != 'converged':
        raise SolverError(f'solver stopped with status {status} after {iterations} iterations', status)
