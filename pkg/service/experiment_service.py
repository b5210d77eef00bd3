import itertools
import logging
import math
import time

import numpy as np

import linalg
from custom_error import DimensionError, DomainError, EnumerationLimitError
from model.entities import (
    CounterexampleReport,
    Dictionary,
    DiscreteMeasure,
    ExperimentReport,
    IndexSet,
    InjectivityReport,
    MonteCarloEstimate,
    PointCloud,
    SeparationProblem,
    TrigPolynomial,
    complex_vector
)
from model.report_dao import to_document
from utils import complex_normal, named_rng

logger = logging.getLogger(__name__)

# Monte Carlo trials are drawn in blocks with their own seed stream
MC_BLOCK = 10000

SUPPORT_THRESHOLD = 1e-12


def l0_norm(x):
    return int(np.count_nonzero(np.abs(x) > SUPPORT_THRESHOLD))


def random_dictionary(rng, rows, cols):
    """ i.i.d. complex Gaussian columns, normalised """
    matrix = complex_normal(rng, (rows, cols))
    return Dictionary(matrix / np.linalg.norm(matrix, axis = 0))


def sample_complex_ball(p, r, size, rng):
    """
    uniform samples from the radius-r ball of C^p
        direction uniform on the sphere (normalised complex Gaussian),
        radius r U^{1/(2p)} since C^p has real dimension 2p.

    returns :
        (size, p) complex ndarray
    """
    direction = complex_normal(rng, (size, p))
    direction /= np.linalg.norm(direction, axis = 1, keepdims = True)
    radius = r * rng.random(size) ** (1.0 / (2 * p))
    return radius[:, None] * direction


def sample_segment(n, rng, length = 1.0):
    """ real segment [0, length] embedded in C """
    return PointCloud((length * rng.random(n))[:, None].astype(np.complex128))


def sample_disk(n, rng, radius = 1.0):
    r = radius * np.sqrt(rng.random(n))
    angle = 2 * np.pi * rng.random(n)
    return PointCloud((r * np.exp(1j * angle))[:, None])


def random_sparse_vector(p, s, rng):
    if not 0 <= s <= p:
        raise DomainError(f'sparsity must lie in 0..{p}, got {s}')
    x = np.zeros(p, dtype = np.complex128)
    support = rng.choice(p, size = s, replace = False)
    x[support] = complex_normal(rng, s)
    return x


def random_missing_set(m, k, rng):
    if not 0 <= k <= m:
        raise DomainError(f'missing-set size must lie in 0..{m}, got {k}')
    return IndexSet(m, sorted(int(i) for i in rng.choice(m, size = k, replace = False)))


class ExperimentService:
    def __init__(self, recovery_service, injectivity_sv_tolerance = 1e-8, injectivity_max_columns = 16):
        self.recovery_service = recovery_service
        self.injectivity_sv_tolerance = injectivity_sv_tolerance
        self.injectivity_max_columns = injectivity_max_columns

    def picket_fence(self, m, n):
        return IndexSet.picket_fence(m, n)

    def comb_vector(self, m, a):
        """ d^(a): indicator of {a, 2a, ..., m} """
        if a < 1 or m % a:
            raise DomainError(f'comb spacing must divide m, got m = {m}, a = {a}')
        d = np.zeros(m, dtype = np.complex128)
        d[a - 1::a] = 1.0
        return d

    def comb_identity_defect(self, m, a):
        """ ||F d^(a) - (sqrt(m)/a) d^(m/a)||_2 """
        F = linalg.dft_matrix(m)
        return float(np.linalg.norm(F @ self.comb_vector(m, a) - math.sqrt(m) / a * self.comb_vector(m, m // a)))

    def _square_root(self, m):
        n = math.isqrt(m)
        if n * n != m or n % 2:
            raise DomainError(f'm must be the square of an even integer, got {m}')
        return n

    def counterexample_problem(self, m):
        """
        반례 분리 문제
            A = F, B = columns sqrt(m) l of the identity, planted
            y = d^(2 sqrt(m)) - d^(sqrt(m)) and z = (1, ..., 1).
        """
        n = self._square_root(m)
        A = Dictionary(linalg.dft_matrix(m))
        B = linalg.identity_columns(IndexSet.picket_fence(m, n))
        y = self.comb_vector(m, 2 * n) - self.comb_vector(m, n)
        z = np.ones(n, dtype = np.complex128)
        w = 0.5 * self.comb_vector(m, n // 2)
        return SeparationProblem(A, B, w, sparsity_s = n // 2, planted_y = y, planted_z = z)

    def counterexample(self, m):
        """
        two equally sparse separations of the same w

        returns :
            CounterexampleReport for planted (y, 1) and alternative (d^(2 sqrt(m)), 0)
        """
        problem = self.counterexample_problem(m)
        n = self._square_root(m)
        F, B, w = problem.A.matrix, problem.B.matrix, problem.w
        y, z = problem.planted_y, problem.planted_z
        y_alt = self.comb_vector(m, 2 * n)
        z_alt = np.zeros(n, dtype = np.complex128)

        planted_residual = float(np.linalg.norm(F @ y + B @ z - w))
        alternative_residual = float(np.linalg.norm(F @ y_alt + B @ z_alt - w))
        w_residual = float(np.linalg.norm(w - 0.5 * self.comb_vector(m, n // 2)))

        report = CounterexampleReport(
            m = m,
            w = w,
            planted_y = y,
            planted_z = z,
            alternative_y = y_alt,
            alternative_z = z_alt,
            l0_pair = (l0_norm(y), l0_norm(y_alt)),
            l1_pair = (float(np.sum(np.abs(y))), float(np.sum(np.abs(y_alt)))),
            w_residual = w_residual,
            planted_residual = planted_residual,
            alternative_residual = alternative_residual,
            both_feasible = planted_residual <= 1e-10 and alternative_residual <= 1e-10
        )
        logger.info('counterexample m = %d: l0 %s, l1 %s', m, report.l0_pair, report.l1_pair)
        return report

    def injectivity_check(self, A, B, s, t):
        """
        [A B] 의 S_{s,t} 위 단사성 검사

        Full column rank is inherited by column subsets, so only the maximal
        subsets (min(p, 2s) columns of A and min(q, 2t) columns of B) are
        enumerated; a smaller subset fails only if some maximal one does.

        returns :
            InjectivityReport with the smallest singular value over all subsets
            and the first rank-deficient (A columns, B columns) pair, 1-based
        """
        if A.rows != B.rows:
            raise DimensionError(f'row mismatch: {A.rows} vs {B.rows}')
        if s < 0 or t < 0:
            raise DomainError('sparsity levels must be non-negative')
        p, q, m = A.cols, B.cols, A.rows
        if max(p, q) > self.injectivity_max_columns:
            raise EnumerationLimitError(f'injectivity enumeration is limited to {self.injectivity_max_columns} columns per dictionary')

        k_a, k_b = min(p, 2 * s), min(q, 2 * t)
        if k_a + k_b > m:
            witness = (list(range(1, k_a + 1)), list(range(1, k_b + 1)))
            return InjectivityReport(False, 0.0, witness, 0)
        if k_a + k_b == 0:
            return InjectivityReport(True, math.inf, None, 0)

        min_sv, witness, checked = math.inf, None, 0
        for cols_a in itertools.combinations(range(p), k_a):
            for cols_b in itertools.combinations(range(q), k_b):
                checked += 1
                block = np.hstack([A.matrix[:, list(cols_a)], B.matrix[:, list(cols_b)]])
                sv = float(linalg.singular_values(block)[-1])
                if sv < min_sv:
                    min_sv = sv
                if witness is None and sv <= self.injectivity_sv_tolerance:
                    witness = ([i + 1 for i in cols_a], [j + 1 for j in cols_b])

        return InjectivityReport(witness is None, min_sv, witness, checked)

    def com_bound(self, p, m, r, u_norm, delta):
        """ C(p, m, r) delta^{2m} / ||u||^{2m} with C = (p / r^2)^m """
        return (p / r ** 2) ** m * (delta / u_norm) ** (2 * m)

    def com_bound_mc(self, p, m, r, u, v, delta, trials, seed):
        """
        P[||A u + v||_2 < delta] 의 Monte Carlo 추정
            rows of A independent and uniform on the radius-r ball of C^p

        args :
            p, m   : A is m x p
            r      : ball radius
            u      : nonzero vector of C^p
            v      : vector of C^m
            delta  : event radius
            trials : number of samples
            seed   : root seed; block b draws from named_rng(seed, 'com-mc', b)

        returns :
            MonteCarloEstimate
        """
        u, v = complex_vector(u), complex_vector(v)
        if u.size != p or v.size != m:
            raise DimensionError(f'u must lie in C^{p} and v in C^{m}')
        u_norm = float(np.linalg.norm(u))
        if u_norm == 0:
            raise DomainError('u must be nonzero')
        if r <= 0 or delta <= 0:
            raise DomainError('r and delta must be positive')
        if trials < 1:
            raise DomainError('trials must be >= 1')

        hits, done, block = 0, 0, 0
        while done < trials:
            size = min(MC_BLOCK, trials - done)
            rng = named_rng(seed, 'com-mc', block)
            A = sample_complex_ball(p, r, size * m, rng).reshape(size, m, p)
            hits += int(np.count_nonzero(np.linalg.norm(A @ u + v, axis = 1) < delta))
            done += size
            block += 1

        empirical = hits / trials
        sigma = math.sqrt(empirical * (1 - empirical) / trials)
        estimate = MonteCarloEstimate(empirical, self.com_bound(p, m, r, u_norm, delta), sigma, trials, hits)
        if not estimate.within_bound:
            logger.warning('concentration bound exceeded: %.6f > %.6f', empirical, estimate.bound)
        return estimate

    def window_mass(self, mu, delta):
        """ sup_r mu((r, r + delta)) on the 1-periodic extension """
        if mu.locations.size == 0:
            return 0.0
        order = np.argsort(mu.locations, kind = 'stable')
        locations, weights = mu.locations[order], mu.weights[order]
        extended = np.concatenate([locations, locations + 1.0])
        cumulative = np.concatenate([[0.0], np.cumsum(np.concatenate([weights, weights]))])
        start = np.searchsorted(extended, locations, side = 'left')
        stop = np.searchsorted(extended, locations + delta, side = 'left')
        return float(np.max(cumulative[stop] - cumulative[start]))

    def sieve_empirical(self, mu, psi, delta):
        """
        large sieve 부등식 검사
            sum_atoms w |psi(s)|^2 <= (n - 1 + 1/delta) sup_r mu((r, r + delta)) ||a||_2^2

        returns :
            (lhs, rhs)
        """
        if not 0 < delta <= 1:
            raise DomainError(f'delta must lie in (0, 1], got {delta}')
        lhs = float(np.sum(mu.weights * np.abs(psi(mu.locations)) ** 2))
        energy = float(np.sum(np.abs(psi.coefficients) ** 2))
        rhs = (psi.degree - 1 + 1.0 / delta) * self.window_mass(mu, delta) * energy
        if lhs > rhs + 1e-9:
            logger.warning('large sieve violated: %.12f > %.12f', lhs, rhs)
        return lhs, rhs

    def random_sieve_case(self, rng):
        atoms = int(rng.integers(1, 21))
        mu = DiscreteMeasure(rng.random(atoms), rng.uniform(0.1, 2.0, atoms))
        psi = TrigPolynomial(complex_normal(rng, int(rng.integers(1, 11))), float(rng.random()))
        return mu, psi, 1.0 - float(rng.random())

    def covering_radii(self, points, rho_min):
        """
        farthest-point greedy on the rows of points

        radii[k] is the covering radius after k + 1 greedy centres; the run
        stops once it drops to rho_min.
        """
        distance = np.linalg.norm(points - points[0], axis = 1)
        radii = []
        while True:
            farthest = int(np.argmax(distance))
            radii.append(float(distance[farthest]))
            if radii[-1] <= rho_min:
                return np.array(radii)
            distance = np.minimum(distance, np.linalg.norm(points - points[farthest], axis = 1))

    def box_counting_dim(self, cloud, rho_grid):
        """
        box-counting (Minkowski) 차원 추정
            N(rho) from the greedy covering, estimate = least-squares slope of
            log N against log(1/rho). Points of C^d count as R^{2d}.

        returns :
            (estimate, counts)
        """
        rho = np.asarray(rho_grid, dtype = float).reshape(-1)
        if rho.size < 2 or np.any(rho <= 0) or np.any(np.diff(rho) >= 0):
            raise DomainError('rho grid needs at least two positive, strictly decreasing radii')

        points = np.unique(cloud.as_real(), axis = 0)
        if points.shape[0] < 2:
            return 0.0, [1] * rho.size

        radii = self.covering_radii(points, rho[-1])
        counts = [int(np.argmax(radii <= r)) + 1 for r in rho]
        estimate = float(np.polyfit(np.log(1.0 / rho), np.log(counts), 1)[0])
        logger.info('box-counting estimate %.3f from counts %s', estimate, counts)
        return estimate, counts

    def clip(self, s, a):
        """ g_a: clip the modulus at a, keep the phase """
        modulus = np.abs(s)
        return np.where(modulus > a, a * s / np.where(modulus > 0, modulus, 1.0), s)

    def make_clipping_scenario(self, y, A, a, known_locations = False):
        """
        클리핑 시나리오 w = g_a(A y) = A y + z

        args :
            y               : coefficients in the dictionary A
            A               : Dictionary
            a               : clip level > 0
            known_locations : keep only the identity columns at clipped entries

        returns :
            SeparationProblem with planted y and z
        """
        if a <= 0:
            raise DomainError(f'clip level must be positive, got {a}')
        y = complex_vector(y)
        if y.size != A.cols:
            raise DimensionError(f'y has length {y.size}, A has {A.cols} columns')
        s = A.matrix @ y
        w = self.clip(s, a)
        z = w - s
        m = A.rows

        if known_locations:
            clipped = IndexSet.from_mask(np.abs(s) > a)
            B = linalg.identity_columns(clipped)
            z = z[list(clipped.members)]
        else:
            B = linalg.identity_columns(IndexSet.full(m))
        logger.info('clipping scenario: %d of %d entries clipped at %.6g', l0_norm(w - s), m, a)
        return SeparationProblem(A, B, w, sparsity_s = l0_norm(y), planted_y = y, planted_z = z)

    def make_inpainting_scenario(self, y, A, missing):
        """ missing entries zeroed: B = I restricted to missing, z = -s_missing """
        y = complex_vector(y)
        if y.size != A.cols:
            raise DimensionError(f'y has length {y.size}, A has {A.cols} columns')
        linalg.check_index_set(missing, A.rows, 'missing')
        s = A.matrix @ y
        rows = list(missing.members)
        w = s.copy()
        w[rows] = 0
        return SeparationProblem(A, linalg.identity_columns(missing), w, sparsity_s = l0_norm(y),
                                 planted_y = y, planted_z = -s[rows])

    def _run_counterexample(self, config):
        m = int(config.params.get('m', 16))
        report = self.counterexample(m)
        solution = self.recovery_service.separate_p1(self.counterexample_problem(m),
                                                     alternative = report.alternative_y)
        metrics = {
            'report': to_document(report),
            'p1_objective': solution.objective,
            'p1_status': solution.solver_status,
            'near_degenerate': solution.near_degenerate,
            'threshold': solution.threshold
        }
        checks = {
            'both_feasible': report.both_feasible,
            'equal_l0': report.l0_pair[0] == report.l0_pair[1],
            'equal_l1': abs(report.l1_pair[0] - report.l1_pair[1]) <= 1e-9,
            'w_closed_form': report.w_residual <= 1e-10,
            'p1_objective': abs(solution.objective - report.l1_pair[0]) <= 1e-6,
            'threshold_fails': not solution.threshold['holds']
        }
        return metrics, checks

    def _run_injectivity(self, config):
        params = config.params
        m, p, q = int(params.get('m', 6)), int(params.get('p', 8)), int(params.get('q', 2))
        s, t = int(params.get('s', 1)), int(params.get('t', 1))
        trials = int(params.get('trials', 100))

        injective, min_sv = 0, math.inf
        for trial in range(trials):
            rng = named_rng(config.seed, 'injectivity', trial)
            report = self.injectivity_check(random_dictionary(rng, m, p), random_dictionary(rng, m, q), s, t)
            injective += int(report.injective)
            min_sv = min(min_sv, report.min_sv)

        budget = min(p, 2 * s) + min(q, 2 * t)
        metrics = {'budget': budget, 'injective': injective, 'trials': trials, 'min_sv': min_sv}
        checks = {}
        if budget < m:
            checks['injective_below_budget'] = injective == trials
        elif budget > m:
            checks['not_injective_above_budget'] = injective == 0
        return metrics, checks

    def _run_com_mc(self, config):
        params = config.params
        p, m = int(params.get('p', 1)), int(params.get('m', 1))
        r, delta = float(params.get('r', 1.0)), float(params.get('delta', 0.3))
        trials = int(params.get('trials', 100000))
        rng = named_rng(config.seed, 'com-mc-vectors')
        u = complex_vector(params['u']) if 'u' in params else complex_normal(rng, p)
        v = complex_vector(params['v']) if 'v' in params else np.zeros(m, dtype = np.complex128)
        estimate = self.com_bound_mc(p, m, r, u, v, delta, trials, config.seed)
        return to_document(estimate), {'within_bound': estimate.within_bound}

    def _run_sieve(self, config):
        cases = int(config.params.get('cases', 1000))
        violations, worst = 0, 0.0
        for case in range(cases):
            lhs, rhs = self.sieve_empirical(*self.random_sieve_case(named_rng(config.seed, 'sieve', case)))
            violations += int(lhs > rhs + 1e-9)
            worst = max(worst, lhs / rhs if rhs > 0 else 0.0)
        return {'cases': cases, 'violations': violations, 'max_ratio': worst}, {'no_violations': violations == 0}

    def _run_boxdim(self, config):
        samples = int(config.params.get('samples', 10000))
        grid = config.params.get('rho_grid') or list(np.geomspace(0.25, 0.04, 6))
        segment, segment_counts = self.box_counting_dim(sample_segment(samples, named_rng(config.seed, 'segment')), grid)
        disk, disk_counts = self.box_counting_dim(sample_disk(samples, named_rng(config.seed, 'disk')), grid)
        metrics = {
            'rho_grid': [float(r) for r in grid],
            'segment': {'estimate': segment, 'counts': segment_counts},
            'disk': {'estimate': disk, 'counts': disk_counts}
        }
        return metrics, {'segment_dimension': abs(segment - 1) <= 0.3, 'disk_dimension': abs(disk - 2) <= 0.3}

    def run_experiment(self, config):
        """ ExperimentConfig 실행 """
        runners = {
            'counterexample': self._run_counterexample,
            'injectivity': self._run_injectivity,
            'com-mc': self._run_com_mc,
            'sieve': self._run_sieve,
            'boxdim': self._run_boxdim
        }
        if config.name not in runners:
            raise DomainError(f'unknown experiment {config.name!r}, expected one of {sorted(runners)}')

        started = time.perf_counter()
        metrics, checks = runners[config.name](config)
        report = ExperimentReport(config.name, to_document(config), metrics,
                                  {key: bool(value) for key, value in checks.items()},
                                  time.perf_counter() - started)
        logger.info('experiment %s %s', config.name, 'passed' if report.passed else 'failed')
        return report
