import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import scipy.linalg

import linalg
from custom_error import DomainError
from model.entities import Dictionary, DiscreteMeasure, IndexSet, SeparationProblem, TrigPolynomial
from service.experiment_service import (
    random_dictionary,
    random_sparse_vector,
    sample_disk,
    sample_segment
)
from utils import complex_normal, named_rng

logger = logging.getLogger(__name__)


def divisors(m):
    return [n for n in range(1, m + 1) if m % n == 0]


def random_subset(rng, m, size = None):
    size = int(rng.integers(1, m + 1)) if size is None else size
    return IndexSet(m, sorted(int(i) for i in rng.choice(m, size = size, replace = False)))


def random_unitary(rng, m):
    """ Haar-distributed unitary from the QR factorisation of a complex Gaussian """
    Q, R = scipy.linalg.qr(complex_normal(rng, (m, m)))
    phases = np.diag(R) / np.abs(np.diag(R))
    return Q * phases


class VerifyService:
    """
    불변식 검증 스위트

    Every suite is a method returning a mapping with a boolean 'passed' and
    the measurements behind it; suites draw randomness only from
    named_rng(seed, suite name, ...), so they may run on any thread.
    """

    SUITES = {
        'boxdim': 'verify_boxdim',
        'coherence-values': 'verify_coherence_values',
        'com-mc': 'verify_com_mc',
        'comb-identity': 'verify_comb_identity',
        'counterexample': 'verify_counterexample',
        'dft-sandwich': 'verify_dft_sandwich',
        'injectivity': 'verify_injectivity',
        'logan': 'verify_logan',
        'monotonicity': 'verify_monotonicity',
        'opnorm-oracles': 'verify_opnorm_oracles',
        'picket-exactness': 'verify_picket_exactness',
        'projector': 'verify_projector',
        'separation-threshold': 'verify_separation_threshold',
        'sieve-empirical': 'verify_sieve_empirical',
        'sieve-tightness': 'verify_sieve_tightness',
        'stable-recovery': 'verify_stable_recovery'
    }

    def __init__(self, uncertainty_service, recovery_service, experiment_service, workers = 1):
        self.uncertainty_service = uncertainty_service
        self.recovery_service = recovery_service
        self.experiment_service = experiment_service
        self.workers = workers

    def select(self, suite):
        """ 'all', a single suite name or a comma-separated list """
        if suite in (None, '', 'all'):
            return sorted(self.SUITES)
        names = sorted({name.strip() for name in suite.split(',') if name.strip()})
        unknown = [name for name in names if name not in self.SUITES]
        if unknown:
            raise DomainError(f'unknown suite(s) {unknown}, expected one of {sorted(self.SUITES)}')
        return names

    def run_suite(self, name, seed):
        result = getattr(self, self.SUITES[name])(seed)
        logger.info('suite %s %s', name, 'passed' if result['passed'] else 'FAILED')
        return result

    def run(self, suite = 'all', seed = 0, workers = None):
        """
        선택된 스위트 실행

        returns :
            {'seed', 'passed', 'suites': {name: result}} with suites keyed in
            sorted order regardless of completion order
        """
        names = self.select(suite)
        workers = max(1, int(workers or self.workers))
        with ThreadPoolExecutor(max_workers = workers) as executor:
            results = list(executor.map(lambda name: self.run_suite(name, seed), names))
        suites = dict(zip(names, results))
        return {
            'seed': seed,
            'passed': all(result['passed'] for result in results),
            'suites': suites
        }

    def verify_picket_exactness(self, seed):
        worst, cases = 0.0, 0
        for m in (8, 16, 32, 64):
            F = linalg.dft_matrix(m)
            for n in divisors(m):
                P = IndexSet.picket_fence(m, n)
                for shift in range(m):
                    delta = self.uncertainty_service.delta(F, P, IndexSet.interval(m, shift, n))
                    worst = max(worst, abs(delta - math.sqrt(n / m)))
                    cases += 1
        return {'passed': worst <= 1e-9, 'cases': cases, 'max_error': worst}

    def verify_dft_sandwich(self, seed):
        violations, cases = 0, 0
        for m in (8, 16, 32):
            F = linalg.dft_matrix(m)
            for trial in range(200):
                rng = named_rng(seed, 'dft-sandwich', m, trial)
                P, Q = random_subset(rng, m), random_subset(rng, m)
                delta = self.uncertainty_service.delta(F, P, Q)
                lower = math.sqrt(max(len(P), len(Q)) / m)
                upper = math.sqrt(len(P) * len(Q) / m)
                frobenius_lower, frobenius_upper = self.uncertainty_service.frobenius_bounds(F, P, Q)
                ok = (lower - 1e-9 <= delta <= upper + 1e-9
                      and frobenius_lower - 1e-9 <= delta <= frobenius_upper + 1e-9)
                violations += int(not ok)
                cases += 1
        return {'passed': violations == 0, 'cases': cases, 'violations': violations}

    def verify_sieve_tightness(self, seed):
        ratios = []
        for m in (16, 64, 256):
            F = linalg.dft_matrix(m)
            for n in divisors(m):
                P = IndexSet.picket_fence(m, n)
                delta = self.uncertainty_service.delta(F, P, IndexSet.interval(m, 0, n))
                bound, _ = self.uncertainty_service.sieve_bound(m, P, n)
                ratios.append(bound / delta)

        reference, _ = self.uncertainty_service.sieve_bound(16, IndexSet.picket_fence(16, 4), 4)
        reference_error = abs(reference - math.sqrt(7 / 16))

        # dominance on arbitrary P against circular intervals
        m, dominated = 32, 0
        F = linalg.dft_matrix(m)
        for trial in range(100):
            rng = named_rng(seed, 'sieve-tightness', trial)
            P = random_subset(rng, m)
            n = int(rng.integers(1, m + 1))
            Q = IndexSet.interval(m, int(rng.integers(0, m)), n)
            dominated += int(self.uncertainty_service.sieve_bound(m, P, n)[0] >= self.uncertainty_service.delta(F, P, Q) - 1e-9)

        passed = (min(ratios) >= 1 - 1e-9 and max(ratios) <= math.sqrt(2) + 1e-6
                  and reference_error <= 1e-12 and dominated == 100)
        return {
            'passed': passed,
            'min_ratio': min(ratios),
            'max_ratio': max(ratios),
            'reference_error': reference_error,
            'dominated': dominated
        }

    def verify_coherence_values(self, seed):
        worst = 0.0
        for m in list(range(1, 17)) + [31, 64, 100, 128, 256]:
            mu = linalg.coherence(linalg.concat(Dictionary(np.eye(m)), Dictionary(linalg.dft_matrix(m))))
            worst = max(worst, abs(mu - 1 / math.sqrt(m)))

        sigma_ok = True
        for m in range(2, 65, 2):
            F = linalg.dft_matrix(m)
            P, Q = IndexSet.from_one_based(m, [m]), IndexSet.interval(m, 0, m // 2)
            bound = self.uncertainty_service.coherence_bound_1(F, P, Q)
            sigma = self.uncertainty_service.sigma(F, P, Q)
            sigma_ok = sigma_ok and abs(bound - 0.5) <= 1e-12 and sigma <= 0.5 + 1e-12

        dominated = 0
        for trial in range(100):
            rng = named_rng(seed, 'coherence-values', trial)
            m = int(rng.integers(2, 17))
            U = random_unitary(rng, m)
            P, Q = random_subset(rng, m), random_subset(rng, m)
            dominated += int(self.uncertainty_service.coherence_bound_2(U, P, Q) >= self.uncertainty_service.delta(U, P, Q) - 1e-9
                             and self.uncertainty_service.coherence_bound_1(U, P, Q) >= self.uncertainty_service.sigma(U, P, Q) - 1e-9)

        return {
            'passed': worst <= 1e-12 and sigma_ok and dominated == 100,
            'max_coherence_error': worst,
            'halfband_sigma': sigma_ok,
            'dominated': dominated
        }

    def verify_stable_recovery(self, seed):
        m, n = 16, 4
        F = linalg.dft_matrix(m)
        P, Q = IndexSet.picket_fence(m, n), IndexSet.interval(m, 0, n)
        basis = F[:, list(Q.members)]

        rng = named_rng(seed, 'stable-recovery')
        p = basis @ complex_normal(rng, n)
        p_hat, constant = self.recovery_service.stable_linear_recovery(F, Q, P, linalg.restrict(p, P.complement()))
        noiseless_error = float(np.linalg.norm(p_hat - p))

        violations, worst = 0, 0.0
        for trial in range(200):
            rng = named_rng(seed, 'stable-recovery', trial)
            p = basis @ complex_normal(rng, n)
            noise = 0.1 * complex_normal(rng, m)
            y_obs = linalg.restrict(p, P.complement()) + noise
            p_hat, _ = self.recovery_service.stable_linear_recovery(F, Q, P, y_obs)
            error = float(np.linalg.norm(p_hat - p))
            allowed = constant * float(np.linalg.norm(linalg.restrict(noise, P.complement())))
            violations += int(error > allowed + 1e-8)
            worst = max(worst, error / allowed if allowed else 0.0)

        return {
            'passed': noiseless_error <= 1e-8 and abs(constant - 2) <= 1e-9 and violations == 0,
            'constant': constant,
            'noiseless_error': noiseless_error,
            'violations': violations,
            'max_error_ratio': worst
        }

    def _logan_instance(self, seed, trial, m = 32, q_size = 3, p_size = 5):
        rng = named_rng(seed, 'logan', trial)
        F = linalg.dft_matrix(m)
        Q = IndexSet.interval(m, int(rng.integers(0, m)), q_size)
        P = random_subset(rng, m, p_size)
        p = F[:, list(Q.members)] @ complex_normal(rng, q_size)
        noise = linalg.restrict(complex_normal(rng, m), P)
        return F, P, Q, p, p + noise

    def verify_logan(self, seed):
        exact, worst, sigma_max = 0, 0.0, 0.0
        trials = 100
        for trial in range(trials):
            F, P, Q, p, y = self._logan_instance(seed, trial)
            sigma_max = max(sigma_max, self.uncertainty_service.sigma(F, P, Q))
            w = self.recovery_service.l1_subspace_denoise(F, Q, y).x
            error = float(np.linalg.norm(w - p))
            exact += int(error <= 1e-6)
            worst = max(worst, error)

        # same instance through basis pursuit: min ||r||_1 s.t. U_{Q^c}^H r = U_{Q^c}^H y
        F, P, Q, p, y = self._logan_instance(seed, trials)
        orthogonal = F[:, list(Q.complement().members)].conj().T
        r = self.recovery_service.basis_pursuit(orthogonal, orthogonal @ y).x
        denoised = self.recovery_service.l1_subspace_denoise(F, Q, y).x
        cross_error = float(np.linalg.norm((y - r) - denoised))

        return {
            'passed': exact == trials and sigma_max < 0.5 and cross_error <= 1e-6,
            'exact': exact,
            'trials': trials,
            'max_error': worst,
            'max_sigma': sigma_max,
            'cross_check_error': cross_error
        }

    def verify_counterexample(self, seed):
        checks = {}
        for m in (16, 36):
            report = self.experiment_service.counterexample(m)
            checks[f'm{m}'] = bool(report.both_feasible and report.w_residual <= 1e-10
                                   and report.l0_pair[0] == report.l0_pair[1]
                                   and abs(report.l1_pair[0] - report.l1_pair[1]) <= 1e-9)

        problem = self.experiment_service.counterexample_problem(16)
        p1 = self.recovery_service.separate_p1(problem)
        p0 = self.recovery_service.separate_p0(problem, max_support = 2)
        checks['p1_objective'] = abs(p1.objective - 2) <= 1e-6
        checks['p0_support_size'] = p0.solver_status == 'converged' and len(p0.support) == 2
        checks['threshold_fails'] = p1.threshold is not None and not p1.threshold['holds']
        return {'passed': all(checks.values()), 'checks': checks, 'p1_objective': p1.objective}

    def verify_separation_threshold(self, seed):
        m, n = 16, 4
        A = Dictionary(linalg.dft_matrix(m))
        B = linalg.identity_columns(IndexSet.picket_fence(m, n))
        holds_1 = self.recovery_service.separation_threshold(A, B, 1)[0]
        holds_2 = self.recovery_service.separation_threshold(A, B, 2)[0]

        p0_ok, p1_ok, p1_worst = 0, 0, 0.0
        trials = 50
        for trial in range(trials):
            rng = named_rng(seed, 'separation-threshold', trial)
            y = random_sparse_vector(m, 1, rng)
            z = complex_normal(rng, n)
            problem = SeparationProblem(A, B, A.matrix @ y + B.matrix @ z, sparsity_s = 1, planted_y = y, planted_z = z)
            p0 = self.recovery_service.separate_p0(problem, max_support = 1)
            p1 = self.recovery_service.separate_p1(problem)
            p0_ok += int(np.linalg.norm(p0.y - y) <= 1e-6)
            error = float(np.linalg.norm(p1.y - y))
            p1_ok += int(error <= 1e-5)
            p1_worst = max(p1_worst, error)

        return {
            'passed': holds_1 and not holds_2 and p0_ok == trials and p1_ok == trials,
            'threshold_s1': bool(holds_1),
            'threshold_s2': bool(holds_2),
            'p0_recovered': p0_ok,
            'p1_recovered': p1_ok,
            'p1_max_error': p1_worst
        }

    def verify_injectivity(self, seed):
        injective, min_sv, nested = 0, math.inf, True
        trials = 100
        for trial in range(trials):
            rng = named_rng(seed, 'injectivity', trial)
            A, B = random_dictionary(rng, 6, 8), random_dictionary(rng, 6, 2)
            report = self.experiment_service.injectivity_check(A, B, 1, 1)
            injective += int(report.injective and report.min_sv > 1e-8)
            min_sv = min(min_sv, report.min_sv)
            if report.injective:
                nested = nested and all(self.experiment_service.injectivity_check(A, B, s, t).injective
                                        for s, t in ((0, 1), (1, 0), (0, 0)))

        converse = self.experiment_service.injectivity_check(
            Dictionary(np.eye(2)), linalg.identity_columns(IndexSet.from_one_based(2, [1])), 2, 1)
        return {
            'passed': injective == trials and nested and not converse.injective and converse.witness is not None,
            'injective': injective,
            'trials': trials,
            'min_sv': min_sv,
            'nested': nested,
            'converse_witness': converse.witness
        }

    def verify_com_mc(self, seed):
        disk = self.experiment_service.com_bound_mc(1, 1, 1.0, [1.0], [0.0], 0.3, 100000, seed)
        exact_sigma = math.sqrt(0.09 * 0.91 / disk.trials)
        disk_ok = abs(disk.empirical - 0.09) <= 3 * exact_sigma and disk.within_bound

        others = {}
        for p, m, delta in ((2, 2, 0.1), (2, 1, 0.2)):
            rng = named_rng(seed, 'com-mc-vectors', p, m)
            estimate = self.experiment_service.com_bound_mc(
                p, m, 1.0, complex_normal(rng, p), 0.1 * complex_normal(rng, m), delta, 100000, seed)
            others[f'p{p}_m{m}'] = {'empirical': estimate.empirical, 'bound': estimate.bound, 'within_bound': estimate.within_bound}

        return {
            'passed': disk_ok and all(item['within_bound'] for item in others.values()),
            'disk': {'empirical': disk.empirical, 'bound': disk.bound, 'sigma': disk.sigma},
            'others': others
        }

    def verify_sieve_empirical(self, seed):
        violations = 0
        cases = 1000
        for case in range(cases):
            lhs, rhs = self.experiment_service.sieve_empirical(
                *self.experiment_service.random_sieve_case(named_rng(seed, 'sieve-empirical', case)))
            violations += int(lhs > rhs + 1e-9)

        # atoms at p/m reproduce m ||x_P||^2 for x = F_Q a, Q a circular interval
        m, n = 16, 4
        rng = named_rng(seed, 'sieve-empirical-picket')
        F = linalg.dft_matrix(m)
        P = IndexSet.picket_fence(m, n)
        shift = int(rng.integers(0, m))
        a = complex_normal(rng, n)
        x = sum(a[i] * F[:, (shift + i) % m] for i in range(n))
        lhs, rhs = self.experiment_service.sieve_empirical(DiscreteMeasure.from_index_set(P), TrigPolynomial(a), 1.0 / n)
        direct = m * float(np.sum(np.abs(linalg.restrict(x, P)) ** 2))
        picket_error = abs(lhs - direct)

        return {
            'passed': violations == 0 and picket_error <= 1e-9 * max(1.0, direct) and lhs <= rhs + 1e-9,
            'cases': cases,
            'violations': violations,
            'picket_error': picket_error
        }

    def verify_boxdim(self, seed):
        grid = list(np.geomspace(0.25, 0.04, 6))
        segment, _ = self.experiment_service.box_counting_dim(sample_segment(10000, named_rng(seed, 'boxdim-segment')), grid)
        disk, _ = self.experiment_service.box_counting_dim(sample_disk(10000, named_rng(seed, 'boxdim-disk')), grid)
        return {'passed': abs(segment - 1) <= 0.3 and abs(disk - 2) <= 0.3, 'segment': segment, 'disk': disk}

    def verify_opnorm_oracles(self, seed):
        failures = {'op_norm_2': 0, 'op_norm_1': 0, 'sandwich_2': 0, 'sandwich_1': 0, 'unitary_invariance': 0}
        cases = 500
        for case in range(cases):
            rng = named_rng(seed, 'opnorm-oracles', case)
            rows, cols = int(rng.integers(1, 9)), int(rng.integers(1, 9))
            A = complex_normal(rng, (rows, cols))

            norm_2 = linalg.op_norm_2(A)
            oracle = float(np.linalg.norm(A, 2))
            failures['op_norm_2'] += int(abs(norm_2 - oracle) > 1e-8 * oracle)
            failures['op_norm_1'] += int(linalg.op_norm_1(A) != float(np.max(np.sum(np.abs(A), axis = 0))))

            frobenius, entrywise = linalg.matrix_norms(A)
            rank = linalg.numerical_rank(A)
            failures['sandwich_2'] += int(not frobenius / math.sqrt(rank) - 1e-12 <= norm_2 <= frobenius + 1e-12)
            failures['sandwich_1'] += int(not entrywise / cols - 1e-12 <= linalg.op_norm_1(A) <= entrywise + 1e-12)

            U = random_unitary(rng, rows)
            failures['unitary_invariance'] += int(abs(linalg.op_norm_2(U @ A) - norm_2) > 1e-10 * max(1.0, norm_2))

        return {'passed': not any(failures.values()), 'cases': cases, 'failures': failures}

    def verify_comb_identity(self, seed):
        worst, cases = 0.0, 0
        for m in range(1, 257):
            for a in divisors(m):
                worst = max(worst, self.experiment_service.comb_identity_defect(m, a))
                cases += 1
        return {'passed': worst <= 1e-9, 'cases': cases, 'max_defect': worst}

    def verify_projector(self, seed):
        worst = {'idempotence': 0.0, 'hermitian': 0.0, 'trace': 0.0}
        for trial in range(50):
            rng = named_rng(seed, 'projector', trial)
            m = int(rng.integers(1, 17))
            Q = random_subset(rng, m)
            projection = linalg.projector(random_unitary(rng, m), Q)
            worst['idempotence'] = max(worst['idempotence'], float(np.linalg.norm(projection @ projection - projection)))
            worst['hermitian'] = max(worst['hermitian'], float(np.linalg.norm(projection - projection.conj().T)))
            worst['trace'] = max(worst['trace'], abs(float(np.trace(projection).real) - len(Q)))
        return {'passed': max(worst.values()) <= 1e-10, 'max_defect': worst}

    def verify_monotonicity(self, seed):
        violations = 0
        trials = 50
        for trial in range(trials):
            rng = named_rng(seed, 'monotonicity', trial)
            m = int(rng.integers(2, 13))
            U = random_unitary(rng, m)
            P_big, Q_big = random_subset(rng, m), random_subset(rng, m)
            P = IndexSet(m, [i for i in P_big.members if rng.random() < 0.5])
            Q = IndexSet(m, [i for i in Q_big.members if rng.random() < 0.5])
            violations += int(self.uncertainty_service.delta(U, P, Q) > self.uncertainty_service.delta(U, P_big, Q_big) + 1e-10)
        return {'passed': violations == 0, 'trials': trials, 'violations': violations}
