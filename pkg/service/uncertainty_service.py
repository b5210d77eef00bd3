import logging
import math

import numpy as np

import linalg
from custom_error import DomainError, VacuousBoundError
from model.entities import (
    ConcentrationReport,
    PairBoundReport,
    UncertaintyReport
)

logger = logging.getLogger(__name__)

# below this the mutual coherence is treated as zero
MUTUAL_COHERENCE_FLOOR = 1e-14


def positive_part(x):
    return max(x, 0.0)


class UncertaintyService:
    def __init__(self, matrix_dao, unitary_tolerance = 1e-10, dft_tolerance = 1e-10):
        self.matrix_dao = matrix_dao
        self.unitary_tolerance = unitary_tolerance
        self.dft_tolerance = dft_tolerance

    def load_unitary(self, path = None, dft = None):
        """
        유니터리 행렬 로드
            Either the m x m DFT matrix (dft = m) or a matrix file, checked for unitarity.

        args :
            path : CSV or JSON matrix file
            dft  : size of the DFT matrix to build instead

        returns :
            complex128 ndarray
        """
        if dft is not None:
            return linalg.dft_matrix(dft)
        if path is None:
            raise DomainError('either a matrix file or a DFT size is required')
        return linalg.check_unitary(self.matrix_dao.read_matrix(path), self.unitary_tolerance)

    def _prepare(self, U, P, Q):
        U = linalg.check_unitary(U, self.unitary_tolerance)
        m = U.shape[0]
        linalg.check_index_set(P, m, 'P')
        linalg.check_index_set(Q, m, 'Q')
        return U, list(P.members), list(Q.members)

    def delta(self, U, P, Q):
        """ Delta_{P,Q}(U) = |||D_P P_Q(U)|||_2 = |||D_P U D_Q|||_2 """
        U, rows, cols = self._prepare(U, P, Q)
        if not rows or not cols:
            return 0.0
        return min(linalg.op_norm_2(U[np.ix_(rows, cols)]), 1.0)

    def sigma(self, U, P, Q):
        """
        Sigma_{P,Q}(U) = |||D_P P_Q(U)|||_1
            maximum over j of ||D_P U D_Q u~_j||_1, with u~_j the j-th column of U^H
        """
        U, rows, cols = self._prepare(U, P, Q)
        if not rows or not cols:
            return 0.0
        block = U[np.ix_(rows, cols)] @ U[:, cols].conj().T
        return linalg.op_norm_1(block)

    def frobenius_bounds(self, U, P, Q):
        """
        Frobenius 기반 Delta 상하한
            sqrt(tr(D_P P_Q(U)) / min{|P|, |Q|}) <= Delta <= sqrt(tr(D_P P_Q(U)))

        returns :
            (lower, upper), (0, 0) when P or Q is empty
        """
        U, rows, cols = self._prepare(U, P, Q)
        if not rows or not cols:
            return 0.0, 0.0
        trace = float(np.sum(np.abs(U[np.ix_(rows, cols)]) ** 2))
        return math.sqrt(trace / min(len(rows), len(cols))), math.sqrt(trace)

    def sigma_bounds(self, U, P, Q):
        """ (1/m) ||D_P P_Q(U)||_1 <= Sigma <= ||D_P P_Q(U)||_1, entrywise 1-norm """
        U, rows, cols = self._prepare(U, P, Q)
        if not rows or not cols:
            return 0.0, 0.0
        entrywise = linalg.matrix_norms(U[np.ix_(rows, cols)] @ U[:, cols].conj().T)[1]
        return entrywise / U.shape[0], entrywise

    def halfband_entrywise_l1(self, m):
        """ ||D_{m} P_{1..m/2}(F)||_1 in closed form, m even """
        if m < 2 or m % 2:
            raise DomainError(f'm must be even, got {m}')
        l = np.arange(1, m // 2 + 1)
        return 0.5 + float(np.sum(1.0 / np.sin(np.pi * (2 * l - 1) / m))) / m

    def nyquist_density(self, P, lam):
        """
        circular Nyquist density rho(P, lambda)
            (1/lambda) max_r |P~ cap (r, r + lambda)| with P~ = P u (P + m).
            The supremum over open windows is attained as r approaches a member
            from below, so the count runs over the half-open window [p, p + lambda).

        args :
            P   : IndexSet over {1, ..., m}
            lam : window length in (0, m]

        returns :
            density, 0 for the empty set
        """
        m = P.universe_size
        if not 0 < lam <= m:
            raise DomainError(f'lambda must lie in (0, {m}], got {lam}')
        if not len(P):
            return 0.0
        points = np.array(P.one_based(), dtype = float)
        extended = np.concatenate([points, points + m])
        counts = np.searchsorted(extended, points + lam, side = 'left') - np.searchsorted(extended, points, side = 'left')
        return float(counts.max()) / lam

    def _sieve_value(self, m, P, n, lam):
        return math.sqrt((lam * (n - 1) / m + 1.0) * self.nyquist_density(P, lam))

    def sieve_lambda_grid(self, P):
        """ 후보 lambda 목록

        The bound equals count * ((n-1)/m + 1/lambda) on each interval between
        consecutive pairwise member distances of P~, so it is minimised at one
        of those distances or at lambda = m.
        """
        m = P.universe_size
        grid = {float(m)}
        if len(P):
            points = np.array(P.one_based(), dtype = float)
            extended = np.concatenate([points, points + m])
            differences = (extended[None, :] - points[:, None]).reshape(-1)
            grid.update(float(d) for d in differences if 0 < d <= m)
            grid.add(m / len(P))
        return sorted(grid)

    def sieve_bound(self, m, P, n, lam = None):
        """
        large sieve 기반 Delta 상한 (U = F, Q circular interval of length n)
            sqrt((lambda (n - 1) / m + 1) rho(P, lambda))

        args :
            m   : dimension
            P   : IndexSet over {1, ..., m}
            n   : length of the circular interval Q
            lam : window length; minimised over the candidate grid when omitted

        returns :
            (bound, lambda_used)
        """
        if P.universe_size != m:
            raise DomainError(f'P lives in 1..{P.universe_size}, expected 1..{m}')
        if not 1 <= n <= m:
            raise DomainError(f'interval length must lie in 1..{m}, got {n}')
        if lam is not None:
            return self._sieve_value(m, P, n, lam), float(lam)

        best_bound, best_lambda = math.inf, float(m)
        for candidate in self.sieve_lambda_grid(P):
            value = self._sieve_value(m, P, n, candidate)
            if value < best_bound:
                best_bound, best_lambda = value, candidate
        return best_bound, best_lambda

    def coherence_bound_2(self, U, P, Q):
        U, rows, cols = self._prepare(U, P, Q)
        return math.sqrt(len(rows) * len(cols)) * linalg.identity_coherence(U)

    def coherence_bound_1(self, U, P, Q):
        U, rows, cols = self._prepare(U, P, Q)
        return len(rows) * len(cols) * linalg.identity_coherence(U) ** 2

    def _mutual_coherence(self, A, B):
        mu_bar = linalg.mutual_coherence(A, B)
        if mu_bar < MUTUAL_COHERENCE_FLOOR:
            raise VacuousBoundError('mutual coherence is zero; the bound is infinite / vacuous')
        return mu_bar

    def f_ab(self, A, B, u, v):
        """ f_{A,B}(u, v) = [1 + mu(A)(1 - u)]_+ [1 + mu(B)(1 - v)]_+ / mu_bar^2(A, B) """
        mu_bar = self._mutual_coherence(A, B)
        mu_a, mu_b = linalg.coherence(A), linalg.coherence(B)
        return positive_part(1 + mu_a * (1 - u)) * positive_part(1 + mu_b * (1 - v)) / mu_bar ** 2

    def l1_budget_bound(self, A, B, P_size, Q_size, p_l1, q_l1):
        """
        A p = B q 일 때 ||p_P||_1, ||q_Q||_1 상한

        returns :
            (bound on ||p_P||_1, bound on ||q_Q||_1)
        """
        if min(P_size, Q_size, p_l1, q_l1) < 0:
            raise DomainError('set sizes and norms must be non-negative')
        mu_a, mu_b = linalg.coherence(A), linalg.coherence(B)
        mu_bar = linalg.mutual_coherence(A, B)
        bound_p = P_size * (mu_a * p_l1 + mu_bar * q_l1) / (1 + mu_a)
        bound_q = Q_size * (mu_b * q_l1 + mu_bar * p_l1) / (1 + mu_b)
        return bound_p, bound_q

    def pair_bounds(self, A, B, P, Q, eps_P, eps_Q):
        """
        1-norm 집중도 기반 계수 상한과 |P||Q| 하한

        args :
            A, B         : dictionaries with p and q columns
            P            : IndexSet over {1, ..., p}
            Q            : IndexSet over {1, ..., q}
            eps_P, eps_Q : concentration levels in [0, 1]

        returns :
            PairBoundReport; frame1 / frame2 are None when their clamped
            denominators vanish
        """
        for name, eps in (('eps_P', eps_P), ('eps_Q', eps_Q)):
            if not 0 <= eps <= 1:
                raise DomainError(f'{name} must lie in [0, 1], got {eps}')
        linalg.check_index_set(P, A.cols, 'P')
        linalg.check_index_set(Q, B.cols, 'Q')

        mu_bar = self._mutual_coherence(A, B)
        mu_a, mu_b = linalg.coherence(A), linalg.coherence(B)
        size_p, size_q = len(P), len(Q)

        den_p = (1 + mu_a) * (1 - eps_P) - mu_a * size_p
        den_q = (1 + mu_b) * (1 - eps_Q) - mu_b * size_q

        frame1 = None
        if den_q > 0:
            frame1 = size_p / (1 + mu_a) * (mu_a + mu_bar ** 2 * size_q / den_q)
        frame2 = None
        if den_p > 0:
            frame2 = size_q / (1 + mu_b) * (mu_b + mu_bar ** 2 * size_p / den_p)
        frame3 = positive_part(den_p) * positive_part(den_q) / mu_bar ** 2

        return PairBoundReport(
            f_value = self.f_ab(A, B, size_p, size_q),
            frame1_bound = frame1,
            frame2_bound = frame2,
            frame3_lower = frame3,
            admissible = size_p * size_q >= frame3 - 1e-12
        )

    def concentration_bounds(self, A, B, P_size, Q_size, eps_P, eps_Q):
        """
        두 정규직교 기저에 대한 동시 집중도 한계 (A, B unitary)

        returns :
            ConcentrationReport
        """
        for name, eps in (('eps_P', eps_P), ('eps_Q', eps_Q)):
            if not 0 <= eps <= 1:
                raise DomainError(f'{name} must lie in [0, 1], got {eps}')
        A = linalg.check_unitary(A, self.unitary_tolerance)
        B = linalg.check_unitary(B, self.unitary_tolerance)
        mu = linalg.identity_coherence(A.conj().T @ B)

        delta_lower = positive_part(1 - eps_P - eps_Q)
        l2_size_lower = delta_lower ** 2 / mu ** 2
        l1_size_lower = (1 - eps_P) / mu ** 2
        size = P_size * Q_size
        return ConcentrationReport(
            delta_lower = delta_lower,
            l2_size_lower = l2_size_lower,
            l1_size_lower = l1_size_lower,
            elad_bruckstein = 1 / mu ** 2,
            admissible_l2 = size >= l2_size_lower - 1e-12,
            admissible_l1 = size >= l1_size_lower - 1e-12
        )

    def recovery_conditions(self, U, P, Q):
        U, rows, cols = self._prepare(U, P, Q)
        mu = linalg.identity_coherence(U)
        size = len(rows) * len(cols)
        delta = self.delta(U, P, Q)
        sigma = self.sigma(U, P, Q)
        return {
            'stable_sufficient': size < 1 / mu ** 2,
            'logan_sufficient': size < 1 / (2 * mu ** 2),
            'delta': delta,
            'sigma': sigma,
            'stable_constant': 1 / (1 - delta) if delta < 1 - 1e-9 else None,
            'logan_constant': 2 / (1 - 2 * sigma) if sigma < 0.5 - 1e-12 else None
        }

    def bound_report(self, U, P, Q, lam = None):
        """
        Delta / Sigma 와 모든 상하한 집계

        DFT-specific fields are filled only when U is numerically the DFT
        matrix; the sieve fields additionally need Q to be a circular interval.

        returns :
            UncertaintyReport
        """
        U, rows, cols = self._prepare(U, P, Q)
        m = U.shape[0]
        frobenius_lower, frobenius_upper = self.frobenius_bounds(U, P, Q)
        sigma_lower, sigma_upper = self.sigma_bounds(U, P, Q)

        fields = {}
        if linalg.is_dft(U, self.dft_tolerance):
            fields['is_dft'] = True
            if rows and cols:
                fields['dft_lower'] = math.sqrt(max(len(rows), len(cols)) / m)
                fields['dft_upper'] = math.sqrt(len(rows) * len(cols) / m)
            else:
                fields['dft_lower'] = fields['dft_upper'] = 0.0
            interval = Q.circular_interval()
            if interval is not None:
                fields['sieve_bound'], fields['sieve_lambda'] = self.sieve_bound(m, P, interval[1], lam)

        report = UncertaintyReport(
            m = m,
            P = P.one_based(),
            Q = Q.one_based(),
            exact_delta = self.delta(U, P, Q),
            exact_sigma = self.sigma(U, P, Q),
            frobenius_lower = frobenius_lower,
            frobenius_upper = frobenius_upper,
            sigma_lower = sigma_lower,
            sigma_upper = sigma_upper,
            coherence = linalg.identity_coherence(U),
            coherence_bound_2 = self.coherence_bound_2(U, P, Q),
            coherence_bound_1 = self.coherence_bound_1(U, P, Q),
            **fields
        )
        logger.info('bound report m=%d |P|=%d |Q|=%d delta=%.6f', m, len(rows), len(cols), report.exact_delta)
        return report
