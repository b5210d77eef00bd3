import itertools
import logging

import numpy as np
import scipy.linalg

import linalg
from custom_error import (
    DimensionError,
    DomainError,
    EnumerationLimitError,
    NotRecoverableError,
    VacuousBoundError,
    ValidationError
)
from model.entities import SeparationSolution, SolverConfig, SolverResult, complex_vector

logger = logging.getLogger(__name__)

# separation counts as degenerate when a second feasible point is this close in l1
DEGENERACY_GAP = 1e-6


def soft_threshold(v, threshold):
    """ complex soft-threshold: shrink the modulus, keep the phase """
    modulus = np.abs(v)
    scale = np.where(modulus > threshold, 1.0 - threshold / np.where(modulus > 0, modulus, 1.0), 0.0)
    return scale * v


def l1_norm(x):
    return float(np.sum(np.abs(x)))


class RecoveryService:
    def __init__(self, problem_dao, uncertainty_service, solver_defaults = None,
                 rank_tolerance = 1e-10, p0_max_columns = 24):
        self.problem_dao = problem_dao
        self.uncertainty_service = uncertainty_service
        self.solver_defaults = solver_defaults or SolverConfig()
        self.rank_tolerance = rank_tolerance
        self.p0_max_columns = p0_max_columns

    def solver_config(self, **overrides):
        """ 기본 설정에 덮어쓰기를 적용한 SolverConfig """
        values = {
            'max_iterations': self.solver_defaults.max_iterations,
            'abs_tolerance': self.solver_defaults.abs_tolerance,
            'rel_tolerance': self.solver_defaults.rel_tolerance,
            'penalty': self.solver_defaults.penalty,
            'seed': self.solver_defaults.seed,
            'trace': self.solver_defaults.trace
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return SolverConfig(**values)

    def load_problem(self, path):
        return self.problem_dao.read_problem(path)

    def stable_linear_recovery(self, U, Q, P, y_obs):
        """
        erasure + 잡음 관측으로부터의 선형 복원
            p_hat = (I - D_P P_Q(U))^{-1} D_{P^c} y_obs, computed by a linear solve.

        args :
            U     : unitary m x m
            Q     : support of p in the basis U
            P     : erased entries
            y_obs : p_{P^c} + n

        returns :
            (p_hat, C) with ||p_hat - p||_2 <= C ||n_{P^c}||_2, C = 1 / (1 - Delta)
        """
        delta = self.uncertainty_service.delta(U, P, Q)
        if delta >= 1 - 1e-9:
            logger.warning('linear recovery impossible, delta = %.12f', delta)
            raise NotRecoverableError(f'Delta_PQ(U) = {delta:.12f} is not below 1', delta)

        U = np.asarray(U, dtype = np.complex128)
        y_obs = complex_vector(y_obs)
        if y_obs.size != U.shape[0]:
            raise DimensionError(f'observation has length {y_obs.size}, expected {U.shape[0]}')

        projection = linalg.projector(U, Q, self.uncertainty_service.unitary_tolerance)
        system = np.eye(U.shape[0], dtype = np.complex128) - P.mask()[:, None] * projection
        p_hat = scipy.linalg.solve(system, linalg.restrict(y_obs, P.complement()))
        return p_hat, 1.0 / (1.0 - delta)

    def logan_error_bound(self, U, P, Q, eps_P, noise_l1):
        """ C eps_P ||n||_1 with C = 2 / (1 - 2 Sigma_{P,Q}(U)) """
        sigma = self.uncertainty_service.sigma(U, P, Q)
        if sigma >= 0.5:
            raise NotRecoverableError(f'Sigma_PQ(U) = {sigma:.12f} is not below 1/2', sigma)
        return 2.0 / (1.0 - 2.0 * sigma) * eps_P * noise_l1

    def _polish(self, M, b, x, support, feasible_tolerance):
        """ refit on the given support by least squares; keep the refit only if it is feasible and no worse """
        if support.size == 0 or support.size > M.shape[0]:
            return x
        coefficients = scipy.linalg.lstsq(M[:, support], b)[0]
        candidate = np.zeros_like(x)
        candidate[support] = coefficients
        if np.linalg.norm(M @ candidate - b) <= feasible_tolerance and l1_norm(candidate) <= l1_norm(x) + feasible_tolerance:
            return candidate
        return x

    def basis_pursuit(self, M, b, cfg = None):
        """
        minimize ||x||_1 subject to M x = b (complex)

        Operator splitting: an affine projection step alternates with the
        complex soft-threshold; the returned point is the last shrink iterate
        projected back onto {x : M x = b}, then support-polished.

        args :
            M   : k x n complex matrix
            b   : length-k vector in range(M)
            cfg : SolverConfig

        returns :
            SolverResult
        """
        cfg = cfg or self.solver_config()
        M = np.atleast_2d(np.asarray(M, dtype = np.complex128))
        b = complex_vector(b)
        k, n = M.shape
        if b.size != k:
            raise DimensionError(f'right-hand side has length {b.size}, expected {k}')

        feasible_tolerance = cfg.abs_tolerance * max(1.0, float(np.linalg.norm(b)))
        if k == 0 or not np.any(M):
            x = np.zeros(n, dtype = np.complex128)
            residual = float(np.linalg.norm(b))
            status = 'converged' if residual <= feasible_tolerance else 'infeasible'
            return SolverResult(x, status, 0, 0.0, residual)

        pseudo_inverse = scipy.linalg.pinv(M)
        x_ls = pseudo_inverse @ b
        residual = float(np.linalg.norm(M @ x_ls - b))
        if residual > feasible_tolerance:
            logger.warning('basis pursuit: right-hand side outside range, residual %.3e', residual)
            return SolverResult(x_ls, 'infeasible', 0, l1_norm(x_ls), residual)

        def project(v):
            return v - pseudo_inverse @ (M @ v - b)

        rho = cfg.penalty
        z = x_ls.copy()
        u = np.zeros(n, dtype = np.complex128)
        trace = [] if cfg.trace else None
        status = 'max_iter'
        sqrt_n = np.sqrt(n)

        for iteration in range(1, cfg.max_iterations + 1):
            x = project(z - u)
            z_old = z
            z = soft_threshold(x + u, 1.0 / rho)
            u = u + x - z

            primal = np.linalg.norm(x - z)
            dual = rho * np.linalg.norm(z - z_old)
            if trace is not None:
                trace.append([float(primal), float(dual)])

            eps_primal = sqrt_n * cfg.abs_tolerance + cfg.rel_tolerance * max(np.linalg.norm(x), np.linalg.norm(z))
            eps_dual = sqrt_n * cfg.abs_tolerance + cfg.rel_tolerance * rho * np.linalg.norm(u)
            if primal <= eps_primal and dual <= eps_dual:
                status = 'converged'
                break

        x = project(z)
        x = self._polish(M, b, x, np.flatnonzero(z), feasible_tolerance)
        residual = float(np.linalg.norm(M @ x - b))
        if status != 'converged':
            logger.warning('basis pursuit hit max_iterations = %d', cfg.max_iterations)
        logger.info('basis pursuit %s after %d iterations, residual %.3e', status, iteration, residual)
        return SolverResult(x, status, iteration, l1_norm(x), residual, trace)

    def l1_subspace_denoise(self, U, Q, y_obs, cfg = None):
        """
        l1 부분공간 잡음 제거
            argmin over w in W^{U,Q} of ||y_obs - w||_1, with w = U_Q c solved
            as complex least-absolute-deviation regression by operator splitting.

        returns :
            SolverResult whose x is the denoised signal w
        """
        cfg = cfg or self.solver_config()
        U = linalg.check_unitary(U, self.uncertainty_service.unitary_tolerance)
        linalg.check_index_set(Q, U.shape[0], 'Q')
        y = complex_vector(y_obs)
        if y.size != U.shape[0]:
            raise DimensionError(f'observation has length {y.size}, expected {U.shape[0]}')

        basis = U[:, list(Q.members)]
        if basis.shape[1] == 0:
            return SolverResult(np.zeros_like(y), 'converged', 0, l1_norm(y), 0.0)

        rho = cfg.penalty
        c = basis.conj().T @ y
        z = basis @ c - y
        u = np.zeros_like(y)
        trace = [] if cfg.trace else None
        status = 'max_iter'
        sqrt_m = np.sqrt(y.size)

        for iteration in range(1, cfg.max_iterations + 1):
            c = basis.conj().T @ (y + z - u)
            fitted = basis @ c
            z_old = z
            z = soft_threshold(fitted - y + u, 1.0 / rho)
            u = u + fitted - z - y

            primal = np.linalg.norm(fitted - z - y)
            dual = rho * np.linalg.norm(basis.conj().T @ (z - z_old))
            if trace is not None:
                trace.append([float(primal), float(dual)])

            eps_primal = sqrt_m * cfg.abs_tolerance + cfg.rel_tolerance * max(np.linalg.norm(fitted), np.linalg.norm(z), np.linalg.norm(y))
            eps_dual = sqrt_m * cfg.abs_tolerance + cfg.rel_tolerance * rho * np.linalg.norm(basis.conj().T @ u)
            if primal <= eps_primal and dual <= eps_dual:
                status = 'converged'
                break

        # refit on the entries the shrink step left untouched
        clean = np.abs(z) == 0
        if np.count_nonzero(clean) >= basis.shape[1]:
            refit = scipy.linalg.lstsq(basis[clean], y[clean])[0]
            if l1_norm(y - basis @ refit) <= l1_norm(y - basis @ c) + cfg.abs_tolerance:
                c = refit

        w = basis @ c
        if status != 'converged':
            logger.warning('l1 denoising hit max_iterations = %d', cfg.max_iterations)
        logger.info('l1 denoising %s after %d iterations', status, iteration)
        # split residual ||U_Q c - y - z|| of the last iterate
        return SolverResult(w, status, iteration, l1_norm(y - w), float(primal), trace)

    def _reduce(self, problem):
        """ project the constraint A y in {w + B z} onto range(B)^perp """
        N, rank = linalg.orthonormal_complement(problem.B.matrix, self.rank_tolerance)
        if rank < problem.B.cols:
            raise ValidationError(f'B has rank {rank} < {problem.B.cols} columns')
        return N.conj().T @ problem.A.matrix, N.conj().T @ problem.w

    def _nuisance(self, problem, y):
        """ z by least squares from w = A y + B z """
        A, B, w = problem.A.matrix, problem.B.matrix, problem.w
        if B.shape[1] == 0:
            z = np.zeros(0, dtype = np.complex128)
        else:
            z = scipy.linalg.lstsq(B, w - A @ y)[0]
        return z, float(np.linalg.norm(A @ y + B @ z - w))

    def separation_threshold(self, A, B, s, q = None):
        """
        계수 기반 분리 가능 조건 2 s q < f_{A,B}(2 s, q)

        returns :
            (holds, lhs, rhs)
        """
        q = B.cols if q is None else q
        if s < 0 or q < 0:
            raise DomainError('sparsity levels must be non-negative')
        lhs = 2.0 * s * q
        rhs = self.uncertainty_service.f_ab(A, B, 2 * s, q)
        return lhs < rhs, lhs, rhs

    def _threshold_summary(self, problem):
        try:
            holds, lhs, rhs = self.separation_threshold(problem.A, problem.B, problem.sparsity_s)
        except VacuousBoundError:
            return None
        return {'holds': bool(holds), 'lhs': lhs, 'rhs': rhs}

    def _near_degenerate(self, problem, y, objective, alternative, tolerance):
        if alternative is None:
            return False
        alternative = complex_vector(alternative)
        _, residual = self._nuisance(problem, alternative)
        return (residual <= tolerance
                and abs(l1_norm(alternative) - objective) <= DEGENERACY_GAP
                and np.linalg.norm(alternative - y) > DEGENERACY_GAP)

    def separate_p1(self, problem, cfg = None, alternative = None):
        """
        (P1) minimize ||y~||_1 subject to A y~ in {w + B z~}

        z~ is eliminated with an orthonormal basis N of range(B)^perp, leaving
        basis pursuit on N^H A y = N^H w; z is then recovered by least squares.

        args :
            problem     : SeparationProblem, B of full column rank
            cfg         : SolverConfig
            alternative : a second candidate y; flags near-degeneracy when it is
                          feasible with the same objective

        returns :
            SeparationSolution
        """
        cfg = cfg or self.solver_config()
        M, b = self._reduce(problem)
        result = self.basis_pursuit(M, b, cfg)
        z, residual = self._nuisance(problem, result.x)
        tolerance = cfg.abs_tolerance * max(1.0, float(np.linalg.norm(problem.w)))
        return SeparationSolution(
            y = result.x,
            z = z,
            objective = result.objective,
            feasibility_residual = residual,
            solver_status = result.status,
            iterations = result.iterations,
            algorithm = 'p1',
            near_degenerate = self._near_degenerate(problem, result.x, result.objective, alternative, tolerance),
            threshold = self._threshold_summary(problem),
            trace = result.trace
        )

    def separate_p0(self, problem, max_support = None, cfg = None):
        """
        (P0) minimize ||y~||_0 subject to A y~ in {w + B z~}

        Supports are scanned by size, then lexicographically; the first one whose
        least-squares residual is within tolerance wins.
        """
        cfg = cfg or self.solver_config()
        p = problem.A.cols
        if p > self.p0_max_columns:
            raise EnumerationLimitError(f'exhaustive (P0) search is limited to {self.p0_max_columns} columns, A has {p}')
        max_support = p if max_support is None else min(int(max_support), p)

        M, b = self._reduce(problem)
        tolerance = cfg.abs_tolerance * max(1.0, float(np.linalg.norm(b)))
        checked = 0
        for size in range(0, max_support + 1):
            for support in itertools.combinations(range(p), size):
                checked += 1
                y = np.zeros(p, dtype = np.complex128)
                if size:
                    y[list(support)] = scipy.linalg.lstsq(M[:, list(support)], b)[0]
                if np.linalg.norm(M @ y - b) <= tolerance:
                    z, residual = self._nuisance(problem, y)
                    logger.info('(P0) found support of size %d after %d candidates', size, checked)
                    return SeparationSolution(
                        y = y,
                        z = z,
                        objective = float(size),
                        feasibility_residual = residual,
                        solver_status = 'converged',
                        iterations = checked,
                        algorithm = 'p0',
                        support = [i + 1 for i in support],
                        threshold = self._threshold_summary(problem)
                    )

        logger.warning('(P0) no feasible support up to size %d', max_support)
        y = np.zeros(p, dtype = np.complex128)
        z, residual = self._nuisance(problem, y)
        return SeparationSolution(
            y = y,
            z = z,
            objective = float('inf'),
            feasibility_residual = residual,
            solver_status = 'infeasible',
            iterations = checked,
            algorithm = 'p0',
            threshold = self._threshold_summary(problem)
        )
