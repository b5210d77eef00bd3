""" dense complex linear algebra for the uncertainty toolkit

DFT/DCT construction, index-set selectors and projectors, the operator and
entrywise norms, coherence measures.
"""
import logging

import numpy as np
import scipy.fft
import scipy.linalg

from custom_error import DimensionError, DomainError, ValidationError
from model.entities import Dictionary, IndexSet, complex_matrix

logger = logging.getLogger(__name__)


def dft_matrix(m):
    """ m x m unitary DFT, entry (k, l) = (1/sqrt(m)) e^{-2 pi j k l / m} for k, l in 1..m """
    if int(m) < 1:
        raise DimensionError(f'DFT size must be >= 1, got {m}')
    k = np.arange(1, m + 1)
    # reduce k*l mod m before scaling so large m keeps full phase accuracy
    phase = np.outer(k, k) % m
    return np.exp(-2j * np.pi * phase / m) / np.sqrt(m)


def dct_matrix(m):
    """ orthonormal DCT-II synthesis basis, columns are cosine atoms """
    if int(m) < 1:
        raise DimensionError(f'DCT size must be >= 1, got {m}')
    return scipy.fft.idct(np.eye(m), norm = 'ortho', axis = 0).astype(np.complex128)


def is_dft(U, tolerance = 1e-10):
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        return False
    return bool(np.max(np.abs(U - dft_matrix(U.shape[0]))) <= tolerance)


def check_unitary(U, tolerance = 1e-10):
    U = complex_matrix(U)
    m, n = U.shape
    if m != n:
        raise DimensionError(f'unitary matrix must be square, got {m}x{n}')
    defect = np.max(np.abs(U @ U.conj().T - np.eye(m)))
    if defect > tolerance:
        raise ValidationError(f'matrix is not unitary (max |U U^H - I| = {defect:.3e})')
    return U


def selector(A):
    """ D_A: diagonal 0/1 matrix with ones at the members of A """
    return np.diag(A.mask().astype(np.complex128))


def restrict(x, A):
    """ x_A = D_A x without forming D_A """
    x = np.asarray(x, dtype = np.complex128)
    return np.where(A.mask(), x, 0)


def projector(U, Q, tolerance = 1e-10):
    """ P_Q(U) = U D_Q U^H, the orthogonal projector onto span{u_i : i in Q} """
    U = check_unitary(U, tolerance)
    if Q.universe_size != U.shape[0]:
        raise DimensionError(f'index set universe {Q.universe_size} does not match m = {U.shape[0]}')
    columns = U[:, list(Q.members)]
    return columns @ columns.conj().T


def identity_columns(S):
    """ columns of the m x m identity indexed by S, as a Dictionary """
    return Dictionary(np.eye(S.universe_size)[:, list(S.members)])


def concat(A, B):
    """ [A B] """
    if A.rows != B.rows:
        raise DimensionError(f'row mismatch: {A.rows} vs {B.rows}')
    return Dictionary(np.hstack([A.matrix, B.matrix]), max(A.column_norm_tolerance, B.column_norm_tolerance))


def singular_values(A):
    A = np.asarray(A, dtype = np.complex128)
    if A.size == 0:
        return np.zeros(0)
    return scipy.linalg.svdvals(A)


def op_norm_2(A, tol = 1e-10):
    """ |||A|||_2, the largest singular value

    The SVD value must satisfy ||A||_F / sqrt(rank) <= |||A|||_2 <= ||A||_F;
    when it does not, power iteration on A^H A is used instead.
    """
    sv = singular_values(A)
    if sv.size == 0 or sv[0] == 0:
        return 0.0
    norm = float(sv[0])
    frobenius = float(np.linalg.norm(np.asarray(A, dtype = np.complex128)))
    rank = int(np.sum(sv > tol * sv[0]))
    slack = 1e-12 * max(1.0, frobenius)
    if frobenius / np.sqrt(rank) - slack <= norm <= frobenius + slack:
        return norm
    logger.warning('svd norm %.15g outside the Frobenius sandwich [%.15g, %.15g], using power iteration',
                   norm, frobenius / np.sqrt(rank), frobenius)
    return spectral_norm_power(A)


def spectral_norm_power(A, max_iter = 1000, tol = 1e-12):
    """ largest singular value by power iteration on A^H A

    Deterministic start at the normalised all-ones vector; a fixed
    perturbation is added if the start lies in the kernel.
    """
    A = np.asarray(A, dtype = np.complex128)
    if A.size == 0 or not np.any(A):
        return 0.0
    n = A.shape[1]
    x = np.ones(n, dtype = np.complex128) / np.sqrt(n)
    if np.linalg.norm(A @ x) == 0:
        x = x + np.exp(1j * np.arange(n)) / np.sqrt(n)
        x /= np.linalg.norm(x)

    ratio_old = np.inf
    for iteration in range(max_iter):
        Ax = A @ x
        ratio = np.linalg.norm(Ax)
        if abs(ratio - ratio_old) <= tol * ratio:
            break
        ratio_old = ratio
        x = A.conj().T @ Ax
        x /= np.linalg.norm(x)
    logger.debug('power iteration stopped after %d steps', iteration + 1)
    return float(np.linalg.norm(A @ x))


def op_norm_1(A):
    """ |||A|||_1, the maximum column absolute sum """
    A = np.asarray(A, dtype = np.complex128)
    if A.size == 0:
        return 0.0
    return float(np.max(np.sum(np.abs(A), axis = 0)))


def matrix_norms(A):
    """ (Frobenius norm, entrywise 1-norm) """
    A = np.asarray(A, dtype = np.complex128)
    return float(np.linalg.norm(A)), float(np.sum(np.abs(A)))


def numerical_rank(A, tol = 1e-10):
    sv = singular_values(A)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv > tol * sv[0]))


def _gram_offdiagonal_max(G):
    G = np.abs(G)
    np.fill_diagonal(G, 0.0)
    return float(G.max()) if G.size else 0.0


def coherence(A):
    """ mu(A) = max_{i != j} |a_i^H a_j| """
    if not isinstance(A, Dictionary):
        raise ValidationError('coherence needs a Dictionary with unit-norm columns')
    if A.cols < 1:
        raise DimensionError('coherence needs at least one column')
    if A.cols == 1:
        return 0.0
    return _gram_offdiagonal_max(A.matrix.conj().T @ A.matrix)


def mutual_coherence(A, B):
    """ mu_bar(A, B) = max_{i, j} |a_i^H b_j|, diagonal pairs included """
    if A.rows != B.rows:
        raise DimensionError(f'row mismatch: {A.rows} vs {B.rows}')
    if A.cols == 0 or B.cols == 0:
        return 0.0
    return float(np.max(np.abs(A.matrix.conj().T @ B.matrix)))


def identity_coherence(U):
    """ mu([I U]) for unitary U, which is max_{i,k} |U_{i,k}| """
    # columns of I are orthonormal, columns of U too; only cross pairs count
    return float(np.max(np.abs(np.asarray(U, dtype = np.complex128))))


def orthonormal_complement(B, tol = 1e-10):
    """ orthonormal basis N of range(B)^perp via pivoted QR

    returns :
        (N, rank)
    """
    B = np.asarray(B, dtype = np.complex128)
    m, q = B.shape
    if q == 0:
        return np.eye(m, dtype = np.complex128), 0
    Q, R, _ = scipy.linalg.qr(B, pivoting = True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > tol * diag[0])) if diag.size and diag[0] > 0 else 0
    return Q[:, rank:], rank


def check_index_set(A, m, name = 'index set'):
    if not isinstance(A, IndexSet):
        raise DomainError(f'{name} must be an IndexSet')
    if A.universe_size != m:
        raise DimensionError(f'{name} lives in 1..{A.universe_size}, expected 1..{m}')
    return A
