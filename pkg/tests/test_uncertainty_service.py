import math

import numpy as np
import pytest
import scipy.linalg

import linalg
from custom_error import DomainError, VacuousBoundError, ValidationError
from model.entities import Dictionary, IndexSet
from service.experiment_service import random_dictionary
from service.verify_service import random_subset, random_unitary
from utils import complex_normal


def test_picket_fence_delta_is_exact(uncertainty_service):
    F = linalg.dft_matrix(16)
    P = IndexSet.picket_fence(16, 4)
    Q = IndexSet.interval(16, 0, 4)
    assert uncertainty_service.delta(F, P, Q) == pytest.approx(0.5, abs = 1e-12)
    assert uncertainty_service.delta(F, P, IndexSet.interval(16, 5, 4)) == pytest.approx(0.5, abs = 1e-12)


def test_empty_sets_give_zero(uncertainty_service):
    F = linalg.dft_matrix(8)
    empty = IndexSet.empty(8)
    full = IndexSet.full(8)
    assert uncertainty_service.delta(F, empty, full) == 0
    assert uncertainty_service.sigma(F, full, empty) == 0
    assert uncertainty_service.frobenius_bounds(F, empty, full) == (0.0, 0.0)

    report = uncertainty_service.bound_report(F, empty, IndexSet.interval(8, 0, 3))
    assert report.exact_delta == 0
    assert report.exact_sigma == 0
    assert report.frobenius_upper == 0


def test_delta_and_sigma_for_full_sets(uncertainty_service):
    F = linalg.dft_matrix(8)
    full = IndexSet.full(8)
    assert uncertainty_service.delta(F, full, full) == pytest.approx(1)
    assert uncertainty_service.sigma(F, full, full) == pytest.approx(1)


def test_non_unitary_input_is_rejected(uncertainty_service):
    P = IndexSet.full(2)
    with pytest.raises(ValidationError):
        uncertainty_service.delta(np.ones((2, 2)), P, P)


def test_bounds_sandwich_exact_values(uncertainty_service):
    rng = np.random.default_rng(1)
    m = 12
    for trial in range(30):
        U = random_unitary(rng, m)
        P, Q = random_subset(rng, m), random_subset(rng, m)
        report = uncertainty_service.bound_report(U, P, Q)
        assert report.frobenius_lower - 1e-10 <= report.exact_delta <= report.frobenius_upper + 1e-10
        assert report.sigma_lower - 1e-10 <= report.exact_sigma <= report.sigma_upper + 1e-10
        assert report.exact_delta <= report.coherence_bound_2 + 1e-10
        assert report.exact_sigma <= report.coherence_bound_1 + 1e-10
        assert not report.is_dft


def test_dft_bounds_and_sieve_in_report(uncertainty_service):
    F = linalg.dft_matrix(16)
    report = uncertainty_service.bound_report(F, IndexSet.picket_fence(16, 4), IndexSet.interval(16, 0, 4))
    assert report.is_dft
    assert report.dft_lower == pytest.approx(0.5)
    assert report.dft_upper == pytest.approx(1.0)
    assert report.exact_delta <= report.sieve_bound + 1e-12
    assert report.P == [4, 8, 12, 16]


def test_sieve_bound_picket_example(uncertainty_service):
    P = IndexSet.picket_fence(16, 4)
    bound, lam = uncertainty_service.sieve_bound(16, P, 4, lam = 4)
    assert bound == pytest.approx(math.sqrt(7 / 16))
    assert lam == 4
    best, _ = uncertainty_service.sieve_bound(16, P, 4)
    assert best <= bound + 1e-12


def test_sieve_bound_dominates_delta_for_random_sets(uncertainty_service):
    rng = np.random.default_rng(4)
    m = 24
    F = linalg.dft_matrix(m)
    for trial in range(20):
        P = random_subset(rng, m)
        n = int(rng.integers(1, m + 1))
        Q = IndexSet.interval(m, int(rng.integers(m)), n)
        bound, _ = uncertainty_service.sieve_bound(m, P, n)
        assert uncertainty_service.delta(F, P, Q) <= bound + 1e-10


def test_nyquist_density(uncertainty_service):
    P = IndexSet.picket_fence(16, 4)
    assert uncertainty_service.nyquist_density(P, 4) == pytest.approx(0.25)
    assert uncertainty_service.nyquist_density(P, 4.5) == pytest.approx(2 / 4.5)
    assert uncertainty_service.nyquist_density(IndexSet.empty(16), 3) == 0
    with pytest.raises(DomainError):
        uncertainty_service.nyquist_density(P, 0)
    with pytest.raises(DomainError):
        uncertainty_service.nyquist_density(P, 17)


@pytest.mark.parametrize('m', [2, 4, 8, 16, 64])
def test_halfband_closed_form_matches_direct_sum(uncertainty_service, m):
    F = linalg.dft_matrix(m)
    P = IndexSet.from_one_based(m, [m])
    Q = IndexSet.interval(m, 0, m // 2)
    _, entrywise = uncertainty_service.sigma_bounds(F, P, Q)
    assert uncertainty_service.halfband_entrywise_l1(m) == pytest.approx(entrywise, abs = 1e-10)
    assert entrywise >= 1 - 1e-12


def test_halfband_grows_logarithmically(uncertainty_service):
    values = [uncertainty_service.halfband_entrywise_l1(2 ** k) for k in range(2, 12)]
    assert all(a < b for a, b in zip(values, values[1:]))
    with pytest.raises(DomainError):
        uncertainty_service.halfband_entrywise_l1(7)


def test_f_ab_for_picket_pair(uncertainty_service):
    A = Dictionary(linalg.dft_matrix(16))
    B = linalg.identity_columns(IndexSet.picket_fence(16, 4))
    assert uncertainty_service.f_ab(A, B, 2, 4) == pytest.approx(16)


def test_zero_mutual_coherence_is_vacuous(uncertainty_service):
    A = linalg.identity_columns(IndexSet.from_one_based(3, [1]))
    B = linalg.identity_columns(IndexSet.from_one_based(3, [2]))
    with pytest.raises(VacuousBoundError):
        uncertainty_service.f_ab(A, B, 1, 1)


def test_pair_bounds_identity_fourier(uncertainty_service):
    A = Dictionary(np.eye(4))
    B = Dictionary(linalg.dft_matrix(4))
    report = uncertainty_service.pair_bounds(A, B, IndexSet.from_one_based(4, [1, 2]),
                                             IndexSet.from_one_based(4, [1, 3]), 0, 0)
    assert report.f_value == pytest.approx(4)
    assert report.frame3_lower == pytest.approx(4)
    assert report.admissible
    with pytest.raises(DomainError):
        uncertainty_service.pair_bounds(A, B, IndexSet.empty(4), IndexSet.empty(4), 1.5, 0)


def test_concentration_bounds_identity_fourier(uncertainty_service):
    report = uncertainty_service.concentration_bounds(np.eye(16), linalg.dft_matrix(16), 4, 4, 0, 0)
    assert report.elad_bruckstein == pytest.approx(16)
    assert report.delta_lower == 1
    assert report.admissible_l2 and report.admissible_l1
    tight = uncertainty_service.concentration_bounds(np.eye(16), linalg.dft_matrix(16), 2, 4, 0, 0)
    assert not tight.admissible_l2


def test_l1_budget_bound(uncertainty_service):
    A = Dictionary(np.eye(4))
    B = Dictionary(linalg.dft_matrix(4))
    bound_p, bound_q = uncertainty_service.l1_budget_bound(A, B, 2, 1, 1.0, 2.0)
    assert bound_p == pytest.approx(2 * 0.5 * 2.0)
    assert bound_q == pytest.approx(0.5 * 1.0)


def _kernel_pair(A, B, rng):
    """ (p, q) with A p = B q, a random element of the kernel of [A -B] """
    kernel = scipy.linalg.null_space(np.hstack([A.matrix, -B.matrix]))
    v = kernel @ complex_normal(rng, kernel.shape[1])
    return v[:A.cols], v[A.cols:]


def _top(v, k):
    """ the k largest-modulus entries of v and the l1 mass left outside them """
    members = np.sort(np.argsort(-np.abs(v), kind = 'stable')[:k])
    eps = 1 - np.sum(np.abs(v[members])) / np.sum(np.abs(v))
    return IndexSet(v.size, members), float(np.clip(eps, 0, 1))


def _dictionary_pairs():
    rng = np.random.default_rng(11)
    yield Dictionary(np.eye(16)), Dictionary(linalg.dft_matrix(16))
    for _ in range(5):
        yield random_dictionary(rng, 6, 5), random_dictionary(rng, 6, 3)


def test_l1_budget_bound_holds_on_kernel_pairs(uncertainty_service):
    rng = np.random.default_rng(12)
    for A, B in _dictionary_pairs():
        for _ in range(10):
            p, q = _kernel_pair(A, B, rng)
            np.testing.assert_allclose(A.matrix @ p, B.matrix @ q, atol = 1e-10)
            p_l1, q_l1 = np.sum(np.abs(p)), np.sum(np.abs(q))
            for k in range(A.cols + 1):
                for l in range(B.cols + 1):
                    bound_p, bound_q = uncertainty_service.l1_budget_bound(A, B, k, l, p_l1, q_l1)
                    assert np.sum(np.sort(np.abs(p))[::-1][:k]) <= bound_p + 1e-9
                    assert np.sum(np.sort(np.abs(q))[::-1][:l]) <= bound_q + 1e-9


def test_pair_bounds_hold_for_measured_concentrations(uncertainty_service):
    rng = np.random.default_rng(13)
    for A, B in _dictionary_pairs():
        for _ in range(5):
            p, q = _kernel_pair(A, B, rng)
            for k in range(1, A.cols + 1):
                for l in range(1, B.cols + 1):
                    P, eps_P = _top(p, k)
                    Q, eps_Q = _top(q, l)
                    report = uncertainty_service.pair_bounds(A, B, P, Q, eps_P, eps_Q)
                    assert k * l >= report.frame3_lower - 1e-9
                    if report.frame1_bound is not None:
                        assert 1 - eps_P <= report.frame1_bound + 1e-9
                    if report.frame2_bound is not None:
                        assert 1 - eps_Q <= report.frame2_bound + 1e-9


def test_pair_bounds_are_tight_on_combs(uncertainty_service):
    # F d^(4) = d^(4) for m = 16: four spikes on both sides
    A, B = Dictionary(np.eye(16)), Dictionary(linalg.dft_matrix(16))
    q = np.zeros(16, dtype = complex)
    q[3::4] = 1
    p = B.matrix @ q
    np.testing.assert_allclose(p, q, atol = 1e-12)

    P, eps_P = _top(p, 4)
    Q, eps_Q = _top(q, 4)
    report = uncertainty_service.pair_bounds(A, B, P, Q, eps_P, eps_Q)
    assert report.frame3_lower == pytest.approx(16, rel = 1e-9)
    assert report.frame1_bound == pytest.approx(1, rel = 1e-9)


def test_recovery_conditions(uncertainty_service):
    F = linalg.dft_matrix(16)
    conditions = uncertainty_service.recovery_conditions(F, IndexSet.picket_fence(16, 4), IndexSet.interval(16, 0, 1))
    assert conditions['stable_sufficient']
    assert conditions['logan_sufficient']
    assert conditions['stable_constant'] == pytest.approx(1 / (1 - conditions['delta']))
