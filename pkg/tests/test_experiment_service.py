import math

import numpy as np
import pytest

import linalg
from custom_error import DimensionError, DomainError, EnumerationLimitError
from model.entities import Dictionary, DiscreteMeasure, ExperimentConfig, IndexSet, PointCloud, TrigPolynomial
from service.experiment_service import (
    l0_norm,
    random_dictionary,
    random_missing_set,
    random_sparse_vector,
    sample_complex_ball,
    sample_disk,
    sample_segment
)
from utils import named_rng


def test_comb_vector_and_identity(experiment_service):
    d = experiment_service.comb_vector(16, 4)
    assert np.flatnonzero(d).tolist() == [3, 7, 11, 15]
    assert experiment_service.comb_identity_defect(16, 8) <= 1e-12
    assert experiment_service.comb_identity_defect(1, 1) <= 1e-12
    with pytest.raises(DomainError):
        experiment_service.comb_vector(16, 3)


@pytest.mark.parametrize('m, support_size', [(16, 2), (36, 3)])
def test_counterexample_pairs(experiment_service, m, support_size):
    report = experiment_service.counterexample(m)
    assert report.both_feasible
    assert report.l0_pair == (support_size, support_size)
    assert report.l1_pair[0] == pytest.approx(report.l1_pair[1])
    assert report.w_residual <= 1e-10


def test_counterexample_problem_shape(experiment_service):
    problem = experiment_service.counterexample_problem(16)
    assert problem.B.cols == 4
    assert problem.sparsity_s == 2
    np.testing.assert_allclose(problem.w, 0.5 * experiment_service.comb_vector(16, 2))


@pytest.mark.parametrize('m', [9, 10])
def test_counterexample_needs_even_square(experiment_service, m):
    with pytest.raises(DomainError):
        experiment_service.counterexample(m)


def test_injectivity_witness_above_budget(experiment_service):
    report = experiment_service.injectivity_check(Dictionary(np.eye(2)),
                                                  linalg.identity_columns(IndexSet.from_one_based(2, [1])), 2, 1)
    assert not report.injective
    assert report.witness == ([1, 2], [1])


def test_injectivity_of_random_dictionaries(experiment_service):
    for trial in range(10):
        rng = named_rng(0, 'test-injectivity', trial)
        report = experiment_service.injectivity_check(random_dictionary(rng, 6, 8), random_dictionary(rng, 6, 2), 1, 1)
        assert report.injective
        assert report.min_sv > 1e-8
        assert report.subsets_checked == math.comb(8, 2)


def test_injectivity_edge_cases(experiment_service):
    A, B = Dictionary(np.eye(3)), Dictionary(np.eye(3))
    empty = experiment_service.injectivity_check(A, B, 0, 0)
    assert empty.injective
    assert experiment_service.injectivity_check(A, B, 1, 0).injective
    # A and B share columns, so one column from each can coincide
    assert not experiment_service.injectivity_check(Dictionary(np.eye(4)), Dictionary(np.eye(4)), 1, 1).injective

    big = random_dictionary(np.random.default_rng(0), 4, 17)
    with pytest.raises(EnumerationLimitError):
        experiment_service.injectivity_check(big, Dictionary(np.eye(4)), 1, 1)
    with pytest.raises(DimensionError):
        experiment_service.injectivity_check(A, Dictionary(np.eye(2)), 1, 1)


def test_com_bound_formula(experiment_service):
    assert experiment_service.com_bound(1, 1, 1.0, 1.0, 0.3) == pytest.approx(0.09)
    assert experiment_service.com_bound(2, 2, 1.0, 2.0, 0.5) == pytest.approx(4 * (0.25) ** 4)


def test_com_mc_disk_matches_area(experiment_service):
    estimate = experiment_service.com_bound_mc(1, 1, 1.0, [1.0], [0.0], 0.3, 100000, seed = 0)
    assert estimate.trials == 100000
    assert abs(estimate.empirical - 0.09) <= 3 * math.sqrt(0.09 * 0.91 / 100000)
    assert estimate.within_bound


def test_com_mc_is_reproducible_and_saturates(experiment_service):
    first = experiment_service.com_bound_mc(2, 1, 1.0, [1, 1j], [0.1], 0.5, 25000, seed = 4)
    second = experiment_service.com_bound_mc(2, 1, 1.0, [1, 1j], [0.1], 0.5, 25000, seed = 4)
    assert first.hits == second.hits
    assert experiment_service.com_bound_mc(1, 1, 1.0, [1.0], [0.0], 10.0, 1000, seed = 0).empirical == 1.0


def test_com_mc_rejects_zero_direction(experiment_service):
    with pytest.raises(DomainError):
        experiment_service.com_bound_mc(1, 1, 1.0, [0.0], [0.0], 0.3, 10, seed = 0)
    with pytest.raises(DimensionError):
        experiment_service.com_bound_mc(2, 1, 1.0, [1.0], [0.0], 0.3, 10, seed = 0)


def test_sample_complex_ball_stays_inside():
    points = sample_complex_ball(3, 2.0, 1000, np.random.default_rng(0))
    assert points.shape == (1000, 3)
    assert np.max(np.linalg.norm(points, axis = 1)) <= 2.0


def test_sieve_single_atom(experiment_service):
    mu = DiscreteMeasure([0.3], [1.0])
    lhs, rhs = experiment_service.sieve_empirical(mu, TrigPolynomial([1.0]), 0.5)
    assert lhs == pytest.approx(1)
    assert rhs == pytest.approx(2)
    with pytest.raises(DomainError):
        experiment_service.sieve_empirical(mu, TrigPolynomial([1.0]), 0)


def test_window_mass_wraps_around(experiment_service):
    mu = DiscreteMeasure([0.05, 0.95, 0.5], [1.0, 2.0, 0.5])
    assert experiment_service.window_mass(mu, 0.2) == pytest.approx(3.0)


def test_sieve_holds_on_random_cases(experiment_service):
    for case in range(200):
        lhs, rhs = experiment_service.sieve_empirical(*experiment_service.random_sieve_case(named_rng(1, 'test-sieve', case)))
        assert lhs <= rhs + 1e-9


def test_box_counting_degenerate_cloud(experiment_service):
    estimate, counts = experiment_service.box_counting_dim(PointCloud([[0.5], [0.5]]), [0.2, 0.1])
    assert estimate == 0
    assert counts == [1, 1]
    with pytest.raises(DomainError):
        experiment_service.box_counting_dim(PointCloud([[0.0], [1.0]]), [0.1, 0.2])


def test_box_counting_segment_and_disk(experiment_service):
    grid = np.geomspace(0.25, 0.04, 6)
    segment, counts = experiment_service.box_counting_dim(sample_segment(10000, np.random.default_rng(0)), grid)
    assert abs(segment - 1) <= 0.3
    assert counts == sorted(counts)
    disk, _ = experiment_service.box_counting_dim(sample_disk(10000, np.random.default_rng(0)), grid)
    assert abs(disk - 2) <= 0.3


def test_clip(experiment_service):
    np.testing.assert_allclose(experiment_service.clip(np.array([0.5, 2.0, -3j]), 1.0), [0.5, 1.0, -1j])


def test_clipping_scenario_identity(experiment_service):
    A = Dictionary(np.eye(2))
    problem = experiment_service.make_clipping_scenario([0.5, 2.0], A, 1.0)
    np.testing.assert_allclose(problem.w, [0.5, 1.0])
    np.testing.assert_allclose(problem.planted_z, [0.0, -1.0])
    assert problem.B.cols == 2

    known = experiment_service.make_clipping_scenario([0.5, 2.0], A, 1.0, known_locations = True)
    assert known.B.cols == 1
    np.testing.assert_allclose(known.planted_z, [-1.0])

    untouched = experiment_service.make_clipping_scenario([0.5, 2.0], A, 5.0)
    assert not np.any(untouched.planted_z)
    with pytest.raises(DomainError):
        experiment_service.make_clipping_scenario([0.5, 2.0], A, 0.0)


def test_clipped_cosine_is_recovered(experiment_service, recovery_service):
    m = 16
    A = Dictionary(linalg.dct_matrix(m))
    y = np.zeros(m)
    y[1] = 1.0
    problem = experiment_service.make_clipping_scenario(y, A, 0.345, known_locations = True)
    assert problem.B.cols == 2

    solution = recovery_service.separate_p1(problem)
    assert solution.threshold['holds']
    np.testing.assert_allclose(solution.y, y, atol = 1e-5)


def test_inpainting_scenarios(experiment_service, recovery_service):
    m = 16
    A = Dictionary(linalg.dft_matrix(m))
    y = random_sparse_vector(m, 1, np.random.default_rng(2))

    nothing_missing = experiment_service.make_inpainting_scenario(y, A, IndexSet.empty(m))
    np.testing.assert_allclose(nothing_missing.w, A.matrix @ y)
    assert nothing_missing.B.cols == 0

    missing = random_missing_set(m, 4, np.random.default_rng(3))
    problem = experiment_service.make_inpainting_scenario(y, A, missing)
    assert not np.any(problem.w[list(missing.members)])
    solution = recovery_service.separate_p1(problem)
    np.testing.assert_allclose(solution.y, y, atol = 1e-5)
    assert l0_norm(solution.y) == 1


def test_run_experiment_counterexample(experiment_service):
    report = experiment_service.run_experiment(ExperimentConfig('counterexample', 0, {'m': 16}))
    assert report.passed
    assert report.checks['threshold_fails']
    assert report.wall_time >= 0


def test_run_experiment_sieve_and_injectivity(experiment_service):
    sieve = experiment_service.run_experiment(ExperimentConfig('sieve', 3, {'cases': 50}))
    assert sieve.passed
    assert sieve.metrics['cases'] == 50

    injectivity = experiment_service.run_experiment(ExperimentConfig('injectivity', 0, {'trials': 5}))
    assert injectivity.passed
    assert injectivity.metrics['injective'] == 5


def test_run_experiment_unknown_name(experiment_service):
    with pytest.raises(DomainError):
        experiment_service.run_experiment(ExperimentConfig('nope'))
