import logging

import attr
import numpy as np

from custom_error import DomainError, DimensionError, ValidationError

logger = logging.getLogger(__name__)

SOLVER_STATUSES = ('converged', 'max_iter', 'infeasible')


def complex_matrix(value):
    """ 2차원 복소 행렬로 변환

    args :
        value : array-like, at least 1x1

    returns :
        complex128 ndarray with finite entries
    """
    matrix = np.array(value, dtype = np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] < 1:
        raise DimensionError(f'expected a 2-d matrix with at least one row, got shape {matrix.shape}')
    if not np.all(np.isfinite(matrix)):
        raise ValidationError('matrix has NaN or Inf entries')
    return matrix


def complex_vector(value):
    vector = np.array(value, dtype = np.complex128).reshape(-1)
    if not np.all(np.isfinite(vector)):
        raise ValidationError('vector has NaN or Inf entries')
    return vector


def _optional_vector(value):
    return None if value is None else complex_vector(value)


@attr.s(frozen = True, slots = True)
class IndexSet:
    """ subset of {1, ..., m}

    Members are stored 0-based and strictly increasing; every constructor and
    every file format speaks 1-based indices.
    """
    universe_size = attr.ib()
    members = attr.ib(converter = lambda values: tuple(int(v) for v in values), default = ())

    @universe_size.validator
    def _check_universe(self, attribute, value):
        if int(value) < 1:
            raise DomainError(f'universe size must be >= 1, got {value}')

    @members.validator
    def _check_members(self, attribute, value):
        for prev, cur in zip(value, value[1:]):
            if cur <= prev:
                raise DomainError('index set members must be strictly increasing without duplicates')
        if value and (value[0] < 0 or value[-1] >= self.universe_size):
            raise DomainError(f'index out of range 1..{self.universe_size}')

    @classmethod
    def from_one_based(cls, universe_size, indices):
        indices = [int(i) for i in indices]
        if len(set(indices)) != len(indices):
            raise DomainError('duplicate indices in set')
        return cls(universe_size, sorted(i - 1 for i in indices))

    @classmethod
    def from_mask(cls, mask):
        mask = np.asarray(mask, dtype = bool)
        return cls(mask.size, np.flatnonzero(mask))

    @classmethod
    def empty(cls, universe_size):
        return cls(universe_size, ())

    @classmethod
    def full(cls, universe_size):
        return cls(universe_size, range(universe_size))

    @classmethod
    def interval(cls, universe_size, start, length):
        """ {l+1, ..., l+n} interpreted circularly in {1, ..., m} """
        if not 0 <= length <= universe_size:
            raise DomainError(f'interval length must lie in 0..{universe_size}, got {length}')
        return cls(universe_size, sorted((start + k) % universe_size for k in range(length)))

    @classmethod
    def picket_fence(cls, universe_size, n):
        """ {m/n, 2m/n, ..., (n-1)m/n, m} for n dividing m """
        if n < 1 or universe_size % n:
            raise DomainError(f'picket fence needs n dividing m, got m = {universe_size}, n = {n}')
        step = universe_size // n
        return cls.from_one_based(universe_size, range(step, universe_size + 1, step))

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def one_based(self):
        return [i + 1 for i in self.members]

    def mask(self):
        mask = np.zeros(self.universe_size, dtype = bool)
        mask[list(self.members)] = True
        return mask

    def complement(self):
        return IndexSet.from_mask(~self.mask())

    def issubset(self, other):
        return self.universe_size == other.universe_size and set(self.members) <= set(other.members)

    def circular_interval(self):
        """ (l, n) with self == interval(m, l, n), or None when not a circular interval """
        n = len(self)
        if n == 0:
            return None
        if n == self.universe_size:
            return (0, n)
        mask = self.mask()
        starts = np.flatnonzero(mask & ~np.roll(mask, 1))
        if starts.size != 1:
            return None
        return (int(starts[0]), n)


@attr.s(frozen = True, eq = False)
class Dictionary:
    """ complex m x n matrix whose columns have unit 2-norm """
    matrix = attr.ib(converter = complex_matrix)
    column_norm_tolerance = attr.ib(default = 1e-8)
    renormalized = attr.ib(default = False)

    @matrix.validator
    def _check_columns(self, attribute, value):
        norms = np.linalg.norm(value, axis = 0)
        bad = np.flatnonzero(np.abs(norms - 1.0) > self.column_norm_tolerance)
        if bad.size:
            raise ValidationError(f'columns {[int(j) + 1 for j in bad[:5]]} are not normalised to unit 2-norm')

    @classmethod
    def from_matrix(cls, matrix, tolerance = 1e-8, renormalize = False):
        """ 열 정규화 옵션을 가진 생성자

        args :
            matrix      : array-like m x n
            tolerance   : admissible deviation of each column norm from 1
            renormalize : divide every column by its norm instead of failing

        returns :
            Dictionary
        """
        matrix = complex_matrix(matrix)
        if not renormalize:
            return cls(matrix, tolerance)

        norms = np.linalg.norm(matrix, axis = 0)
        if np.any(norms == 0):
            raise ValidationError('cannot renormalise a zero column')
        off = np.abs(norms - 1.0) > tolerance
        if np.any(off):
            logger.warning('renormalised %d of %d dictionary columns', int(off.sum()), matrix.shape[1])
        return cls(matrix / norms, tolerance, bool(np.any(off)))

    @property
    def rows(self):
        return self.matrix.shape[0]

    @property
    def cols(self):
        return self.matrix.shape[1]


@attr.s(frozen = True, slots = True)
class SolverConfig:
    max_iterations = attr.ib(default = 50000)
    abs_tolerance = attr.ib(default = 1e-8)
    rel_tolerance = attr.ib(default = 1e-6)
    penalty = attr.ib(default = 1.0)
    # recorded with the run; the splitting solvers and P0 draw no random numbers
    seed = attr.ib(default = 0)
    trace = attr.ib(default = False)

    @abs_tolerance.validator
    @rel_tolerance.validator
    @penalty.validator
    def _check_positive(self, attribute, value):
        if not value > 0:
            raise DomainError(f'{attribute.name} must be positive, got {value}')

    @max_iterations.validator
    def _check_iterations(self, attribute, value):
        if int(value) < 1:
            raise DomainError(f'max_iterations must be >= 1, got {value}')


@attr.s(eq = False)
class SolverResult:
    x = attr.ib()
    status = attr.ib(validator = attr.validators.in_(SOLVER_STATUSES))
    iterations = attr.ib()
    objective = attr.ib()
    primal_residual = attr.ib()
    trace = attr.ib(default = None, metadata = {'sidecar': True})

    @property
    def converged(self):
        return self.status == 'converged'


@attr.s(frozen = True)
class UncertaintyReport:
    m = attr.ib()
    P = attr.ib()
    Q = attr.ib()
    exact_delta = attr.ib()
    exact_sigma = attr.ib()
    frobenius_lower = attr.ib()
    frobenius_upper = attr.ib()
    sigma_lower = attr.ib()
    sigma_upper = attr.ib()
    coherence = attr.ib()
    coherence_bound_2 = attr.ib()
    coherence_bound_1 = attr.ib()
    is_dft = attr.ib(default = False)
    dft_lower = attr.ib(default = None)
    dft_upper = attr.ib(default = None)
    sieve_bound = attr.ib(default = None)
    sieve_lambda = attr.ib(default = None)


@attr.s(frozen = True)
class PairBoundReport:
    f_value = attr.ib()
    frame1_bound = attr.ib()
    frame2_bound = attr.ib()
    frame3_lower = attr.ib()
    admissible = attr.ib()


@attr.s(frozen = True)
class ConcentrationReport:
    delta_lower = attr.ib()
    l2_size_lower = attr.ib()
    l1_size_lower = attr.ib()
    elad_bruckstein = attr.ib()
    admissible_l2 = attr.ib()
    admissible_l1 = attr.ib()


@attr.s(eq = False)
class SeparationProblem:
    """ w = A y + B z with ||y||_0 <= sparsity_s """
    A = attr.ib(validator = attr.validators.instance_of(Dictionary))
    B = attr.ib(validator = attr.validators.instance_of(Dictionary))
    w = attr.ib(converter = complex_vector)
    sparsity_s = attr.ib(default = 1)
    planted_y = attr.ib(default = None, converter = _optional_vector)
    planted_z = attr.ib(default = None, converter = _optional_vector)

    def __attrs_post_init__(self):
        m = self.A.rows
        if self.B.rows != m or self.w.size != m:
            raise DimensionError(f'inconsistent row counts: A {self.A.rows}, B {self.B.rows}, w {self.w.size}')
        if self.planted_y is not None and self.planted_y.size != self.A.cols:
            raise DimensionError('planted y does not match the columns of A')
        if self.planted_z is not None and self.planted_z.size != self.B.cols:
            raise DimensionError('planted z does not match the columns of B')
        if int(self.sparsity_s) < 0:
            raise DomainError('sparsity must be non-negative')


@attr.s(eq = False)
class SeparationSolution:
    # z follows the w = A y + B z convention of the problem
    y = attr.ib()
    z = attr.ib()
    objective = attr.ib()
    feasibility_residual = attr.ib()
    solver_status = attr.ib(validator = attr.validators.in_(SOLVER_STATUSES))
    iterations = attr.ib()
    algorithm = attr.ib(default = 'p1')
    support = attr.ib(default = None)
    near_degenerate = attr.ib(default = False)
    threshold = attr.ib(default = None)
    trace = attr.ib(default = None, metadata = {'sidecar': True})


@attr.s(eq = False)
class CounterexampleReport:
    m = attr.ib()
    w = attr.ib()
    planted_y = attr.ib()
    planted_z = attr.ib()
    alternative_y = attr.ib()
    alternative_z = attr.ib()
    l0_pair = attr.ib()
    l1_pair = attr.ib()
    w_residual = attr.ib()
    planted_residual = attr.ib()
    alternative_residual = attr.ib()
    both_feasible = attr.ib()


@attr.s(eq = False)
class InjectivityReport:
    injective = attr.ib()
    min_sv = attr.ib()
    witness = attr.ib(default = None)
    subsets_checked = attr.ib(default = 0)


@attr.s(eq = False)
class MonteCarloEstimate:
    empirical = attr.ib()
    bound = attr.ib()
    sigma = attr.ib()
    trials = attr.ib()
    hits = attr.ib()

    @property
    def within_bound(self):
        return self.empirical <= self.bound + 3 * self.sigma


@attr.s(eq = False)
class DiscreteMeasure:
    """ sum of weighted Dirac atoms on the unit circle [0, 1) """
    locations = attr.ib(converter = lambda v: np.asarray(v, dtype = float).reshape(-1))
    weights = attr.ib(converter = lambda v: np.asarray(v, dtype = float).reshape(-1))

    def __attrs_post_init__(self):
        if self.locations.size != self.weights.size:
            raise DimensionError('measure locations and weights differ in length')
        if np.any(self.locations < 0) or np.any(self.locations >= 1):
            raise DomainError('atom locations must lie in [0, 1)')
        if np.any(self.weights <= 0) or not np.all(np.isfinite(self.weights)):
            raise DomainError('atom weights must be positive and finite')

    @classmethod
    def from_index_set(cls, P):
        """ atoms of unit mass at p/m for p in P """
        m = P.universe_size
        return cls(np.array(P.one_based(), dtype = float) / m % 1.0, np.ones(len(P)))


@attr.s(eq = False)
class TrigPolynomial:
    """ psi(s) = e^{2 pi j phi} sum_k a_k e^{-2 pi j k s}, k = 1..n """
    coefficients = attr.ib(converter = complex_vector)
    phase = attr.ib(default = 0.0)

    def __attrs_post_init__(self):
        if self.coefficients.size < 1:
            raise DimensionError('a trigonometric polynomial needs at least one coefficient')
        if not 0 <= self.phase < 1:
            raise DomainError('phase must lie in [0, 1)')

    @property
    def degree(self):
        return self.coefficients.size

    def __call__(self, s):
        s = np.asarray(s, dtype = float).reshape(-1)
        k = np.arange(1, self.degree + 1)
        kernel = np.exp(-2j * np.pi * np.outer(s, k))
        return np.exp(2j * np.pi * self.phase) * (kernel @ self.coefficients)


@attr.s(eq = False)
class PointCloud:
    points = attr.ib(converter = lambda v: np.atleast_2d(np.asarray(v, dtype = np.complex128)))

    def __attrs_post_init__(self):
        if self.points.shape[0] < 1:
            raise DimensionError('point cloud is empty')

    def as_real(self):
        # C^d is measured as R^{2d}
        return np.concatenate([self.points.real, self.points.imag], axis = 1)


@attr.s(frozen = True)
class ExperimentConfig:
    name = attr.ib()
    seed = attr.ib(default = 0)
    params = attr.ib(factory = dict)


@attr.s(eq = False)
class ExperimentReport:
    name = attr.ib()
    config = attr.ib()
    metrics = attr.ib(factory = dict)
    checks = attr.ib(factory = dict)
    wall_time = attr.ib(default = None)

    @property
    def passed(self):
        return all(self.checks.values())
