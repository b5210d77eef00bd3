class ServiceError(Exception):

    code = 'SERVICE_ERROR'

    def __init__(self, message):
        self.message = message
        super().__init__(self.message)

    def __str__(self):
        return self.code


class ValidationError(ServiceError):
    # non-unitary U, unnormalised columns, rank-deficient B
    code = 'VALIDATION_ERROR'


class DimensionError(ServiceError):
    code = 'DIMENSION_ERROR'


class DomainError(ServiceError):
    # argument outside its admissible range
    code = 'DOMAIN_ERROR'


class VacuousBoundError(ServiceError):
    """ mutual coherence is zero, the bound is infinite """
    code = 'VACUOUS_BOUND'


class EnumerationLimitError(ServiceError):
    code = 'ENUMERATION_LIMIT'


class NotRecoverableError(ServiceError):
    code = 'NOT_RECOVERABLE'

    def __init__(self, message, value):
        self.value = value
        super().__init__(message)


class SolverError(ServiceError):
    code = 'SOLVER_ERROR'

    def __init__(self, message, status = None):
        self.status = status
        super().__init__(message)
