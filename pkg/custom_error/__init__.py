from .dao_error import DaoError
from .service_error import (
    ServiceError,
    ValidationError,
    DimensionError,
    DomainError,
    VacuousBoundError,
    EnumerationLimitError,
    NotRecoverableError,
    SolverError
)

__all__ = [
    'DaoError',
    'ServiceError',
    'ValidationError',
    'DimensionError',
    'DomainError',
    'VacuousBoundError',
    'EnumerationLimitError',
    'NotRecoverableError',
    'SolverError'
]
