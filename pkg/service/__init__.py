from .uncertainty_service import UncertaintyService
from .recovery_service import RecoveryService
from .experiment_service import ExperimentService
from .verify_service import VerifyService

__all__ = [
    'UncertaintyService',
    'RecoveryService',
    'ExperimentService',
    'VerifyService'
]
