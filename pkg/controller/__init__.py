from .bounds_controller import create_bounds_commands
from .recovery_controller import create_recovery_commands
from .verify_controller import create_verify_commands
from .experiment_controller import create_experiment_commands
from .gen_controller import create_gen_commands

__all__ = [
    'create_bounds_commands',
    'create_recovery_commands',
    'create_verify_commands',
    'create_experiment_commands',
    'create_gen_commands'
]
