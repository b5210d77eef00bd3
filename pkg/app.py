import logging.config

from flask import Flask

from model          import (
    MatrixDao,
    ProblemDao,
    ReportDao
)
from model.entities import SolverConfig
from service        import (
    UncertaintyService,
    RecoveryService,
    ExperimentService,
    VerifyService
)
from controller     import (
    create_bounds_commands,
    create_recovery_commands,
    create_verify_commands,
    create_experiment_commands,
    create_gen_commands
)


def configure_logging(level):
    # stdout carries command output, so every log record goes to stderr
    logging.config.dictConfig({
        'version': 1,
        'disable_existing_loggers': False,
        'formatters': {
            'default': {'format': '%(asctime)s %(levelname)s %(name)s: %(message)s'}
        },
        'handlers': {
            'stderr': {
                'class': 'logging.StreamHandler',
                'stream': 'ext://sys.stderr',
                'formatter': 'default'
            }
        },
        'root': {'level': level, 'handlers': ['stderr']}
    })


def create_app(test_config = None):
    app = Flask(__name__)

    if test_config is None:
        app.config.from_pyfile('config.py')
    else:
        app.config.update(test_config)

    configure_logging(app.config.get('LOG_LEVEL', 'WARNING'))

    solver_defaults = SolverConfig(
        max_iterations = app.config['SOLVER_MAX_ITERATIONS'],
        abs_tolerance = app.config['SOLVER_ABS_TOLERANCE'],
        rel_tolerance = app.config['SOLVER_REL_TOLERANCE'],
        penalty = app.config['SOLVER_PENALTY'],
        seed = app.config['DEFAULT_SEED']
    )
    default_seed = app.config['DEFAULT_SEED']

    # Persistence layer
    matrix_dao = MatrixDao()
    problem_dao = ProblemDao(matrix_dao, app.config['COLUMN_NORM_TOLERANCE'])
    report_dao = ReportDao()

    # Business layer
    uncertainty_service = UncertaintyService(matrix_dao, app.config['UNITARY_TOLERANCE'], app.config['DFT_TOLERANCE'])
    recovery_service = RecoveryService(problem_dao, uncertainty_service, solver_defaults,
                                       app.config['RANK_TOLERANCE'], app.config['P0_MAX_COLUMNS'])
    experiment_service = ExperimentService(recovery_service, app.config['INJECTIVITY_SV_TOLERANCE'],
                                           app.config['INJECTIVITY_MAX_COLUMNS'])
    verify_service = VerifyService(uncertainty_service, recovery_service, experiment_service,
                                   app.config['VERIFY_WORKERS'])

    app.extensions['uncertainty_service'] = uncertainty_service
    app.extensions['recovery_service'] = recovery_service
    app.extensions['experiment_service'] = experiment_service
    app.extensions['verify_service'] = verify_service

    # Presentation layer
    app.register_blueprint(create_bounds_commands(uncertainty_service, report_dao))
    app.register_blueprint(create_recovery_commands(recovery_service, uncertainty_service, matrix_dao, report_dao))
    app.register_blueprint(create_verify_commands(verify_service, report_dao, default_seed))
    app.register_blueprint(create_experiment_commands(experiment_service, problem_dao, report_dao, default_seed))
    app.register_blueprint(create_gen_commands(experiment_service, problem_dao, matrix_dao, report_dao, default_seed))

    return app
