import pytest

from app import create_app

TEST_CONFIG = {
    'TESTING': True,
    'SOLVER_MAX_ITERATIONS': 50000,
    'SOLVER_ABS_TOLERANCE': 1e-8,
    'SOLVER_REL_TOLERANCE': 1e-6,
    'SOLVER_PENALTY': 1.0,
    'COLUMN_NORM_TOLERANCE': 1e-8,
    'UNITARY_TOLERANCE': 1e-10,
    'DFT_TOLERANCE': 1e-10,
    'RANK_TOLERANCE': 1e-10,
    'INJECTIVITY_SV_TOLERANCE': 1e-8,
    'P0_MAX_COLUMNS': 24,
    'INJECTIVITY_MAX_COLUMNS': 16,
    'DEFAULT_SEED': 0,
    'VERIFY_WORKERS': 1,
    'LOG_LEVEL': 'WARNING'
}


@pytest.fixture
def app():
    return create_app(TEST_CONFIG)


@pytest.fixture
def runner(app):
    # result.stdout holds the report, result.stderr the error JSON and logs
    return app.test_cli_runner()


@pytest.fixture
def uncertainty_service(app):
    return app.extensions['uncertainty_service']


@pytest.fixture
def recovery_service(app):
    return app.extensions['recovery_service']


@pytest.fixture
def experiment_service(app):
    return app.extensions['experiment_service']


@pytest.fixture
def verify_service(app):
    return app.extensions['verify_service']
