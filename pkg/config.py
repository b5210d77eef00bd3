# splitting solver defaults (recovery)
SOLVER_MAX_ITERATIONS = 50000
SOLVER_ABS_TOLERANCE  = 1e-8
SOLVER_REL_TOLERANCE  = 1e-6
SOLVER_PENALTY        = 1.0

# numerical tolerances
COLUMN_NORM_TOLERANCE    = 1e-8
UNITARY_TOLERANCE        = 1e-10
DFT_TOLERANCE            = 1e-10
RANK_TOLERANCE           = 1e-10
INJECTIVITY_SV_TOLERANCE = 1e-8

# exhaustive search guards
P0_MAX_COLUMNS          = 24
INJECTIVITY_MAX_COLUMNS = 16

DEFAULT_SEED   = 0
VERIFY_WORKERS = 1

LOG_LEVEL = 'WARNING'
