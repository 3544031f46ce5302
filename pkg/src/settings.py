import os

# Output
RESULTS_DIR = os.environ.get("BILISTAB_RESULTS_DIR", "results")
CSV_COLUMNS = [
    "experiment",
    "algorithm",
    "n",
    "kappa",
    "seed",
    "rel_error",
    "wall_time_s",
    "bound",
]

# Floating point model
UNIT_ROUNDOFF = 2.0 ** -53
BOUND_SLACK = 1.01  # absorbs the O(u^2) terms of the first-order bounds

# Recursion
DEFAULT_CUTOFF = 64
ACCURACY_CUTOFF = 2

# Exact oracle feasibility cap for accuracy experiments
ORACLE_MAX_N = 128

# Experiments
DEFAULT_KAPPA_EXPONENTS = (34, 36, 38, 40, 42, 44, 46, 48, 50, 53)
DEFAULT_TRIALS = 10
DEFAULT_SEED = 0
TIMING_REPEATS = 3  # best-of-k wall time
HORNER_DEGREE = 5
CNN_DEPTH = 6
CNN_SHAPES = ((25, 64), (50, 128))
FMM_SIZES = (16, 32, 64, 128)
