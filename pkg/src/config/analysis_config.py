"""
Analysis Configuration
Centralized numerical tolerances, caps and workload defaults.

Every constant can be overridden from the environment (or a .env file)
with the JUMPPAT_ prefix, e.g. JUMPPAT_TOL_RANK=1e-9.
"""
import os

from dotenv import load_dotenv

load_dotenv()


def _env_float(name: str, default: float) -> float:
    value = os.getenv(f"JUMPPAT_{name}")
    return float(value) if value not in (None, "") else default


def _env_int(name: str, default: int) -> int:
    value = os.getenv(f"JUMPPAT_{name}")
    return int(float(value)) if value not in (None, "") else default


def _env_bool(name: str, default: bool) -> bool:
    value = os.getenv(f"JUMPPAT_{name}")
    if value in (None, ""):
        return default
    return value.strip().lower() in ("1", "true", "yes", "on")


# ==================== Linear Algebra Tolerances ====================

# Relative singular-value threshold for kernel extraction (null_vector)
TOL_RANK = _env_float("TOL_RANK", 1e-10)

# Eigenvector matrices with condition number above this are treated as defective
COND_MAX = _env_float("COND_MAX", 1e12)

# Smallest eigenvalue still accepted as positive semidefinite
TOL_PSD = _env_float("TOL_PSD", 1e-10)

# Tolerance used when checking Hermiticity of user Hamiltonians
TOL_HERMITIAN = _env_float("TOL_HERMITIAN", 1e-12)

# ==================== Probability Handling ====================

# Floating negativity down to -PROB_CLAMP_TOL is clamped to zero
PROB_CLAMP_TOL = _env_float("PROB_CLAMP_TOL", 1e-12)

# Per-step conditional probabilities at or below this are impossible events
ZERO_PROBABILITY_TOL = _env_float("ZERO_PROBABILITY_TOL", 1e-12)

# Maximum |alphabet|^N tuples enumerated by full_distribution / future_signature
ENUMERATION_CAP = _env_int("ENUMERATION_CAP", 2 ** 16)

# ==================== Drazin Cross-Check ====================

# Max-norm deviation above which the Drazin identities are reported inconsistent
DRAZIN_TOL = _env_float("DRAZIN_TOL", 1e-8)

# ==================== Pattern Detection ====================

# Breadth-first closure gives up after this many distinct states
MAX_STATES = _env_int("MAX_STATES", 10 ** 4)

# Exact states whose denominators exceed this many bits are truncated
DENOMINATOR_BIT_BUDGET = _env_int("DENOMINATOR_BIT_BUDGET", 2 ** 16)

# Fraction of trials that must revisit some state for `recurring`
RECUR_FRACTION = _env_float("RECUR_FRACTION", 0.9)
RECUR_TRIALS = _env_int("RECUR_TRIALS", 20)
RECUR_STEPS = _env_int("RECUR_STEPS", 200)

# Number of repeated states tried as closure seeds
CLOSURE_ATTEMPTS = _env_int("CLOSURE_ATTEMPTS", 2)

# Trace-distance tolerance of the approximate state store
TOL_MATCH = _env_float("TOL_MATCH", 1e-5)

# ==================== Clustering ====================

# Length of the predicted-future window used as clustering feature
HORIZON = _env_int("HORIZON", 6)

# Cluster-graph edges lighter than this are pruned
WEIGHT_MIN = _env_float("WEIGHT_MIN", 0.02)

# Trajectory steps discarded before sampling states
BURN_IN = _env_int("BURN_IN", 200)

# Number of post-burn-in states sampled for clustering
SAMPLE_COUNT = _env_int("SAMPLE_COUNT", 2000)

# ==================== Output ====================

# Significant digits of every float written to CSV
CSV_SIGNIFICANT_DIGITS = _env_int("CSV_SIGNIFICANT_DIGITS", 12)

# ==================== Performance Settings ====================

# Worker bound for enumeration, ensembles and signature computation
MAX_THREADS = _env_int("THREADS", 4)

# ==================== Logging Settings ====================

# Detailed progress output from services (verbose)
VERBOSE_LOGGING = _env_bool("VERBOSE", False)


def get_analysis_profile(profile: str = "balanced") -> dict:
    """
    Get pre-configured workload profiles

    Profiles:
        - fast: small workloads for smoke runs and tests
        - balanced: defaults above (default)
        - full: long recurrence runs and the full 2000-sample clustering set

    Returns:
        Configuration dict for the profile
    """
    profiles = {
        "fast": {
            "recur_trials": 10,
            "recur_steps": 100,
            "max_states": 2000,
            "sample_count": 300,
            "burn_in": 50,
            "horizon": 4,
        },
        "balanced": {
            "recur_trials": RECUR_TRIALS,
            "recur_steps": RECUR_STEPS,
            "max_states": MAX_STATES,
            "sample_count": SAMPLE_COUNT,
            "burn_in": BURN_IN,
            "horizon": HORIZON,
        },
        "full": {
            "recur_trials": 20,
            "recur_steps": 200,
            "max_states": 10 ** 4,
            "sample_count": 2000,
            "burn_in": 200,
            "horizon": 6,
        },
    }

    return profiles.get(profile, profiles["balanced"])
