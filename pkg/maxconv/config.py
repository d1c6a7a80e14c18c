"""Key configuration details"""
import logging
import os

logger = logging.getLogger(__name__)

# Von Mises functionals refuse to divide by F(x) or 1-F(x) below this value
POLE_GUARD = 1e-300

# Certified sup engine
CELL_BUDGET = 10 ** 7
INITIAL_CELLS = 512
MAX_REFINEMENTS = 400

# Probability mass left outside the window [x_lo, x_hi] of a sup computation
TAIL_MASS = 1e-8

# Monotone root finding used for rho and t_min
MAX_DOUBLINGS = 200
BISECTION_RTOL = 1e-12
RHO_RESIDUAL = 1e-10

# Slack allowed in the sandwich and chain inequalities
SANDWICH_SLACK = 1e-12

# Acceptance suites only assert bounds for n at or above max(onset, ONSET_FLOOR)
ONSET_FLOOR = 1000

# Environment variable capping the worker count
THREADS_ENV = "MAXCONV_THREADS"


def get_thread_count() -> int:
    """Number of workers to use for parallel evaluation

    Reads ``MAXCONV_THREADS`` and falls back to the number of available CPUs

    Returns:
        (int) Positive worker count
    """
    default = os.cpu_count() or 1
    value = os.environ.get(THREADS_ENV)
    if value is None:
        return default
    try:
        count = int(value)
    except ValueError:
        logger.warning(f'Ignoring {THREADS_ENV}={value!r}: not an integer')
        return default
    if count < 1:
        logger.warning(f'Ignoring {THREADS_ENV}={value!r}: must be at least 1')
        return default
    return count
