"""Certified sup distances, inequality checks and convergence-rate experiments"""
from maxconv.ratelab.checks import (check_algebra, check_dagum_lipschitz, check_rescaling, check_sandwich,  # noqa: F401
                                    check_tail_chain, dagum_lipschitz_bound)
from maxconv.ratelab.experiments import (boolean_rate_experiment, boolean_tail_bound, classical_rate_experiment,  # noqa: F401
                                         fit_rate, free_rate_experiment, free_tail_bound, interior_bound_experiment,
                                         n_grid, onset, rate_experiment)
from maxconv.ratelab.sup import sup_distance, sup_distance_full_line, tail_window  # noqa: F401
