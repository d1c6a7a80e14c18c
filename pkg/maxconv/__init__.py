"""Classical, free and Boolean max-convolution calculus with certified rate measurements"""
from maxconv.distributions import (Cdf, ConvolutionKind, EvDistribution, EvFamily, GridCdf, dagum, ev_cdf,  # noqa: F401
                                   ev_density, ev_quantile, ev_survival, frechet, limit_law, pareto, scale_cdf)
from maxconv.semigroup import (boolean_combine, boolean_power_point, classical_power_point, free_power_point,  # noqa: F401
                               power_cdf, x_inv, x_inverse_transform, x_map, x_transform)
from maxconv.version import __version__  # noqa: F401
