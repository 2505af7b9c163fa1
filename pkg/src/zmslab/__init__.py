"""Numerical lab for the Dirichlet divisor and zeta mean-square error terms."""
from ._accel import USE_NUMBA, backend_name, set_threads
from .divisor import (DivisorTable, build_divisor_table, d_squared_weighted_sum, delta,
                      delta_star, delta_star_normalized, integral_delta_exact,
                      integral_delta_star_exact)
from .error_terms import (ErrorTermSample, E_quad, E_star, R_quad, R_sample, integral_E_quad,
                          main_term)
from .errors import (CapacityError, ConfigError, DomainError, FitError, PersistenceError,
                     PrecisionError, ZmslabError)
from .explicit import (R_explicit, SeriesParams, TruncatedSeries, atkinson_E, atkinson_params,
                       integral_E, integral_delta, integral_delta_star, voronoi_delta,
                       voronoi_delta_star)
from .fitting import CubicFit, fit_cubic_log
from .meansquare import (MomentReport, OmegaScan, fit_global_moment, global_moment_series,
                         omega_scan, theorem_ratio_sweep, window_moment)
from .quadrature import QuadratureCheckpointStore, mean_square_integral
from .zeta import ZetaPoint, riemann_siegel_z, theta, zeta_half

__version__ = "0.1.0"
