"""Steady states of two-level atoms ultrastrongly coupled to one cavity mode.

Harmonic balance up to the third harmonic in the Coulomb and electric-dipole
gauges, pump sweeps with hysteresis, envelope dynamics of the frequency
components and parameter maps.
"""
__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .model import (Branch, Gauge, SystemParams, SteadyState, ReducedUnknowns,  # noqa: F401
                    derived_rates, reconstruct_state, structure_coefficients,
                    validate_params)
from .harmonic_balance import (Direction, SolverConfig, conventional_threshold,  # noqa: F401
                               detect_bistability, hb_residuals, hysteresis_loop,
                               linearized_threshold, multistart_solve, newton_solve,
                               pump_sweep)
