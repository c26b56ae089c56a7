"""Spontaneous emission of a two-level giant atom with modulated transition frequency."""

__version__ = "0.1.0"

from .dde_core import (AmplitudeTrajectory, NumericalError, SolverConfig, SystemParams, integrate_dde,
                       population, steady_state_constant)
from .mode_oracle import ModeGrid, OracleTrajectory, integrate_modes, norm_drift
from .modulation import (Constant, Cosine, Linear, ModulationScheme, delta_phase, dynamical_phase,
                         jacobi_anger_factor, omega_shift, parse_scheme)
from .observables import OutputFieldTrace, chirality, field_at, output_fields

__all__ = [
    "AmplitudeTrajectory", "NumericalError", "SolverConfig", "SystemParams", "integrate_dde",
    "population", "steady_state_constant",
    "ModeGrid", "OracleTrajectory", "integrate_modes", "norm_drift",
    "Constant", "Cosine", "Linear", "ModulationScheme", "delta_phase", "dynamical_phase",
    "jacobi_anger_factor", "omega_shift", "parse_scheme",
    "OutputFieldTrace", "chirality", "field_at", "output_fields",
]
