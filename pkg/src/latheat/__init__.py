"""Semi-classical discrete fractional heat equation on truncated lattices."""

__version__ = "0.1.0"

from .coefficients import (
    CoefficientModel,
    Constant,
    LogSchedule,
    Mollifier,
    Oscillation,
    Polynomial,
    PowerSchedule,
    SampledCoefficient,
    moderateness_bounds,
    regularize,
    sample,
    strict_positivity_check,
)
from .errors import (
    AliasingError,
    GridResolutionError,
    InvalidInputError,
    LatticeHeatError,
    NumericalError,
    PositivityError,
    SpecMismatchError,
    SymmetryError,
)
from .experiments import (
    BandLimited,
    HeatProblem,
    LimitProblem,
    NetReport,
    consistency_experiment,
    semiclassical_experiment,
    uniqueness_experiment,
    very_weak_solve,
)
from .fourier import forward, inverse, sobolev_norm
from .fraclap import apply_spectral, apply_stencil, continuous_symbol, stencil_coefficients, symbol
from .lattice import GridFunction, LatticeSpec, SpectralFunction, weighted_norm
from .solver import SeparableSource, SolveConfig, Trajectory, energy, solve, verify_estimate, wellposedness_constant

__all__ = [name for name in dir() if not name.startswith("_")]
