"""
Oscillatory integrals over graph surfaces

Fourier transform of the surface measure psi dS, its decay-exponent fit and
the Gamma-function bound used for the analytic continuation.
"""

from .surface import (
    BUMP_KINDS,
    SurfacePatch,
    radial_mass,
    radial_oracle,
    stationary_phase_amplitude,
)
from .quadrature import (
    ConvergenceError,
    QuadratureBudgetError,
    QuadratureResult,
    SurfaceQuadrature,
    composite_gauss_legendre,
    fourier_surface_measure,
)
from .decay import (
    CSV_COLUMNS as DECAY_CSV_COLUMNS,
    DecayFit,
    DecaySample,
    DirectionSlope,
    decay_directions,
    decay_fit,
    fit_loglog,
    magnitude_grid,
)
from .gamma_check import gamma_bound_check, gamma_ratio

__all__ = [
    'BUMP_KINDS',
    'ConvergenceError',
    'DECAY_CSV_COLUMNS',
    'DecayFit',
    'DecaySample',
    'DirectionSlope',
    'QuadratureBudgetError',
    'QuadratureResult',
    'SurfacePatch',
    'SurfaceQuadrature',
    'composite_gauss_legendre',
    'decay_directions',
    'decay_fit',
    'fit_loglog',
    'fourier_surface_measure',
    'gamma_bound_check',
    'gamma_ratio',
    'magnitude_grid',
    'radial_mass',
    'radial_oracle',
    'stationary_phase_amplitude',
]
