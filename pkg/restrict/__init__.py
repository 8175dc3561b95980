"""
Knapp-type tests of the (L_p, L_2) restriction inequality
"""

from .profile import PlancherelCheck, ProfileNorms, default_norms, plancherel_check, profile, width_factor
from .knapp import (
    CSV_COLUMNS as KNAPP_CSV_COLUMNS,
    DEFAULT_CAP_CONSTANT,
    DEFAULT_SCALES,
    InsufficientSamplesError,
    KnappEvaluator,
    KnappFamily,
    KnappReport,
    RestrictionSample,
    check_scales,
    classify_slope,
    crossing_p,
    geometric_scales,
    knapp_family,
    knapp_scan,
    predicted_exponent,
    restriction_sample,
)

__all__ = [
    'DEFAULT_CAP_CONSTANT',
    'DEFAULT_SCALES',
    'InsufficientSamplesError',
    'KNAPP_CSV_COLUMNS',
    'KnappEvaluator',
    'KnappFamily',
    'KnappReport',
    'PlancherelCheck',
    'ProfileNorms',
    'RestrictionSample',
    'check_scales',
    'classify_slope',
    'crossing_p',
    'default_norms',
    'geometric_scales',
    'knapp_family',
    'knapp_scan',
    'plancherel_check',
    'predicted_exponent',
    'profile',
    'restriction_sample',
    'width_factor',
]
