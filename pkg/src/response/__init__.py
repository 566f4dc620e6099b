"""Linear-response current susceptibility."""

from .susceptibility import (
    DEFAULT_ETA,
    SusceptibilityMethod,
    SusceptibilityMap,
    p_integral,
    susceptibility_quads,
    im_susceptibility_nh,
    im_susceptibility_nh_broadened,
    lorentzian_broaden,
    map_deviation,
    susceptibility_exact,
)

__all__ = [
    'DEFAULT_ETA',
    'SusceptibilityMethod',
    'SusceptibilityMap',
    'p_integral',
    'susceptibility_quads',
    'im_susceptibility_nh',
    'im_susceptibility_nh_broadened',
    'lorentzian_broaden',
    'map_deviation',
    'susceptibility_exact',
]
