"""Complex special functions used by the current and response kernels."""

from .special_functions import (
    EULER_GAMMA,
    TOL_IM,
    log_lower,
    log_upper,
    log_gamma,
    digamma,
    f_eff_zero,
    f_eff_beta,
    fermi_dirac,
)

__all__ = [
    'EULER_GAMMA',
    'TOL_IM',
    'log_lower',
    'log_upper',
    'log_gamma',
    'digamma',
    'f_eff_zero',
    'f_eff_beta',
    'fermi_dirac',
]
