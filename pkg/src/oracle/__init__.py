"""Exact-diagonalization reference for closed Hermitian systems."""

from .hermitian_oracle import (
    DIM_CAP,
    HermitianSpectrum,
    BogoliubovAmplitudes,
    diagonalize_total,
    exact_current,
    exact_site_currents,
    exact_tunnel_current,
    exact_ground_energy_current,
    exact_free_energy_current,
    bogoliubov_current_amplitudes,
)

__all__ = [
    'DIM_CAP',
    'HermitianSpectrum',
    'BogoliubovAmplitudes',
    'diagonalize_total',
    'exact_current',
    'exact_site_currents',
    'exact_tunnel_current',
    'exact_ground_energy_current',
    'exact_free_energy_current',
    'bogoliubov_current_amplitudes',
]
