"""Device models, reservoirs and the effective non-Hermitian Hamiltonian."""

from .tight_binding import (
    DEFAULT_RING_HOPPINGS,
    ModelKind,
    ModelSpec,
    ReservoirSpec,
    build_sns,
    build_ring,
    build_system,
    build_reservoir,
    build_total,
    current_operator,
    total_current_operator,
    tunnel_current_operator,
    disordered_ring_hoppings,
    total_dimension,
)
from .self_energy import (
    Branch,
    SelfEnergyBlock,
    EffectiveHamiltonian,
    edge_green,
    self_energy_at,
    self_energy_wideband,
    effective_hamiltonian,
    sns_reservoirs,
)

__all__ = [
    'DEFAULT_RING_HOPPINGS',
    'ModelKind',
    'ModelSpec',
    'ReservoirSpec',
    'build_sns',
    'build_ring',
    'build_system',
    'build_reservoir',
    'build_total',
    'current_operator',
    'total_current_operator',
    'tunnel_current_operator',
    'disordered_ring_hoppings',
    'total_dimension',
    'Branch',
    'SelfEnergyBlock',
    'EffectiveHamiltonian',
    'edge_green',
    'self_energy_at',
    'self_energy_wideband',
    'effective_hamiltonian',
    'sns_reservoirs',
]
