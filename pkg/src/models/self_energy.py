"""
Reservoir edge Green's function, wide-band self-energy and the effective
non-Hermitian Hamiltonian H_eff = H_sys + Sigma(0).
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from src.utils.errors import BandError, SpecError
from src.utils.logger import get_pipeline_logger
from src.models.tight_binding import ModelSpec, ReservoirSpec, build_system, validate_reservoirs

logger = get_pipeline_logger("self_energy")


class Branch(str, Enum):
    RETARDED = "retarded"
    ADVANCED = "advanced"


@dataclass(frozen=True)
class SelfEnergyBlock:
    """Local self-energy of one reservoir on its attach site."""
    value_particle: complex
    value_hole: Optional[complex]
    site: int


@dataclass(frozen=True, eq=False)
class EffectiveHamiltonian:
    """Dense H_eff together with the bookkeeping downstream code needs."""
    matrix: np.ndarray
    system: ModelSpec
    reservoirs: Tuple[ReservoirSpec, ...] = ()

    @property
    def doubling(self) -> int:
        return self.system.doubling

    @property
    def phi(self) -> float:
        return self.system.phi

    @property
    def n_sites(self) -> int:
        return self.system.n_sites

    @property
    def normal_bonds(self) -> range:
        return self.system.normal_bonds

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def edge_green(omega: float, t: float, g: float, branch: Branch = Branch.RETARDED) -> complex:
    """
    Edge Green's function of a semi-infinite chain inside its band.

    Args:
        omega: Real frequency
        t: Chain hopping (< 0)
        g: Chain on-site potential
        branch: Retarded (-i sqrt) or advanced (+i sqrt)

    Returns:
        [(omega - g)/2 -+ i sqrt(t^2 - ((omega - g)/2)^2)] / t^2
    """
    if t >= 0.0:
        raise SpecError(f"chain hopping must be negative, got {t}")
    if abs(omega - g) > 2.0 * abs(t):
        raise BandError(f"|omega - g| = {abs(omega - g):g} lies outside the band 2|t| = {2 * abs(t):g}")

    half = 0.5 * (omega - g)
    root = np.sqrt(t * t - half * half)
    sign = -1.0 if Branch(branch) == Branch.RETARDED else 1.0
    return complex(half + sign * 1j * root) / (t * t)


def self_energy_at(reservoir: ReservoirSpec, omega: float, doubling: int = 1) -> SelfEnergyBlock:
    """
    Frequency-resolved self-energy kappa^2 g_edge(omega) of one reservoir.

    The hole sector sees the reservoir as -h_res, so its retarded function
    at omega is -g_edge^A(-omega).
    """
    reservoir.validate()
    kappa2 = reservoir.kappa ** 2
    particle = kappa2 * edge_green(omega, reservoir.t, reservoir.g, Branch.RETARDED)
    hole = None
    if doubling == 2:
        hole = -kappa2 * edge_green(-omega, reservoir.t, reservoir.g, Branch.ADVANCED)
    return SelfEnergyBlock(value_particle=particle, value_hole=hole, site=reservoir.attach_site)


def self_energy_wideband(reservoir: ReservoirSpec, doubling: int = 1) -> SelfEnergyBlock:
    """
    Wide-band self-energy Sigma(0) = -kappa^2/t^2 (tau_z g/2 + i sqrt(t^2 - (g/2)^2)).

    Args:
        reservoir: Reservoir spec with |g/2| < |t|
        doubling: 2 adds the hole entry with the tau_z sign on the real part

    Returns:
        SelfEnergyBlock at the attach site
    """
    if doubling not in (1, 2):
        raise SpecError(f"doubling must be 1 or 2, got {doubling}")
    reservoir.validate()

    t2 = reservoir.t ** 2
    scale = -(reservoir.kappa ** 2) / t2
    root = np.sqrt(t2 - (reservoir.g / 2.0) ** 2)
    particle = complex(scale * (reservoir.g / 2.0 + 1j * root))
    hole = complex(scale * (-reservoir.g / 2.0 + 1j * root)) if doubling == 2 else None
    return SelfEnergyBlock(value_particle=particle, value_hole=hole, site=reservoir.attach_site)


def self_energy_matrix(system: ModelSpec, reservoirs: Sequence[ReservoirSpec]) -> np.ndarray:
    """Diagonal Sigma(0) in the device basis."""
    validate_reservoirs(system, reservoirs)
    n = system.n_sites
    sigma = np.zeros((system.dim, system.dim), dtype=complex)
    for reservoir in reservoirs:
        block = self_energy_wideband(reservoir, system.doubling)
        sigma[block.site, block.site] += block.value_particle
        if block.value_hole is not None:
            sigma[n + block.site, n + block.site] += block.value_hole
    return sigma


def effective_hamiltonian(system: ModelSpec, reservoirs: Sequence[ReservoirSpec]) -> EffectiveHamiltonian:
    """
    Assemble H_eff = H_sys + Sigma(0).

    Args:
        system: Device spec at the desired phase
        reservoirs: Reservoirs in the wide-band limit

    Returns:
        EffectiveHamiltonian
    """
    matrix = build_system(system) + self_energy_matrix(system, reservoirs)
    logger.debug(f"H_eff at phi={system.phi:.6f}: dim {matrix.shape[0]}, {len(reservoirs)} reservoir(s)")
    return EffectiveHamiltonian(matrix=matrix, system=system, reservoirs=tuple(reservoirs))


def sns_reservoirs(system: ModelSpec, n_sites: int = 101, t: float = -1.0, g: float = 0.0,
                   kappa: float = -0.4) -> Tuple[ReservoirSpec, ReservoirSpec]:
    """The two identical reservoirs attached at both ends of an SNS junction."""
    left = ReservoirSpec(n_sites=n_sites, t=t, g=g, attach_site=0, kappa=kappa)
    right = ReservoirSpec(n_sites=n_sites, t=t, g=g, attach_site=system.n_sites - 1, kappa=kappa)
    return left, right
