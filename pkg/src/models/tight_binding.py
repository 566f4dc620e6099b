"""
Tight-binding model specifications and first-quantized matrix builders.

Conventions (0-based):
    * site j of an N-site system, bond j joins sites j and j+1
    * BdG basis is (c_0 .. c_{N-1}, c^dag_0 .. c^dag_{N-1}), H = C^dag H C / 2
    * the total system orders all particle indices (system first, then each
      reservoir in the given order) before all hole indices
"""

import hashlib
import json
from dataclasses import dataclass, field, replace, asdict
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from src.utils.errors import BandError, SpecError
from src.utils.logger import get_pipeline_logger

logger = get_pipeline_logger("models")

# Ring hoppings used for the numerical results of the disordered six-site ring.
DEFAULT_RING_HOPPINGS: Tuple[float, ...] = (
    -0.859915, -0.884918, -0.918446, -0.846311, -1.19937, -0.984676,
)


class ModelKind(str, Enum):
    """Supported device geometries."""
    SNS = "sns"
    RING = "ring"


@dataclass(frozen=True)
class ModelSpec:
    """Declarative description of the device."""
    kind: ModelKind
    t: float = -1.0
    mu: float = 0.0
    phi: float = 0.0
    delta: float = 0.0
    n_left: int = 0
    n_middle: int = 0
    n_right: int = 0
    ring_hoppings: Tuple[float, ...] = field(default_factory=tuple)

    @classmethod
    def sns(cls, n_left: int, n_middle: int, n_right: int, t: float = -1.0,
            delta: float = 1.0, mu: float = 0.0, phi: float = 0.0) -> "ModelSpec":
        """Superconductor-normal-superconductor junction."""
        spec = cls(kind=ModelKind.SNS, t=t, mu=mu, phi=phi, delta=delta,
                   n_left=n_left, n_middle=n_middle, n_right=n_right)
        spec.validate()
        return spec

    @classmethod
    def ring(cls, hoppings: Sequence[float], mu: float = 0.0, phi: float = 0.0,
             t: Optional[float] = None) -> "ModelSpec":
        """Normal ring with explicit bond hoppings; bond N-1 closes the ring."""
        hoppings = tuple(float(h) for h in hoppings)
        reference = t if t is not None else (float(np.mean(hoppings)) if hoppings else -1.0)
        spec = cls(kind=ModelKind.RING, t=reference, mu=mu, phi=phi, ring_hoppings=hoppings)
        spec.validate()
        return spec

    @classmethod
    def uniform_ring(cls, n_sites: int, t: float = -1.0, mu: float = 0.0, phi: float = 0.0) -> "ModelSpec":
        return cls.ring([t] * n_sites, mu=mu, phi=phi, t=t)

    @property
    def is_bdg(self) -> bool:
        return self.kind == ModelKind.SNS

    @property
    def doubling(self) -> int:
        return 2 if self.is_bdg else 1

    @property
    def n_sites(self) -> int:
        if self.is_bdg:
            return self.n_left + self.n_middle + self.n_right
        return len(self.ring_hoppings)

    @property
    def dim(self) -> int:
        return self.doubling * self.n_sites

    @property
    def normal_sites(self) -> range:
        """Sites without pairing (every ring site)."""
        if self.is_bdg:
            return range(self.n_left, self.n_left + self.n_middle)
        return range(self.n_sites)

    @property
    def normal_bonds(self) -> range:
        """Bonds where the current operator is defined.

        For SNS these are the bonds touching a normal site, including the two
        bonds at the interfaces with the superconductors.
        """
        if self.is_bdg:
            return range(self.n_left - 1, self.n_left + self.n_middle)
        return range(self.n_sites)

    @property
    def default_current_bond(self) -> int:
        """First bond of the normal segment (SNS) or bond 0 (ring)."""
        return self.normal_bonds[0]

    @property
    def flux_bond(self) -> Optional[int]:
        """Ring bond carrying the phase, None for SNS."""
        return None if self.is_bdg else self.n_sites - 1

    def pairing_bonds(self) -> Tuple[range, range]:
        """Left and right superconducting bonds."""
        n = self.n_sites
        return range(0, self.n_left - 1), range(self.n_left + self.n_middle, n - 1)

    def with_phi(self, phi: float) -> "ModelSpec":
        return replace(self, phi=float(phi))

    def validate(self) -> None:
        """Raise SpecError for inconsistent specifications."""
        if self.is_bdg:
            if min(self.n_left, self.n_middle, self.n_right) < 1:
                raise SpecError(
                    f"SNS segments need at least one site each, got "
                    f"({self.n_left}, {self.n_middle}, {self.n_right})"
                )
            if self.t == 0.0:
                raise SpecError("SNS hopping t must be nonzero")
            if self.delta < 0.0:
                raise SpecError(f"pairing amplitude must be >= 0, got {self.delta}")
        else:
            if len(self.ring_hoppings) < 3:
                raise SpecError(f"a ring needs at least 3 sites, got {len(self.ring_hoppings)}")
            if any(h == 0.0 for h in self.ring_hoppings):
                raise SpecError("ring hoppings must all be nonzero")

    def bond_hopping(self, bond: int) -> complex:
        """Complex hopping t_j exp(-i phi_j) of a normal-state bond."""
        if self.is_bdg:
            return complex(self.t)
        t_j = self.ring_hoppings[bond]
        if bond == self.flux_bond:
            return t_j * np.exp(-1j * self.phi)
        return complex(t_j)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['kind'] = self.kind.value
        data['ring_hoppings'] = list(self.ring_hoppings)
        return data

    def fingerprint(self) -> str:
        """Hash of the phase-independent part of the spec."""
        data = self.to_dict()
        data.pop('phi')
        canonical = json.dumps(data, sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


@dataclass(frozen=True)
class ReservoirSpec:
    """Semi-infinite lead, represented by an N_E-site open chain."""
    n_sites: int
    t: float
    g: float
    attach_site: int
    kappa: float

    def validate(self, n_system_sites: Optional[int] = None) -> None:
        if self.n_sites < 1:
            raise SpecError(f"reservoir needs at least one site, got {self.n_sites}")
        if self.t >= 0.0:
            raise SpecError(f"reservoir hopping must be negative, got {self.t}")
        if self.kappa > 0.0:
            raise SpecError(f"tunnel amplitude kappa must be <= 0, got {self.kappa}")
        if abs(self.g / 2.0) >= abs(self.t):
            raise BandError(f"|g/2| = {abs(self.g / 2.0):g} must lie inside the band |t| = {abs(self.t):g}")
        if n_system_sites is not None and not 0 <= self.attach_site < n_system_sites:
            raise SpecError(f"attach site {self.attach_site} outside the system (0..{n_system_sites - 1})")

    def with_kappa(self, kappa: float) -> "ReservoirSpec":
        return replace(self, kappa=float(kappa))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def disordered_ring_hoppings(n_sites: int, t: float = -1.0, seed: int = 0,
                             low: float = 0.7, high: float = 1.3) -> Tuple[float, ...]:
    """Hoppings t_j = t * Unif(low, high), reproducible from the seed."""
    rng = np.random.default_rng(seed)
    return tuple(float(x) for x in t * rng.uniform(low, high, size=n_sites))


def _open_chain(n_sites: int, hopping: float, onsite: float) -> np.ndarray:
    chain = np.zeros((n_sites, n_sites), dtype=complex)
    idx = np.arange(n_sites - 1)
    chain[idx, idx + 1] = hopping
    chain[idx + 1, idx] = hopping
    chain[np.arange(n_sites), np.arange(n_sites)] = onsite
    return chain


def build_sns(spec: ModelSpec) -> np.ndarray:
    """
    BdG matrix of the SNS junction.

    Args:
        spec: SNS model spec

    Returns:
        2N x 2N Hermitian matrix [[h, D], [D^dag, -h^*]]
    """
    if spec.kind != ModelKind.SNS:
        raise SpecError(f"build_sns needs an SNS spec, got {spec.kind.value}")
    spec.validate()

    n = spec.n_sites
    particle = _open_chain(n, spec.t, spec.mu)
    pairing = np.zeros((n, n), dtype=complex)
    left_bonds, right_bonds = spec.pairing_bonds()
    for bond in left_bonds:
        pairing[bond, bond + 1] = spec.delta
        pairing[bond + 1, bond] = -spec.delta
    right_phase = np.exp(-1j * spec.phi)
    for bond in right_bonds:
        pairing[bond, bond + 1] = spec.delta * right_phase
        pairing[bond + 1, bond] = -spec.delta * right_phase

    return np.block([
        [particle, pairing],
        [pairing.conj().T, -particle.conj()],
    ])


def build_ring(spec: ModelSpec) -> np.ndarray:
    """N x N ring matrix; the closing bond (N-1, 0) carries exp(-i phi)."""
    if spec.kind != ModelKind.RING:
        raise SpecError(f"build_ring needs a ring spec, got {spec.kind.value}")
    spec.validate()

    n = spec.n_sites
    matrix = np.zeros((n, n), dtype=complex)
    for bond in range(n):
        hop = spec.bond_hopping(bond)
        matrix[bond, (bond + 1) % n] += hop
        matrix[(bond + 1) % n, bond] += np.conj(hop)
    matrix[np.arange(n), np.arange(n)] = spec.mu
    return matrix


def build_system(spec: ModelSpec) -> np.ndarray:
    """Dispatch to the builder matching ``spec.kind``."""
    if spec.is_bdg:
        return build_sns(spec)
    return build_ring(spec)


def build_reservoir(spec: ReservoirSpec) -> np.ndarray:
    """N_E x N_E open chain with hopping t and on-site g."""
    spec.validate()
    return _open_chain(spec.n_sites, spec.t, spec.g)


def validate_reservoirs(system: ModelSpec, reservoirs: Sequence[ReservoirSpec]) -> None:
    """Per-reservoir validation plus distinct attach sites."""
    seen = set()
    for reservoir in reservoirs:
        reservoir.validate(system.n_sites)
        if reservoir.attach_site in seen:
            raise SpecError(f"two reservoirs attached to site {reservoir.attach_site}")
        seen.add(reservoir.attach_site)


def total_dimension(system: ModelSpec, reservoirs: Sequence[ReservoirSpec]) -> int:
    return system.doubling * (system.n_sites + sum(r.n_sites for r in reservoirs))


def build_total(system: ModelSpec, reservoirs: Sequence[ReservoirSpec]) -> np.ndarray:
    """
    Hermitian matrix of device + finite reservoirs + tunnel couplings.

    For SNS the reservoir and tunnel blocks enter the hole sector with the
    opposite sign (tau_z extension); pairing lives on the device only.
    """
    validate_reservoirs(system, reservoirs)
    h_sys = build_system(system)
    n = system.n_sites
    m = n + sum(r.n_sites for r in reservoirs)

    particle = np.zeros((m, m), dtype=complex)
    particle[:n, :n] = h_sys[:n, :n]
    offset = n
    for reservoir in reservoirs:
        block = slice(offset, offset + reservoir.n_sites)
        particle[block, block] = build_reservoir(reservoir)
        particle[reservoir.attach_site, offset] = reservoir.kappa
        particle[offset, reservoir.attach_site] = reservoir.kappa
        offset += reservoir.n_sites

    logger.debug(f"Built total Hamiltonian: {system.doubling * m} x {system.doubling * m}")
    if not system.is_bdg:
        return particle

    total = np.zeros((2 * m, 2 * m), dtype=complex)
    total[:m, :m] = particle
    total[m:, m:] = -particle.conj()
    total[:n, m:m + n] = h_sys[:n, n:]
    total[m:m + n, :n] = h_sys[n:, :n]
    return total


def bond_current_matrix(dim: int, i: int, j: int, hopping: complex) -> np.ndarray:
    """First-quantized -i(hop |i><j| - hop^* |j><i|) of a single bond."""
    matrix = np.zeros((dim, dim), dtype=complex)
    matrix[i, j] = -1j * hopping
    matrix[j, i] = 1j * np.conj(hopping)
    return matrix


def _bdg_embed(particle_block: np.ndarray, hole_offset: int, dim: int, n: int) -> np.ndarray:
    matrix = np.zeros((dim, dim), dtype=complex)
    matrix[:n, :n] = particle_block
    matrix[hole_offset:hole_offset + n, hole_offset:hole_offset + n] = -particle_block.T
    return matrix


def check_current_bond(system: ModelSpec, bond: int) -> None:
    if bond not in system.normal_bonds:
        bonds = system.normal_bonds
        raise SpecError(f"bond {bond} outside the allowed range {bonds.start}..{bonds.stop - 1}")


def current_operator(system: ModelSpec, bond: Optional[int] = None) -> np.ndarray:
    """
    Site-resolved current operator in the device basis.

    Args:
        system: Device spec (phase included for the ring's closing bond)
        bond: Bond index, defaults to the first bond of the normal segment

    Returns:
        Hermitian, traceless matrix with J = C^dag J C / doubling
    """
    bond = system.default_current_bond if bond is None else bond
    check_current_bond(system, bond)
    n = system.n_sites
    particle = bond_current_matrix(n, bond, (bond + 1) % n, system.bond_hopping(bond))
    if not system.is_bdg:
        return particle
    return _bdg_embed(particle, n, 2 * n, n)


def total_current_operator(system: ModelSpec, reservoirs: Sequence[ReservoirSpec],
                           bond: Optional[int] = None) -> np.ndarray:
    """Device current operator embedded in the basis of :func:`build_total`."""
    bond = system.default_current_bond if bond is None else bond
    check_current_bond(system, bond)
    n = system.n_sites
    m = n + sum(r.n_sites for r in reservoirs)
    particle = bond_current_matrix(n, bond, (bond + 1) % n, system.bond_hopping(bond))
    if not system.is_bdg:
        embedded = np.zeros((m, m), dtype=complex)
        embedded[:n, :n] = particle
        return embedded
    return _bdg_embed(particle, m, 2 * m, n)


def tunnel_current_operator(system: ModelSpec, reservoirs: Sequence[ReservoirSpec], index: int) -> np.ndarray:
    """Current from the device into reservoir ``index`` across its tunnel bond."""
    reservoir = reservoirs[index]
    n = system.n_sites
    m = n + sum(r.n_sites for r in reservoirs)
    edge = n + sum(r.n_sites for r in reservoirs[:index])
    particle = bond_current_matrix(m, reservoir.attach_site, edge, reservoir.kappa)
    if not system.is_bdg:
        return particle
    total = np.zeros((2 * m, 2 * m), dtype=complex)
    total[:m, :m] = particle
    total[m:, m:] = -particle.T
    return total