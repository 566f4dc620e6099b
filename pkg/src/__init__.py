"""
NH Persistent Current Simulator

Equilibrium persistent currents and current susceptibilities of dissipative
tight-binding systems (phase-biased SNS junctions and flux-threaded rings
coupled to fermionic reservoirs), checked against exact diagonalization of
the full Hermitian system.
"""

__version__ = "1.0.0"
__author__ = "Quantum Transport Team"
__description__ = "Non-Hermitian persistent current and susceptibility simulator"
