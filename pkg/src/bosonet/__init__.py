"""Coupled dissipative quantum harmonic oscillator networks of arbitrary topology."""

from .dissipation import (DampingMatrix, Lorentzian, PowerLaw, WhiteNoise, check_psd, gamma_common,
                          gamma_distinct)
from .dynamics import (CoherentSuperposition, FockSuperposition, decoherence_coefficients, evolve_coherent,
                       evolve_fock, linear_entropies, normalize_superposition, recurrence_probability,
                       reduce_coherent, transfer_probability)
from .network import Network
from .spectral import Propagator, build_hd, diagonalize_h, propagator
from .topology import (CouplingSpec, NetworkSpec, OscillatorSpec, Reservoir, build_coupling_matrix,
                       generate_topology, parse_network_file, serialize_network)

__version__ = "0.1.0"

__all__ = [
    "DampingMatrix", "Lorentzian", "PowerLaw", "WhiteNoise", "check_psd", "gamma_common", "gamma_distinct",
    "CoherentSuperposition", "FockSuperposition", "decoherence_coefficients", "evolve_coherent", "evolve_fock",
    "linear_entropies", "normalize_superposition", "recurrence_probability", "reduce_coherent",
    "transfer_probability", "Network", "Propagator", "build_hd", "diagonalize_h", "propagator",
    "CouplingSpec", "NetworkSpec", "OscillatorSpec", "Reservoir", "build_coupling_matrix",
    "generate_topology", "parse_network_file", "serialize_network", "__version__",
]
