from .coherent import (
    CoherentSuperposition,
    DecoherenceTable,
    EvolvedCoherentState,
    coherent_overlap,
    continuum_superposition,
    decoherence_coefficients,
    evolve_coherent,
    initial_expansion,
    normalize_superposition,
    overlap_trace,
    recurrence_probability,
    reduce_coherent,
    transfer_probability,
)
from .entropy import EntropyReport, kernel_purity, linear_entropies
from .fock import FockSuperposition, environment_map, evolve_fock
from .statefile import parse_state_file, serialize_state, state_from_dict, state_to_dict

__all__ = [
    "CoherentSuperposition", "DecoherenceTable", "EvolvedCoherentState", "coherent_overlap",
    "continuum_superposition", "decoherence_coefficients", "evolve_coherent", "initial_expansion",
    "normalize_superposition", "overlap_trace", "recurrence_probability", "reduce_coherent",
    "transfer_probability", "EntropyReport", "kernel_purity", "linear_entropies",
    "FockSuperposition", "environment_map", "evolve_fock", "parse_state_file", "serialize_state",
    "state_from_dict", "state_to_dict",
]
