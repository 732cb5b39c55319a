"""Assemble every matrix a simulation needs from a NetworkSpec."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dissipation import DampingMatrix, PsdReport, check_psd, gamma_common, gamma_distinct
from .oracle import LindbladGenerator
from .spectral import (DEFAULT_TOLERANCES, DissipativeMatrix, NormalModes, Propagator, Tolerances,
                       build_hd, diagonalize_h, propagator)
from .topology import NetworkSpec, build_coupling_matrix


def damping_matrix(spec: NetworkSpec, modes: NormalModes, weak_coupling: bool = False) -> DampingMatrix:
    models = spec.models()
    if spec.reservoir_mode == "common":
        return gamma_common(modes, models, spec.overlap)
    return gamma_distinct(modes, models, bare_frequencies=spec.frequencies if weak_coupling else None)


@dataclass(frozen=True)
class Network:
    spec: NetworkSpec
    H: np.ndarray
    modes: NormalModes
    damping: DampingMatrix
    gamma: np.ndarray  # the matrix actually used (symmetrised unless asked not to)
    dm: DissipativeMatrix
    psd: PsdReport

    @classmethod
    def from_spec(cls, spec: NetworkSpec, symmetrize: bool = True, weak_coupling: bool = False,
                  tol: Tolerances = DEFAULT_TOLERANCES) -> "Network":
        H = build_coupling_matrix(spec)
        modes = diagonalize_h(H, tol)
        damping = damping_matrix(spec, modes, weak_coupling)
        gamma = damping.effective(symmetrize)
        return cls(spec, H, modes, damping, gamma, build_hd(H, gamma, tol), check_psd(gamma))

    @property
    def n(self) -> int:
        return self.spec.n

    def propagator(self, t: float, convention: str = "amplitude") -> Propagator:
        return propagator(self.dm, t, convention)

    def generator(self, cutoff, thermal=None, **kwargs) -> LindbladGenerator:
        return LindbladGenerator(self.H, self.gamma, cutoff, thermal=thermal, **kwargs)
