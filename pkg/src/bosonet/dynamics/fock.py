"""Evolution of Fock-state superpositions through the network's loss channel.

At zero temperature the network acts on creation operators as

    a_n^+  ->  sum_m Theta_mn(t) a_m^+  +  sum_e E_en b_e^+ ,

with vacuum ancillas b_e and any E satisfying E^+ E = 1 - Theta^+ Theta.  A
Fock component prod_n (a_n^+)^{k_n} / sqrt(k_n!) |0> therefore expands as a
product of multinomials in the Theta_mn; the network state is the partial
trace over the ancillas.  Photon number is conserved in the joint system, so
nothing leaks above the initial maximum total photon number.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from math import factorial
from typing import Mapping

import numpy as np

from ..errors import NumericalError, TruncationError, ValidationError
from ..fockspace import DensityMatrix, basis_index
from ..spectral import Propagator

TRUNCATION_TOL = 1e-6


@dataclass(frozen=True)
class FockSuperposition:
    amplitudes: Mapping[tuple[int, ...], complex]

    def __post_init__(self):
        amps = {tuple(int(x) for x in k): complex(v) for k, v in dict(self.amplitudes).items()}
        if not amps:
            raise ValidationError("at least one component is required", "components")
        sizes = {len(k) for k in amps}
        if len(sizes) != 1:
            raise ValidationError("occupation tuples have different lengths", "components")
        if any(n < 0 for k in amps for n in k):
            raise ValidationError("occupations must be >= 0", "components")
        norm = sum(abs(v) ** 2 for v in amps.values())
        if abs(norm - 1) > 1e-10:
            raise ValidationError(f"squared amplitudes sum to {norm}, not 1", "components")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes):
        amps = {tuple(k): complex(v) for k, v in dict(amplitudes).items()}
        norm = np.sqrt(sum(abs(v) ** 2 for v in amps.values()))
        if norm == 0:
            raise ValidationError("all amplitudes are zero", "components")
        return cls({k: v / norm for k, v in amps.items()})

    @property
    def n_modes(self) -> int:
        return len(next(iter(self.amplitudes)))

    @property
    def max_photons(self) -> int:
        return max(sum(k) for k in self.amplitudes)

    def density_matrix(self, cutoff) -> DensityMatrix:
        dims = _dims(cutoff, self.n_modes)
        vec = np.zeros(int(np.prod(dims)), dtype=complex)
        for occ, amp in self.amplitudes.items():
            if any(n >= d for n, d in zip(occ, dims)):
                raise TruncationError("component outside the truncated space", abs(amp) ** 2)
            vec[basis_index(occ, dims)] += amp
        return DensityMatrix.from_pure(vec, dims)


def _dims(cutoff, n):
    dims = tuple([int(cutoff)] * n) if np.isscalar(cutoff) else tuple(int(c) for c in cutoff)
    if len(dims) != n or min(dims) < 1:
        raise ValidationError(f"need {n} positive cutoffs", "cutoff")
    return dims


def environment_map(theta) -> np.ndarray:
    """E with E^+ E = 1 - Theta^+ Theta (requires a contraction)."""
    n = theta.shape[0]
    gap = np.eye(n) - theta.conj().T @ theta
    gap = 0.5 * (gap + gap.conj().T)
    w, v = np.linalg.eigh(gap)
    if w[0] < -1e-9:
        raise NumericalError(f"propagator is not a contraction (min eigenvalue of 1 - Theta^+Theta = {w[0]:.3e}); "
                             "the damping matrix is not positive semidefinite")
    return np.sqrt(np.clip(w, 0, None))[:, None] * v.conj().T


def _create(state, column):
    """Apply sum_j column[j] c_j^+ to a sparse Fock state {occupation: amplitude}."""
    out = defaultdict(complex)
    for occ, amp in state.items():
        for j, c in enumerate(column):
            if c == 0:
                continue
            new = list(occ)
            new[j] += 1
            out[tuple(new)] += amp * c * np.sqrt(new[j])
    return out


def evolve_fock(state: FockSuperposition, prop: Propagator, cutoff) -> DensityMatrix:
    """Network density matrix at time ``prop.t`` on per-mode cutoffs (levels 0..cutoff-1).

    Raises :class:`TruncationError` if more than 1e-6 of the weight lands on
    occupations at or above the cutoff.
    """
    theta = prop.theta
    n = state.n_modes
    if theta.shape != (n, n):
        raise ValidationError(f"propagator is {theta.shape}, state has {n} modes", "theta")
    dims = _dims(cutoff, n)
    env = environment_map(theta)
    columns = np.vstack([theta, env])  # joint output amplitudes of input mode k: columns[:, k]

    joint = defaultdict(complex)
    for occ, amp in state.amplitudes.items():
        piece = {tuple([0] * (2 * n)): amp / np.sqrt(float(np.prod([factorial(k) for k in occ])))}
        for k, count in enumerate(occ):
            for _ in range(count):
                piece = _create(piece, columns[:, k])
        for key, val in piece.items():
            joint[key] += val

    env_index = {}
    entries = []
    lost = 0.0
    for key, val in joint.items():
        sys_occ, env_occ = key[:n], key[n:]
        if any(x >= d for x, d in zip(sys_occ, dims)):
            lost += abs(val) ** 2
            continue
        e = env_index.setdefault(env_occ, len(env_index))
        entries.append((basis_index(sys_occ, dims), e, val))
    if lost > TRUNCATION_TOL:
        raise TruncationError(f"cutoff {dims} too small", lost)
    psi = np.zeros((int(np.prod(dims)), max(1, len(env_index))), dtype=complex)
    for i, e, val in entries:
        psi[i, e] += val
    return DensityMatrix(psi @ psi.conj().T, dims)
