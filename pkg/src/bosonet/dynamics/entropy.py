"""Linear entropies 1 - Tr(rho_S^2) of coherent-superposition states.

Purities are written as a four-branch sum over the initial labels with a
Gaussian kernel in the label differences.  Two kernels are available:

``adjoint``  exp(-(b^s - b^q)^+ K_S (b^r - b^p)) with K_S = Theta_S(t)^+ Theta_S(t),
             where Theta_S keeps the rows of the subsystem S.  This is exact.
``paper``    the literal printed form: diagonal weights
             k_n = sum_{m in S} |Theta_mn(-t)|^2, conjugation on (b^r - b^p),
             prefactor <b^r|b^s><b^p|b^q>.  It grows instead of decays for
             lossy networks and is kept for comparison only.

Every report also carries the direct purity of the reduced expansion and flags
whether the chosen kernel agrees with it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from ..spectral import DissipativeMatrix, propagator
from .coherent import CoherentSuperposition, evolve_coherent, log_overlap, reduce_coherent

KERNELS = ("adjoint", "paper")


@dataclass(frozen=True)
class EntropyReport:
    t: float
    full: float
    single: np.ndarray  # S of oscillator m alone
    rest: np.ndarray  # S of all oscillators except m
    excess: np.ndarray  # single + rest - full
    kernel: str
    consistent: bool
    max_deviation: float


def kernel_purity(state: CoherentSuperposition, weights, kernel: str = "adjoint") -> float:
    """Four-branch purity sum; ``weights`` is K_S (matrix) or k_n (vector for ``paper``)."""
    lam, beta = state.amplitudes, state.labels
    log_b = log_overlap(beta, beta)  # [a, b] = log <beta^a|beta^b>
    diff = beta[:, None, :] - beta[None, :, :]  # [s, q, n] = beta^s - beta^q
    total = 0.0 + 0.0j
    for r in range(len(lam)):
        d_rp = beta[r][None, :] - beta  # [p, n] = beta^r - beta^p
        if kernel == "adjoint":
            expo = -np.einsum("sqn,nk,pk->sqp", diff.conj(), weights, d_rp)
            logp = log_b[:, r][:, None, None] + log_b[None, :, :]  # <b^s|b^r> <b^q|b^p>
            amp = lam[r] * lam.conj()[:, None, None] * lam.conj()[None, :, None] * lam[None, None, :]
        else:
            expo = -np.einsum("sqn,n,pn->sqp", diff, weights, d_rp.conj())
            logp = log_b[r, :][:, None, None] + log_b.T[None, :, :]  # <b^r|b^s> <b^p|b^q>
            amp = lam.conj()[r] * lam[:, None, None] * lam[None, :, None] * lam.conj()[None, None, :]
        total += np.sum(amp * np.exp(logp + expo))
    return float(np.real(total) * state.norm**4)


def _subsets(n):
    full = tuple(range(n))
    singles = [(m,) for m in range(n)]
    rests = [tuple(k for k in range(n) if k != m) for m in range(n)]
    return full, singles, rests


def linear_entropies(state: CoherentSuperposition, dm: DissipativeMatrix, t: float,
                     kernel: str = "adjoint", tol: float = 1e-9) -> EntropyReport:
    if kernel not in KERNELS:
        raise ValidationError(f"unknown kernel {kernel!r}; expected one of {KERNELS}", "kernel")
    n = state.n_modes
    theta = propagator(dm, t).theta
    theta_back = propagator(dm, -t).theta if kernel == "paper" else None
    ev = evolve_coherent(state, propagator(dm, t))

    def via_kernel(sub):
        if not sub:
            return 1.0
        rows = list(sub)
        if kernel == "adjoint":
            w = theta[rows].conj().T @ theta[rows]
        else:
            w = np.sum(np.abs(theta_back[rows]) ** 2, axis=0)
        return kernel_purity(state, w, kernel)

    def direct(sub):
        return reduce_coherent(ev, sub).purity if sub else 1.0

    full, singles, rests = _subsets(n)
    subsets = [full] + singles + rests
    chosen = np.array([1.0 - via_kernel(s) for s in subsets])
    reference = np.array([1.0 - direct(s) for s in subsets])
    dev = float(np.max(np.abs(chosen - reference)))
    s_full, s_single, s_rest = chosen[0], chosen[1:n + 1], chosen[n + 1:]
    return EntropyReport(float(t), float(s_full), s_single, s_rest, s_single + s_rest - s_full,
                         kernel, dev <= tol, dev)
