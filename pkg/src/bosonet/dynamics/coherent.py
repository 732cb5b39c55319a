"""Closed-form evolution of superpositions of multimode coherent states.

An initial state ``N^2 sum_rs L_r L_s* |beta^r><beta^s|`` evolves to

    rho(t) = sum_rs W_rs(t) |zeta^r(t)><zeta^s(t)|,
    W_rs(t) = N^2 L_r L_s* <beta^s|beta^r> / <zeta^s(t)|zeta^r(t)>,

with labels ``zeta^r = Theta(t) beta^r``.  Reduced states keep the same
numerator and restrict the denominator overlap to the kept modes.  Overlap
ratios are formed in log space so separated branches do not underflow.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateStateError, ValidationError
from ..fockspace import DensityMatrix, product_coherent_vector
from ..spectral import Propagator


def log_overlap(a, b) -> np.ndarray:
    """log <a^i|b^j> for label arrays a (P, N) and b (Q, N); returns (P, Q)."""
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    b = np.atleast_2d(np.asarray(b, dtype=complex))
    na = np.sum(np.abs(a) ** 2, axis=1)
    nb = np.sum(np.abs(b) ** 2, axis=1)
    return -0.5 * na[:, None] - 0.5 * nb[None, :] + a.conj() @ b.T


def coherent_overlap(alpha, beta) -> complex:
    """<alpha|beta> for product coherent states."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    beta = np.atleast_1d(np.asarray(beta, dtype=complex))
    if alpha.shape != beta.shape:
        raise ValidationError(f"length mismatch {alpha.shape} vs {beta.shape}", "labels")
    return complex(np.exp(log_overlap(alpha[None], beta[None])[0, 0]))


@dataclass(frozen=True)
class CoherentSuperposition:
    amplitudes: np.ndarray  # (Q,)
    labels: np.ndarray  # (Q, N)
    norm: float

    @property
    def n_branches(self) -> int:
        return self.labels.shape[0]

    @property
    def n_modes(self) -> int:
        return self.labels.shape[1]

    def branch_weights(self) -> np.ndarray:
        """N^2 L_r L_s* <beta^s|beta^r>; the entries sum to the trace, 1."""
        lam = self.amplitudes
        return self.norm**2 * np.outer(lam, lam.conj()) * np.exp(log_overlap(self.labels, self.labels).T)


def normalize_superposition(amplitudes, labels) -> CoherentSuperposition:
    lam = np.atleast_1d(np.asarray(amplitudes, dtype=complex))
    beta = np.asarray(labels, dtype=complex)
    if beta.ndim == 1:
        beta = beta[:, None]
    if beta.ndim != 2 or beta.shape[0] != lam.shape[0] or lam.shape[0] < 1:
        raise ValidationError(f"need Q >= 1 amplitudes and a (Q, N) label array; got {lam.shape}, {beta.shape}",
                              "state")
    gram = np.exp(log_overlap(beta, beta))  # [s, r] = <beta^s|beta^r>
    total = float(np.real(lam.conj() @ gram @ lam))
    if not total > 1e-14:
        raise DegenerateStateError(f"superposition has vanishing norm ({total:.3e})", "state")
    return CoherentSuperposition(lam, beta, 1.0 / np.sqrt(total))


def continuum_superposition(amplitude_fn, label_fn, interval=(0.0, 2 * np.pi), nodes: int = 64
                            ) -> CoherentSuperposition:
    """Discretise ``N int dtheta L(theta) |{beta(theta)}>`` by Gauss-Legendre quadrature."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    lo, hi = interval
    theta = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    weights = 0.5 * (hi - lo) * w
    lam = np.array([amplitude_fn(th) for th in theta], dtype=complex) * weights
    beta = np.array([np.atleast_1d(label_fn(th)) for th in theta], dtype=complex)
    return normalize_superposition(lam, beta)


@dataclass(frozen=True)
class EvolvedCoherentState:
    """``rho = sum_rs weights[r, s] |labels[r]><labels[s]|`` on the 0-based ``modes``."""

    t: float
    modes: tuple[int, ...]
    labels: np.ndarray
    weights: np.ndarray
    initial: CoherentSuperposition = field(repr=False)

    def gram(self) -> np.ndarray:
        """G[a, b] = <labels[a]|labels[b]>."""
        return np.exp(log_overlap(self.labels, self.labels))

    @property
    def trace(self) -> float:
        return float(np.real(np.sum(self.weights * self.gram().T)))

    @property
    def purity(self) -> float:
        wg = self.weights @ self.gram()
        return float(np.real(np.trace(wg @ wg)))

    def mean_photon_numbers(self) -> np.ndarray:
        # Tr(rho a^+a) = sum_rs W_rs <z^s|z^r> conj(z^s_m) z^r_m
        wz = self.weights * self.gram().T
        z = self.labels
        return np.real(np.einsum("rs,sm,rm->m", wz, z.conj(), z))

    def density_matrix(self, cutoff) -> DensityMatrix:
        dims = tuple([cutoff] * len(self.modes)) if np.isscalar(cutoff) else tuple(cutoff)
        vecs = np.array([product_coherent_vector(z, dims) for z in self.labels])
        return DensityMatrix(vecs.T @ self.weights @ vecs.conj(), dims)


def evolve_coherent(state: CoherentSuperposition, prop: Propagator) -> EvolvedCoherentState:
    if prop.theta.shape != (state.n_modes, state.n_modes):
        raise ValidationError(f"propagator is {prop.theta.shape}, state has {state.n_modes} modes", "theta")
    zeta = state.labels @ prop.theta.T
    return _expansion(state, zeta, tuple(range(state.n_modes)), prop.t)


def _expansion(state, zeta, modes, t):
    lam = state.amplitudes
    ratio = np.exp(log_overlap(state.labels, state.labels) - log_overlap(zeta, zeta))  # [s, r]
    weights = state.norm**2 * np.outer(lam, lam.conj()) * ratio.T
    return EvolvedCoherentState(t, modes, zeta, weights, state)


def reduce_coherent(ev: EvolvedCoherentState, keep) -> EvolvedCoherentState:
    """Reduced state on the 0-based modes ``keep`` (a subset of ``ev.modes``)."""
    keep = tuple(sorted(set(int(k) for k in keep)))
    if not keep:
        raise ValidationError("subset must be non-empty", "keep")
    try:
        cols = [ev.modes.index(k) for k in keep]
    except ValueError:
        raise ValidationError(f"modes {keep} not all present in {ev.modes}", "keep") from None
    if len(ev.modes) != ev.initial.n_modes:
        raise ValidationError("reduce from the full-network state", "keep")
    return _expansion(ev.initial, ev.labels[:, cols], keep, ev.t)


def initial_expansion(state: CoherentSuperposition) -> EvolvedCoherentState:
    return _expansion(state, state.labels.copy(), tuple(range(state.n_modes)), 0.0)


def overlap_trace(a: EvolvedCoherentState, b: EvolvedCoherentState) -> float:
    """Tr[rho_a rho_b]; labels are matched by position, not by mode identity."""
    if a.labels.shape[1] != b.labels.shape[1]:
        raise ValidationError("states act on different numbers of modes", "state")
    x = np.exp(log_overlap(a.labels, b.labels))  # [s, p] = <a^s|b^p>
    return float(np.real(np.trace(a.weights @ x @ b.weights @ x.conj().T)))


def recurrence_probability(ev: EvolvedCoherentState, m: int) -> float:
    """Tr[rho_m(t) rho_m(0)] for the 0-based oscillator m."""
    now = reduce_coherent(ev, [m])
    then = reduce_coherent(initial_expansion(ev.initial), [m])
    return overlap_trace(now, then)


def transfer_probability(ev: EvolvedCoherentState, source: int, target: int) -> float:
    """Tr[rho_target(t) rho_source(0)] for 0-based oscillators."""
    if source == target:
        raise ValidationError("source and target must differ", "target")
    now = reduce_coherent(ev, [target])
    then = reduce_coherent(initial_expansion(ev.initial), [source])
    return overlap_trace(now, then)


@dataclass(frozen=True)
class DecoherenceTable:
    """factor[r, s] = <beta^r|beta^s> / <zeta^r|zeta^s>, i.e. W_rs(t)/W_rs(0) conjugated."""

    t: float
    factor: np.ndarray

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.factor)

    @property
    def real(self) -> np.ndarray:
        return self.factor.real

    def pairs(self):
        q = self.factor.shape[0]
        return [(r, s) for r in range(q) for s in range(r + 1, q)]


def decoherence_coefficients(ev: EvolvedCoherentState) -> DecoherenceTable:
    if ev.initial.n_branches < 2:
        raise ValidationError("decoherence needs at least two branches", "state")
    if len(ev.modes) != ev.initial.n_modes:
        raise ValidationError("decoherence factors are defined on the full-network state", "state")
    beta = ev.initial.labels
    factor = np.exp(log_overlap(beta, beta) - log_overlap(ev.labels, ev.labels))
    return DecoherenceTable(ev.t, factor)
