"""Truncated Fock-space helpers shared by the oracle and the Fock-state channel.

Basis ordering is lexicographic in (n_1, ..., n_N) with n_1 most significant,
i.e. the ordering produced by ``np.kron`` of single-mode vectors.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import lgamma

import numpy as np

from .errors import ValidationError


def coherent_vector(alpha: complex, cutoff: int) -> np.ndarray:
    """Fock amplitudes <n|alpha> for n < cutoff (not renormalised)."""
    out = np.empty(cutoff, dtype=complex)
    out[0] = np.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, cutoff):
        out[n] = out[n - 1] * alpha / np.sqrt(n)
    return out


def product_coherent_vector(alphas, dims) -> np.ndarray:
    vec = np.ones(1, dtype=complex)
    for a, d in zip(alphas, dims):
        vec = np.kron(vec, coherent_vector(a, d))
    return vec


def occupations(dims) -> np.ndarray:
    """(D, N) integer array of occupation tuples in basis order."""
    return np.array(list(itertools.product(*(range(d) for d in dims))), dtype=int).reshape(-1, len(dims))


def basis_index(occ, dims) -> int:
    idx = 0
    for n, d in zip(occ, dims):
        idx = idx * d + n
    return idx


def log_factorial(n: int) -> float:
    return lgamma(n + 1)


@dataclass
class DensityMatrix:
    data: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        dim = int(np.prod(self.dims)) if self.dims else 1
        if self.data.shape != (dim, dim):
            raise ValidationError(f"data shape {self.data.shape} does not match dims {self.dims}", "rho")

    @classmethod
    def from_pure(cls, vec, dims):
        vec = np.asarray(vec, dtype=complex)
        return cls(np.outer(vec, vec.conj()), dims)

    @property
    def trace(self) -> float:
        return float(np.trace(self.data).real)

    @property
    def purity(self) -> float:
        # Tr(rho rho) without forming the product.
        return float(np.vdot(self.data.conj().T, self.data).real)

    def partial_trace(self, keep) -> "DensityMatrix":
        return partial_trace(self, keep)

    def mean_photon_numbers(self) -> np.ndarray:
        occ = occupations(self.dims)
        pops = np.real(np.diag(self.data))
        return occ.T @ pops

    def expect(self, op) -> complex:
        return complex(np.trace(op @ self.data))


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduce onto the 0-based modes in ``keep`` (kept in ascending order)."""
    keep = sorted(set(int(k) for k in keep))
    n = len(rho.dims)
    if not keep:
        raise ValidationError("subset must be non-empty", "keep")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValidationError(f"mode index out of range 0..{n - 1}", "keep")
    t = rho.data.reshape(rho.dims + rho.dims)
    drop = [m for m in range(n) if m not in keep]
    # Trace out from the highest mode so remaining axis numbers stay valid.
    for m in reversed(drop):
        cur = t.ndim // 2
        t = np.trace(t, axis1=m, axis2=m + cur)
    dims = tuple(rho.dims[k] for k in keep)
    d = int(np.prod(dims))
    return DensityMatrix(t.reshape(d, d), dims)


def trace_distance(a, b) -> float:
    a = a.data if isinstance(a, DensityMatrix) else np.asarray(a)
    b = b.data if isinstance(b, DensityMatrix) else np.asarray(b)
    diff = a - b
    diff = 0.5 * (diff + diff.conj().T)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))


def overlap_trace(a: DensityMatrix, b: DensityMatrix) -> float:
    """Tr[a b] for two states on identically truncated spaces."""
    if a.dims != b.dims:
        raise ValidationError(f"dims differ: {a.dims} vs {b.dims}", "rho")
    return float(np.vdot(a.data.conj().T, b.data).real)
