"""Normal modes of the coupling matrix and the dissipative amplitude propagator.

Amplitudes obey ``d zeta / dt = -HD zeta`` with ``HD = Gamma/2 + i H``, so the
propagator is ``Theta(t) = D exp(-Omega t) D^-1 = expm(-HD t)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DefectiveMatrixError, ValidationError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tolerances:
    orthogonality: float = 1e-10
    reconstruction: float = 1e-9
    degeneracy_gap: float = 1e-12
    max_condition: float = 1e12


DEFAULT_TOLERANCES = Tolerances()
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class NormalModes:
    """Row m of ``C`` is the eigenvector of H for ``frequencies[m]``."""

    C: np.ndarray
    frequencies: np.ndarray


@dataclass(frozen=True)
class DissipativeMatrix:
    hd: np.ndarray
    eigenvalues: np.ndarray
    D: np.ndarray
    D_inv: np.ndarray
    condition: float
    defective: bool = False
    residual: float = 0.0

    @property
    def n(self) -> int:
        return self.hd.shape[0]


@dataclass(frozen=True)
class Propagator:
    t: float
    theta: np.ndarray = field(repr=False)


def _clusters(values, gap):
    """Split sorted values into runs whose consecutive spacing is below ``gap``."""
    groups, current = [], [0]
    for i in range(1, len(values)):
        if abs(values[i] - values[i - 1]) < gap:
            current.append(i)
        else:
            groups.append(current)
            current = [i]
    groups.append(current)
    return groups


def _canonical_basis(vectors):
    """Deterministic orthonormal basis of span(vectors).

    Builds the orthogonal projector onto the span (basis independent) and runs
    Gram-Schmidt over its columns in index order.
    """
    k = vectors.shape[1]
    q, _ = np.linalg.qr(vectors)
    proj = q @ q.conj().T
    basis = []
    for j in range(proj.shape[0]):
        v = proj[:, j].copy()
        for b in basis:
            v -= (b.conj() @ v) * b
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            basis.append(v / nv)
        if len(basis) == k:
            break
    return np.column_stack(basis)


def _fix_phase(vectors):
    # Largest-magnitude component (first one among near ties) made real positive.
    out = vectors.copy()
    for j in range(out.shape[1]):
        v = out[:, j]
        v /= np.linalg.norm(v)
        mags = np.abs(v)
        i = int(np.argmax(mags >= mags.max() * (1 - 1e-8)))
        v *= np.conj(v[i]) / abs(v[i])
        out[:, j] = v
    return out


def diagonalize_h(H, tol: Tolerances = DEFAULT_TOLERANCES) -> NormalModes:
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {H.shape}", "H")
    if np.max(np.abs(H - H.T), initial=0.0) > 0:
        raise ValidationError("coupling matrix must be symmetric", "H")
    w, v = np.linalg.eigh(H)
    gap = tol.degeneracy_gap * max(1.0, float(np.max(np.abs(w), initial=0.0)))
    for group in _clusters(w, gap):
        if len(group) > 1:
            v[:, group] = _canonical_basis(v[:, group]).real
    v = _fix_phase(v).real
    return NormalModes(C=v.T.copy(), frequencies=w)


def build_hd(H, gamma, tol: Tolerances = DEFAULT_TOLERANCES, allow_fallback: bool = True
             ) -> DissipativeMatrix:
    """Assemble ``HD = gamma/2 + i H`` and its eigensystem.

    Eigenvalues are sorted by (real, imag).  If the eigenvector matrix is
    ill-conditioned (beyond ``tol.max_condition``, or so badly that
    ``cond * eps`` exceeds ``tol.reconstruction``) the result is flagged
    ``defective`` and :func:`propagator` falls back to a direct matrix
    exponential; with ``allow_fallback=False`` that raises instead.
    """
    H = np.asarray(H, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    if H.shape != gamma.shape or H.ndim != 2:
        raise ValidationError(f"shape mismatch: H {H.shape} vs Gamma {gamma.shape}", "gamma")
    hd = gamma / 2 + 1j * H
    try:
        omega, vecs = np.linalg.eig(hd)
    except np.linalg.LinAlgError as exc:
        if not allow_fallback:
            raise DefectiveMatrixError(f"eigendecomposition failed: {exc}") from exc
        n = hd.shape[0]
        return DissipativeMatrix(hd, np.full(n, np.nan + 0j), np.eye(n, dtype=complex),
                                 np.eye(n, dtype=complex), np.inf, True, np.inf)
    order = np.lexsort((omega.imag, omega.real))
    omega, vecs = omega[order], vecs[:, order]
    scale = max(1.0, float(np.max(np.abs(omega), initial=0.0)))
    for group in _clusters(omega, tol.degeneracy_gap * scale):
        if len(group) > 1:
            vecs[:, group] = _canonical_basis(vecs[:, group])
    vecs = _fix_phase(vecs)
    cond = float(np.linalg.cond(vecs))
    # Theta inherits a relative error of about cond * eps from D and D^-1, so the
    # eigenbasis is only trusted while that stays inside the reconstruction tolerance.
    trusted = np.isfinite(cond) and cond < tol.max_condition and cond * _EPS <= tol.reconstruction
    if trusted:
        d_inv = np.linalg.inv(vecs)
        residual = float(np.max(np.abs(hd @ vecs - vecs * omega)))
        return DissipativeMatrix(hd, omega, vecs, d_inv, cond, False, residual)
    residual = float(np.max(np.abs(hd @ vecs - vecs * omega)))
    if not allow_fallback:
        raise DefectiveMatrixError("dissipative matrix is (numerically) defective", residual, cond)
    log.warning("HD eigenbasis ill-conditioned (cond=%.3e); using direct matrix exponential", cond)
    d_inv = np.linalg.pinv(vecs)
    return DissipativeMatrix(hd, omega, vecs, d_inv, cond, True, residual)


def propagator(dm: DissipativeMatrix, t: float, convention: str = "amplitude") -> Propagator:
    """Theta(t) = D exp(-Omega t) D^-1.

    ``convention="characteristic"`` uses ``exp(+Omega t)``: the flow of the
    P-function's characteristic curves rather than of the amplitudes.  It is
    kept only as a negative control.
    """
    t = float(t)
    if not np.isfinite(t):
        raise ValidationError("time must be finite", "t")
    if convention == "amplitude":
        sign = -1.0
    elif convention == "characteristic":
        sign = 1.0
    else:
        raise ValidationError(f"unknown convention {convention!r}", "convention")
    if dm.defective:
        theta = scipy.linalg.expm(sign * dm.hd * t)
    else:
        theta = (dm.D * np.exp(sign * dm.eigenvalues * t)) @ dm.D_inv
    return Propagator(t, theta)
