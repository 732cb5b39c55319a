"""Reservoir spectral-density models and the effective damping matrix.

Rates are the per-oscillator functions ``gamma_m(w)``; the damping matrix keeps
the network-size prefactor, so white-noise reservoirs give
``Gamma = N * diag(gamma_m)``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import ClassVar, Mapping, Sequence

import numpy as np

from .errors import DampingModelError, ValidationError
from .spectral import NormalModes

log = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-10
PSD_TOL = 1e-10


@dataclass(frozen=True)
class WhiteNoise:
    """Flat spectral density: the same rate at every frequency."""

    gamma: float
    kind: ClassVar[str] = "white_noise"
    constant: ClassVar[bool] = True

    def __post_init__(self):
        _check_rate(self.gamma, "gamma")

    def __call__(self, freqs):
        return np.full(np.shape(freqs), float(self.gamma))

    def to_dict(self):
        return {"kind": self.kind, "gamma": self.gamma}


@dataclass(frozen=True)
class PowerLaw:
    """``gamma0 * (w / omega_ref)**s`` for w > 0, zero otherwise."""

    gamma0: float
    omega_ref: float
    s: float
    kind: ClassVar[str] = "power_law"
    constant: ClassVar[bool] = False

    def __post_init__(self):
        _check_rate(self.gamma0, "gamma0")
        if not (np.isfinite(self.omega_ref) and self.omega_ref > 0):
            raise DampingModelError("must be a positive frequency", "omega_ref")
        if not np.isfinite(self.s):
            raise DampingModelError("must be finite", "s")

    def __call__(self, freqs):
        w = np.asarray(freqs, dtype=float)
        out = np.zeros_like(w)
        pos = w > 0
        out[pos] = self.gamma0 * (w[pos] / self.omega_ref) ** self.s
        return out

    def to_dict(self):
        return {"kind": self.kind, "gamma0": self.gamma0, "omega_ref": self.omega_ref, "s": self.s}


@dataclass(frozen=True)
class Lorentzian:
    """Peak rate ``gamma0`` at ``omega_c`` with half-width ``width``."""

    gamma0: float
    omega_c: float
    width: float
    kind: ClassVar[str] = "lorentzian"
    constant: ClassVar[bool] = False

    def __post_init__(self):
        _check_rate(self.gamma0, "gamma0")
        if not np.isfinite(self.omega_c):
            raise DampingModelError("must be finite", "omega_c")
        if not (np.isfinite(self.width) and self.width > 0):
            raise DampingModelError("must be positive", "width")

    def __call__(self, freqs):
        w = np.asarray(freqs, dtype=float)
        return self.gamma0 * self.width**2 / ((w - self.omega_c) ** 2 + self.width**2)

    def to_dict(self):
        return {"kind": self.kind, "gamma0": self.gamma0, "omega_c": self.omega_c, "width": self.width}


DampingModel = WhiteNoise | PowerLaw | Lorentzian

_MODEL_TYPES = {cls.kind: cls for cls in (WhiteNoise, PowerLaw, Lorentzian)}
_MODEL_FIELDS = {"white_noise": ("gamma",), "power_law": ("gamma0", "omega_ref", "s"),
                 "lorentzian": ("gamma0", "omega_c", "width")}


def _check_rate(value, name):
    if not np.isfinite(value) or value < 0:
        raise DampingModelError(f"rate must be finite and >= 0, got {value!r}", name)


def damping_model_from_dict(data: Mapping, where: str = "damping_model") -> DampingModel:
    if not isinstance(data, Mapping):
        raise ValidationError("expected an object", where)
    kind = data.get("kind")
    if kind not in _MODEL_TYPES:
        raise ValidationError(f"unknown kind {kind!r}; expected one of {sorted(_MODEL_TYPES)}", f"{where}.kind")
    fields = _MODEL_FIELDS[kind]
    extra = set(data) - set(fields) - {"kind"}
    if extra:
        raise ValidationError(f"unknown keys {sorted(extra)}", where)
    missing = [f for f in fields if f not in data]
    if missing:
        raise ValidationError(f"missing keys {missing}", where)
    values = {}
    for f in fields:
        v = data[f]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValidationError(f"expected a number, got {v!r}", f"{where}.{f}")
        values[f] = float(v)
    try:
        return _MODEL_TYPES[kind](**values)
    except DampingModelError as exc:
        raise DampingModelError(str(exc), f"{where}") from None


@dataclass(frozen=True)
class DampingMatrix:
    """Raw damping matrix as assembled; ``effective()`` gives the one used downstream."""

    matrix: np.ndarray
    provenance: str  # "distinct" | "common"

    @property
    def asymmetry(self) -> float:
        g = self.matrix
        return float(np.max(np.abs(g - g.T))) if g.size else 0.0

    def effective(self, symmetrize: bool = True) -> np.ndarray:
        g = np.array(self.matrix, dtype=float)
        if symmetrize and self.asymmetry > SYMMETRY_TOL:
            warnings.warn(
                f"damping matrix asymmetric by {self.asymmetry:.3e}; using (G + G^T)/2",
                RuntimeWarning, stacklevel=2)
            g = 0.5 * (g + g.T)
        return g


@dataclass(frozen=True)
class PsdReport:
    is_psd: bool
    min_eigenvalue: float


def rate_table(modes: NormalModes, models: Sequence[DampingModel | None],
               bare_frequencies=None) -> np.ndarray:
    """R[m, k] = gamma_m evaluated at normal-mode frequency k (or at bare w_m)."""
    n = len(modes.frequencies)
    if len(models) != n:
        raise ValidationError(f"need {n} damping models, got {len(models)}", "models")
    table = np.zeros((n, n))
    for m, model in enumerate(models):
        if model is None:
            continue
        at = (np.full(n, bare_frequencies[m]) if bare_frequencies is not None
              else modes.frequencies)
        row = np.asarray(model(at), dtype=float)
        if np.any(~np.isfinite(row)) or np.any(row < 0):
            raise DampingModelError(f"model evaluated to an invalid rate {row}", f"models[{m}]")
        table[m] = row
    return table


def _constant_rows(models, bare_frequencies):
    # Rows whose rate does not depend on the evaluation frequency.
    return [model is None or model.constant or bare_frequencies is not None for model in models]


def gamma_distinct(modes: NormalModes, models: Sequence[DampingModel | None], *,
                   bare_frequencies=None) -> DampingMatrix:
    """Damping matrix for one reservoir per oscillator.

    ``Gamma_mn = N * sum_k C[k, m] * gamma_m(w_k) * C[k, n]``.  Rows of
    reservoir-free oscillators (``None``) are zero.  When a row's rate is
    frequency independent the orthogonality of C collapses the sum, and that
    row is written analytically as ``N * gamma_m`` on the diagonal so the
    white-noise limit is exact.  Passing ``bare_frequencies`` evaluates
    ``gamma_m`` at ``w_m`` (weak-coupling limit).
    """
    c = modes.C
    n = c.shape[0]
    rates = rate_table(modes, models, bare_frequencies)
    gamma = n * ((c.T * rates) @ c)
    for m, const in enumerate(_constant_rows(models, bare_frequencies)):
        if const:
            gamma[m, :] = 0.0
            gamma[m, m] = n * rates[m, 0]
    return DampingMatrix(gamma, "distinct")


def gamma_common(modes: NormalModes, models: Sequence[DampingModel | None],
                 overlap=None) -> DampingMatrix:
    """Damping matrix for a single reservoir shared by the whole network.

    The reservoir-induced correlation between oscillators m and m' is modelled
    as ``overlap[m, m'] * sqrt(gamma_m(w) * gamma_m'(w))``; ``overlap`` is
    symmetric with unit diagonal and entries in [0, 1].  With the identity
    overlap this reduces to :func:`gamma_distinct`.
    """
    c = modes.C
    n = c.shape[0]
    rho = np.eye(n) if overlap is None else validate_overlap(overlap, n)
    root = np.sqrt(rate_table(modes, models))  # [m, k]
    weighted = rho @ (root * c.T)  # [m, k] = sum_m' rho[m, m'] root[m', k] C[k, m']
    gamma = n * ((root * weighted) @ c)
    return DampingMatrix(gamma, "common")


def validate_overlap(overlap, n: int) -> np.ndarray:
    rho = np.asarray(overlap, dtype=float)
    if rho.shape != (n, n):
        raise ValidationError(f"expected a {n}x{n} matrix, got shape {rho.shape}", "overlap")
    if not np.all(np.isfinite(rho)):
        raise ValidationError("entries must be finite", "overlap")
    if np.any(np.diag(rho) != 1.0):
        raise ValidationError("diagonal entries must equal 1", "overlap")
    if np.any(rho < 0) or np.any(rho > 1):
        raise ValidationError("entries must lie in [0, 1]", "overlap")
    if np.any(rho != rho.T):
        raise ValidationError("matrix must be symmetric", "overlap")
    return rho


def check_psd(gamma) -> PsdReport:
    g = np.asarray(gamma.matrix if isinstance(gamma, DampingMatrix) else gamma, dtype=float)
    if g.size == 0:
        return PsdReport(True, 0.0)
    lo = float(np.linalg.eigvalsh(0.5 * (g + g.T))[0])
    return PsdReport(lo >= -PSD_TOL, lo)
