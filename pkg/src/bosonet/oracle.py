"""Brute-force master-equation integration on a truncated Fock space.

The generator is the network master equation in the original oscillator
basis:

    d rho/dt = -i[H_S, rho]
               + sum_mn Gamma_mn/2 (Nbar_m + 1) ([a_n rho, a_m^+] + [a_m, rho a_n^+])
               + sum_mn Gamma_mn/2  Nbar_m      ([a_n^+ rho, a_m] + [a_m^+, rho a_n])

with ``H_S = sum_mn H_mn a_m^+ a_n`` and constant thermal occupations
``Nbar_m`` (zero at 0K).  Small truncations assemble the generator as one
sparse superoperator acting on vec(rho); larger ones apply sparse ladder
operators to the dense density matrix.  Either way it is stepped with classic
fixed-step RK4.  Nothing here
uses the normal-mode or propagator machinery; it is the independent check on
the closed-form results.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, StepSizeError, ValidationError
from .fockspace import DensityMatrix, occupations, partial_trace, product_coherent_vector  # noqa: F401

log = logging.getLogger(__name__)

MAX_DIMENSION = 4096
FLUSH_BELOW = 1e-100
SUPEROPERATOR_MAX_DIM = 1024  # the superoperator holds ~7 dim^2 nonzeros; ~2 GB at dim 4096


def _ladder(dims, m):
    """Sparse annihilation operator of mode m on the product space."""
    d = dims[m]
    a = sp.diags(np.sqrt(np.arange(1, d, dtype=float)), 1, shape=(d, d), format="csr")
    left = int(np.prod(dims[:m])) if m else 1
    right = int(np.prod(dims[m + 1:])) if m + 1 < len(dims) else 1
    return sp.kron(sp.kron(sp.identity(left, format="csr"), a), sp.identity(right, format="csr"), format="csr")


class LindbladGenerator:
    """Master-equation generator for a network on per-mode cutoffs ``dims``.

    ``frame`` moves to a frame rotating at that frequency for every mode; the
    generator then lacks the ``frame * N_total`` term, which commutes with
    everything else.  :func:`integrate` undoes the rotation on output.
    """

    def __init__(self, H, gamma, dims, thermal=None, frame: float = 0.0, max_dimension: int = MAX_DIMENSION):
        H = np.asarray(H, dtype=float)
        gamma = np.asarray(gamma, dtype=float)
        n = H.shape[0]
        if H.shape != (n, n) or gamma.shape != (n, n):
            raise ValidationError(f"H {H.shape} and Gamma {gamma.shape} must be {n}x{n}", "generator")
        dims = tuple(int(d) for d in (dims if np.ndim(dims) else [dims] * n))
        if len(dims) != n or min(dims) < 1:
            raise ValidationError(f"need {n} positive cutoffs, got {dims}", "dims")
        dim = int(np.prod(dims))
        if dim > max_dimension:
            raise DimensionError(
                f"truncated dimension {dim} exceeds bound {max_dimension}; lower the cutoff "
                "or raise max_dimension", "cutoff")
        nbar = np.zeros(n) if thermal is None else np.asarray(thermal, dtype=float).reshape(n)
        if np.any(nbar < 0):
            raise ValidationError("thermal occupations must be >= 0", "thermal")
        self.H, self.gamma, self.dims, self.thermal, self.frame = H, gamma, dims, nbar, float(frame)
        self.dim = dim

        a = [_ladder(dims, m) for m in range(n)]
        ad = [op.conj().T.tocsr() for op in a]
        self.number = sum(ad[m] @ a[m] for m in range(n))
        hs = sp.csr_matrix((dim, dim), dtype=complex)
        k = sp.csr_matrix((dim, dim), dtype=complex)
        decay = gamma / 2 * (nbar[:, None] + 1)   # rows indexed by reservoir m
        pump = gamma / 2 * nbar[:, None]
        for i in range(n):
            for j in range(n):
                if H[i, j] != 0:
                    hs = hs + H[i, j] * (ad[i] @ a[j])
                if decay[i, j] != 0:
                    k = k + decay[i, j] * (ad[i] @ a[j])
                if pump[i, j] != 0:
                    k = k + pump[i, j] * (a[i] @ ad[j])
        self.hamiltonian = (hs - self.frame * self.number).tocsr()
        # -i H_eff with H_eff = H - i K
        self.m_op = (-1j * (self.hamiltonian - 1j * k)).tocsr()
        self.jumps = self._jumps(decay, a) + self._jumps(pump, ad)
        self._liouvillian = None

    @staticmethod
    def _jumps(coef, ops):
        # sum_mn (c + c^T)_mn  op_n rho op_m^+  ==  sum_k g_k L_k rho L_k^+
        if not np.any(coef):
            return []
        g, u = np.linalg.eigh(coef + coef.T)
        out = []
        for kk in range(len(g)):
            if g[kk] == 0:
                continue
            op = sum(u[nn, kk] * ops[nn] for nn in range(len(ops)) if u[nn, kk] != 0)
            out.append((float(g[kk]), op.tocsr()))
        return out

    def with_frame(self, frame: float) -> "LindbladGenerator":
        new = object.__new__(LindbladGenerator)
        new.__dict__.update(self.__dict__)
        shift = float(frame) - self.frame
        new.frame = float(frame)
        new.hamiltonian = (self.hamiltonian - shift * self.number).tocsr()
        new.m_op = (self.m_op + 1j * shift * self.number).tocsr()
        new._liouvillian = None
        return new

    @property
    def liouvillian(self):
        """The generator as one sparse matrix on row-major vec(rho), or None above SUPEROPERATOR_MAX_DIM."""
        if getattr(self, "_liouvillian", None) is None and self.dim <= SUPEROPERATOR_MAX_DIM:
            eye = sp.identity(self.dim, format="csr")
            # vec(A rho B) = (A kron B^T) vec(rho)
            total = sp.kron(self.m_op, eye) + sp.kron(eye, self.m_op.conj())
            for g, op in self.jumps:
                total = total + g * sp.kron(op, op.conj())
            self._liouvillian = total.tocsr()
        return getattr(self, "_liouvillian", None)

    def apply(self, rho: np.ndarray, hermitian: bool = False) -> np.ndarray:
        sup = self.liouvillian
        if sup is not None:
            return (sup @ np.ascontiguousarray(rho).ravel()).reshape(rho.shape)
        return self.apply_factored(rho, hermitian)

    def apply_factored(self, rho: np.ndarray, hermitian: bool = False) -> np.ndarray:
        """Same as :meth:`apply` without forming the superoperator (memory O(dim^2))."""
        x = self.m_op @ rho
        if hermitian:
            out = x + x.conj().T
        else:
            out = x + (self.m_op @ rho.conj().T).conj().T
        for g, op in self.jumps:
            y = np.ascontiguousarray((op @ rho).conj().T)
            if hermitian:
                out += g * (op @ y)  # L (L rho)^+ = L rho L^+ when rho = rho^+
            else:
                out += g * (op @ y).conj().T  # (L rho^+ L^+)^+ = L rho L^+
        return out


def apply_generator(gen: LindbladGenerator, rho) -> np.ndarray:
    data = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    return gen.apply(data)


def recommended_dt(gen: LindbladGenerator) -> float:
    """0.1 / (max |normal-mode frequency - frame| + max|Gamma| * max cutoff)."""
    freqs = np.linalg.eigvalsh(gen.H) if gen.H.size else np.zeros(1)
    rate = float(np.max(np.abs(gen.gamma), initial=0.0)) * (1 + float(np.max(gen.thermal, initial=0.0)))
    scale = float(np.max(np.abs(freqs - gen.frame))) + rate * max(gen.dims)
    return 0.1 / scale if scale > 0 else 0.1


@dataclass
class OracleRun:
    times: np.ndarray
    states: list = field(repr=False)
    dt: float
    frame: float
    max_trace_drift: float
    max_hermiticity_defect: float
    min_eigenvalue: float

    def at(self, t: float) -> DensityMatrix:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-12 * max(1.0, abs(t)):
            raise KeyError(f"time {t} was not sampled")
        return self.states[i]


def integrate(gen: LindbladGenerator, rho0, t_final: float, dt: float | None = None, sample_times=None,
              frame="auto", trace_tol: float = 1e-8, check_positivity: bool = True) -> OracleRun:
    """RK4 from t=0 to ``t_final``; returns states at ``sample_times`` (plus 0 and t_final).

    Each interval between consecutive samples is split into equal steps no
    longer than ``dt``.  The state is Hermitian-symmetrised after every step
    (the defect removed is recorded at sample times);
    the trace is never renormalised, so any drift beyond ``trace_tol`` raises
    :class:`StepSizeError`.
    """
    rho = np.array(rho0.data if isinstance(rho0, DensityMatrix) else rho0, dtype=complex)
    if rho.shape != (gen.dim, gen.dim):
        raise ValidationError(f"rho0 has shape {rho.shape}, expected {(gen.dim, gen.dim)}", "rho0")
    if not (np.isfinite(t_final) and t_final >= 0):
        raise ValidationError("t_final must be finite and >= 0", "t_final")
    f = float(np.mean(np.diag(gen.H))) if frame == "auto" else float(frame)
    g = gen.with_frame(f) if f != gen.frame else gen
    if dt is None:
        dt = recommended_dt(g)
    if not dt > 0:
        raise ValidationError("dt must be positive", "dt")
    times = {0.0, float(t_final)}
    if sample_times is not None:
        for t in sample_times:
            if not 0 <= t <= t_final:
                raise ValidationError(f"sample time {t} outside [0, {t_final}]", "sample_times")
            times.add(float(t))
    times = np.array(sorted(times))

    total_n = occupations(gen.dims).sum(axis=1)
    dn = total_n[:, None] - total_n[None, :]
    trace0 = np.trace(rho).real
    drift = herm = 0.0
    min_eig = np.inf
    states = []
    now = 0.0

    def record(r, t):
        nonlocal min_eig
        lab = r * np.exp(-1j * f * dn * t) if f else r.copy()
        states.append(DensityMatrix(lab, gen.dims))
        if check_positivity:
            min_eig = min(min_eig, float(np.linalg.eigvalsh(lab)[0]))

    record(rho, 0.0)
    for target in times[1:]:
        steps = max(1, int(np.ceil((target - now) / dt - 1e-9)))
        h = (target - now) / steps
        for step in range(steps):
            k = g.apply(rho, True)
            acc = k.copy()
            k = g.apply(rho + (0.5 * h) * k, True)
            acc += 2 * k
            k = g.apply(rho + (0.5 * h) * k, True)
            acc += 2 * k
            k = g.apply(rho + h * k, True)
            acc += k
            rho += (h / 6.0) * acc
            if step == steps - 1:
                herm = max(herm, float(np.max(np.abs(rho - rho.conj().T))))
            rho += rho.conj().T
            rho *= 0.5
            # flush entries that would otherwise decay into subnormals, which stall BLAS and LAPACK
            parts = rho.view(float)
            parts[np.abs(parts) < FLUSH_BELOW] = 0.0
        now = target
        drift = max(drift, abs(np.trace(rho).real - trace0))
        if drift > trace_tol:
            raise StepSizeError(f"trace drift {drift:.3e} exceeds {trace_tol:.1e} at t={now}; "
                                "reduce dt")
        record(rho, now)
    run = OracleRun(times, states, float(dt), f, float(drift), herm,
                    float(min_eig) if check_positivity else float("nan"))
    log.debug("oracle run: %d samples, dt=%.4g, drift=%.2e", len(times), dt, drift)
    return run


def coherence_element(rho: DensityMatrix, alpha, gamma) -> complex:
    """<alpha| rho |gamma> for product coherent states given as amplitude vectors."""
    va = product_coherent_vector(alpha, rho.dims)
    vg = product_coherent_vector(gamma, rho.dims)
    return complex(va.conj() @ rho.data @ vg)


@dataclass(frozen=True)
class Observables:
    trace: float
    purity: float
    mean_photons: np.ndarray
    fidelity: float | None = None
    coherence: complex | None = None


def observables(rho: DensityMatrix, reference: DensityMatrix | None = None, coherent_pair=None) -> Observables:
    fid = None
    if reference is not None:
        fid = float(np.vdot(reference.data.conj().T, rho.data).real)
    coh = None
    if coherent_pair is not None:
        coh = coherence_element(rho, *coherent_pair)
    return Observables(rho.trace, rho.purity, rho.mean_photon_numbers(), fid, coh)
