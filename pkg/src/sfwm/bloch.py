"""Zeroth-order Bloch equations of the five-level medium.

Expectations are stored as a 5x5 array S with S[m, n] = <sigma_mn>
(0-based indices for the 1-based level labels).  The vectorised form uses
index 5*m + n.  The drift L satisfies dS/dt = L S with the generated fields
and noise switched off.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DegenerateSteadyState, StepSizeTooLarge
from .params import NLEVELS, SystemParams

N2 = NLEVELS * NLEVELS


def vindex(m: int, n: int) -> int:
    """Vector index of sigma_mn for 1-based labels."""
    return NLEVELS * (m - 1) + (n - 1)


@dataclass(frozen=True)
class DensityMatrix:
    """Steady-state expectation values; ``rho[m, n] = <sigma_{m+1,n+1}>``."""

    rho: np.ndarray

    def __post_init__(self):
        r = np.array(self.rho, dtype=complex).reshape(NLEVELS, NLEVELS)
        r.setflags(write=False)
        object.__setattr__(self, "rho", r)

    def s(self, m: int, n: int) -> complex:
        """<sigma_mn> with 1-based labels."""
        return self.rho[m - 1, n - 1]

    @property
    def populations(self) -> np.ndarray:
        return self.rho.diagonal().real.copy()

    @property
    def vector(self) -> np.ndarray:
        return self.rho.reshape(N2).copy()

    def trace(self) -> complex:
        return np.trace(self.rho)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.rho - self.rho.conj().T)))

    @classmethod
    def pure(cls, level: int) -> "DensityMatrix":
        r = np.zeros((NLEVELS, NLEVELS), complex)
        r[level - 1, level - 1] = 1.0
        return cls(r)


def build_drift_matrix(params: SystemParams, omega: float = 0.0) -> np.ndarray:
    """25x25 drift matrix L with d<sigma>/dt = L <sigma>.

    Coherent part: d sigma_mn/dt = i(sum_k H_km sigma_kn - sum_k H_nk sigma_mk),
    followed by the phenomenological dephasing of every coherence and the
    population transfer along the six decay channels.
    """
    H = params.hamiltonian(omega)
    L = np.zeros((N2, N2), complex)
    for m in range(NLEVELS):
        for n in range(NLEVELS):
            row = NLEVELS * m + n
            for k in range(NLEVELS):
                if H[k, m] != 0:
                    L[row, NLEVELS * k + n] += 1j * H[k, m]
                if H[n, k] != 0:
                    L[row, NLEVELS * m + k] -= 1j * H[n, k]
    gam = params.dephasing_matrix()
    for m in range(NLEVELS):
        for n in range(NLEVELS):
            if m != n:
                L[NLEVELS * m + n, NLEVELS * m + n] -= gam[m, n]
    for (up, lo), rate in params.decay_rates.items():
        iu, il = vindex(up, up), vindex(lo, lo)
        L[iu, iu] -= rate
        L[il, iu] += rate
    return L


def _constrained_system(L: np.ndarray):
    A = L.copy()
    b = np.zeros(N2, complex)
    # sigma_11 row replaced by the trace condition
    A[0, :] = 0.0
    A[0, [vindex(m, m) for m in range(1, NLEVELS + 1)]] = 1.0
    b[0] = 1.0
    return A, b


def solve_steady_state(params: SystemParams, rcond_min: float = 1e-12) -> DensityMatrix:
    """Unique steady state with unit trace, by dense LU."""
    L = build_drift_matrix(params)
    A, b = _constrained_system(L)
    try:
        with warnings.catch_warnings():
            # exact singularity is reported below as DegenerateSteadyState
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu, piv = sla.lu_factor(A, check_finite=True)
    except (ValueError, sla.LinAlgError) as exc:  # pragma: no cover
        raise DegenerateSteadyState(str(exc)) from exc
    diag = np.abs(np.diag(lu))
    if diag.min() == 0.0:
        raise DegenerateSteadyState("constrained Bloch system is singular")
    anorm = np.linalg.norm(A, 1)
    ainv_norm = np.linalg.norm(sla.lu_solve((lu, piv), np.eye(N2)), 1)
    rcond = 1.0 / (anorm * ainv_norm)
    if not np.isfinite(rcond) or rcond < rcond_min:
        raise DegenerateSteadyState(
            f"reciprocal condition number {rcond:.3e} below {rcond_min:g}; "
            "the steady state is not unique")
    x = sla.lu_solve((lu, piv), b)
    rho = x.reshape(NLEVELS, NLEVELS)
    # symmetrise away solver round-off
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho)


def _rk4_step_matrix(L: np.ndarray, h: float) -> np.ndarray:
    # classical RK4 applied to a linear system, as a single matrix
    hL = h * L
    I = np.eye(L.shape[0], dtype=complex)
    hL2 = hL @ hL
    return I + hL + hL2 / 2 + hL2 @ hL / 6 + hL2 @ hL2 / 24


def integrate_bloch(params: SystemParams, rho_init: DensityMatrix,
                    t_end: float, dt: float | None = None,
                    trace_tol: float = 1e-6) -> DensityMatrix:
    """Fixed-step RK4 integration of dS/dt = L S from ``rho_init``.

    The linear one-step map is built once and raised to the number of steps
    by binary powering, so long runs with small steps stay cheap.
    ``dt`` defaults to 0.01 / (spectral radius of L).
    """
    L = build_drift_matrix(params)
    lam_max = float(np.max(np.abs(np.linalg.eigvals(L))))
    if dt is None:
        dt = 0.01 / max(lam_max, 1e-300)
    if dt <= 0 or t_end < 0:
        raise ValueError("dt must be positive and t_end non-negative")
    nsteps = max(1, int(np.ceil(t_end / dt - 1e-12)))
    h = t_end / nsteps
    R = _rk4_step_matrix(L, h)
    # RK4 stability: the one-step map must not amplify any mode
    if np.max(np.abs(np.linalg.eigvals(R))) > 1.0 + 1e-9:
        raise StepSizeTooLarge(f"step {h:.3g} outside the RK4 stability region")
    x = rho_init.vector
    tr0 = x[[vindex(m, m) for m in range(1, NLEVELS + 1)]].sum()
    P = np.eye(N2, dtype=complex)
    base = R
    k = nsteps
    while k:
        if k & 1:
            P = base @ P
        k >>= 1
        if k:
            base = base @ base
    x = P @ x
    rho = x.reshape(NLEVELS, NLEVELS)
    if abs(np.trace(rho) - tr0) > trace_tol:
        raise StepSizeTooLarge(f"trace drifted by {abs(np.trace(rho) - tr0):.3e}")
    return DensityMatrix(rho)


def steady_state_residual(params: SystemParams, rho: DensityMatrix) -> float:
    """||L rho|| / ||L||, the fixed-point defect."""
    L = build_drift_matrix(params)
    return float(np.linalg.norm(L @ rho.vector) / np.linalg.norm(L))
