"""Photon-pair generation rates and the Stokes/anti-Stokes cross-correlation.

Normalisation: field operators are flux-normalised, so a spectral density
S(omega) integrates to a rate as R = int d omega / 2 pi S(omega), in units of
gamma31 (pairs per 1/gamma31).  The per-length noise correlation
<F F> = (L / 2 pi N) D delta delta is already absorbed into the xi
couplings through K = density * cross_section * gamma31, so the same single
measure d omega / 2 pi serves rates and Phi(tau).  Multiplying by
``gamma31_hz`` (gamma31 in s^-1) converts to pairs per second.

Spectral densities at one omega:

    Rs~(w)  = |B|^2 + int dz  sum_ab P_a^* D_{a~,b} P_b
    Ras~(w) = |C|^2 + int dz  sum_ab Q_a D_{a,b~} Q_b^*
    X(w)    = A C^* + int dz  sum_ab P_a D_{a,b~} Q_b^*

and Phi(tau) = int d omega / 2 pi exp(-i omega tau) X(omega),
g2(tau) = 1 + |Phi|^2 / (Rs Ras).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid

from .bloch import DensityMatrix, solve_steady_state
from .diffusion import diffusion_matrix
from .errors import DenominatorVanishes, GridTooNarrow, ZeroDrive, ZeroRateNormalization
from .parallel import pmap
from .params import SystemParams
from .propagation import DEFAULT_NZ, boundary_matrix, gauss_nodes, kernel_rows, expm2
from .response import DENOMINATOR_EPS, detuning_aggregates, response_arrays, system_determinant
from . import rydberg

DEFAULT_OMEGA_POINTS = 32768
DEFAULT_OMEGA_HALF_WIDTH = 256.0
EDGE_FRACTION = 1e-6
MASK_LIMIT = 0.01
CHUNK = 2048


def default_omega_grid(points: int = DEFAULT_OMEGA_POINTS,
                       half_width: float = DEFAULT_OMEGA_HALF_WIDTH) -> np.ndarray:
    return np.linspace(-half_width, half_width, points)


@dataclass
class SpectralRates:
    omega: np.ndarray
    rs_d: np.ndarray
    rs_f: np.ndarray
    ras_d: np.ndarray
    ras_f: np.ndarray
    cross: np.ndarray
    mask: np.ndarray  # True where the point was evaluated

    def columns(self):
        return dict(rs_d=self.rs_d, rs_f=self.rs_f, ras_d=self.ras_d, ras_f=self.ras_f)


@dataclass
class RateBreakdown:
    rs_d: float
    rs_f: float
    ras_d: float
    ras_f: float
    spectral: Optional[SpectralRates] = None

    @property
    def rs(self) -> float:
        return self.rs_d + self.rs_f

    @property
    def ras(self) -> float:
        return self.ras_d + self.ras_f


@dataclass
class CorrelationResult:
    tau: np.ndarray
    phi: np.ndarray
    g2: np.ndarray
    rs: float
    ras: float


def _chunk_spectra(params, rho0, D_st, D_as, w, z, wz):
    L = params.length
    resp = response_arrays(params, rho0, w)
    M = resp.coefficient_matrices()
    T = expm2(-M, L)
    abcd = boundary_matrix(T)
    u, v = kernel_rows(M, T, z, L)                      # (N, Nz, 2)
    xi = np.stack([resp.xi_s, resp.xi_as], 1)           # (N, 2, 6)
    P = np.einsum("nzk,nka->nza", u, xi)
    Q = np.einsum("nzk,nka->nza", v, xi)
    Qc = Q.conj()
    fs = np.sum((P.conj() @ D_st) * P, -1).real @ wz
    fas = np.sum((Q @ D_as) * Qc, -1).real @ wz
    fx = np.sum((P @ D_as) * Qc, -1) @ wz
    A, B, C = abcd[:, 0, 0], abcd[:, 0, 1], abcd[:, 1, 0]
    return np.abs(B) ** 2, fs, np.abs(C) ** 2, fas, A * np.conj(C) + fx


def spectral_rates(params: SystemParams, omega_grid: Optional[Sequence[float]] = None,
                   rho0: Optional[DensityMatrix] = None, nz: int = DEFAULT_NZ,
                   workers: int = 1) -> SpectralRates:
    """Spectral densities on ``omega_grid`` (default: 32768 points on [-256, 256])."""
    w = default_omega_grid() if omega_grid is None else np.asarray(omega_grid, float)
    if rho0 is None:
        rho0 = solve_steady_state(params)
    D = diffusion_matrix(params, rho0)
    D_st, D_as = D.stokes_block(), D.antistokes_block()
    z, wz = gauss_nodes(params.length, nz)

    det = system_determinant(detuning_aggregates(params, w), params.omega_c,
                             params.omega_d, params.omega_p)
    mask = np.abs(det) > DENOMINATOR_EPS
    if np.mean(~mask) > MASK_LIMIT:
        raise DenominatorVanishes(f"{np.sum(~mask)} of {w.size} omega points are singular")
    idx = np.flatnonzero(mask)
    pieces = [idx[i:i + CHUNK] for i in range(0, idx.size, CHUNK)]
    parts = pmap(lambda ii: _chunk_spectra(params, rho0, D_st, D_as, w[ii], z, wz),
                 pieces, workers)
    out = [np.full(w.shape, np.nan) for _ in range(4)] + [np.full(w.shape, np.nan, complex)]
    for ii, vals in zip(pieces, parts):
        for k in range(5):
            out[k][ii] = vals[k]
    return SpectralRates(w, *out, mask=mask)


def _integrate(omega, f, mask):
    return float(trapezoid(f[mask], omega[mask]) / (2 * np.pi))


def total_rates(spectral: SpectralRates, check_edges: bool = True) -> RateBreakdown:
    """Trapezoid totals over omega / 2 pi."""
    w, m = spectral.omega, spectral.mask
    if check_edges:
        for name, f in spectral.columns().items():
            g = np.abs(f[m])
            peak = g.max() if g.size else 0.0
            if peak > 0 and max(g[0], g[-1]) > EDGE_FRACTION * peak:
                raise GridTooNarrow(
                    f"{name}: edge density {max(g[0], g[-1]) / peak:.2e} of peak "
                    f"exceeds {EDGE_FRACTION:g}; widen the omega grid")
    c = spectral.columns()
    return RateBreakdown(_integrate(w, c["rs_d"], m), _integrate(w, c["rs_f"], m),
                         _integrate(w, c["ras_d"], m), _integrate(w, c["ras_f"], m),
                         spectral)


def cross_spectrum(params: SystemParams, omega: float,
                   rho0: Optional[DensityMatrix] = None, nz: int = DEFAULT_NZ) -> complex:
    """A C^* + int sum P D Q^* dz at a single omega."""
    return complex(spectral_rates(params, [omega], rho0, nz).cross[0])


def _trapezoid_weights(n: int) -> np.ndarray:
    wt = np.ones(n)
    wt[0] = wt[-1] = 0.5
    return wt


def phi_of_tau(omega: np.ndarray, cross: np.ndarray,
               tau: Optional[np.ndarray] = None):
    """Phi(tau) = int d omega / 2 pi e^{-i omega tau} X(omega), trapezoid rule.

    Without ``tau`` the FFT-conjugate grid tau_j = 2 pi j / (N d omega),
    j = -N/2 .. N/2 - 1, is used; otherwise the sum is done directly.
    """
    omega = np.asarray(omega, float)
    n = omega.size
    dw = omega[1] - omega[0]
    if not np.allclose(np.diff(omega), dw, rtol=1e-9, atol=0):
        raise ValueError("Phi(tau) needs a uniform omega grid")
    Xw = np.nan_to_num(cross) * _trapezoid_weights(n) * dw / (2 * np.pi)
    if tau is None:
        j = np.arange(-(n // 2), n - n // 2)
        tau = 2 * np.pi * j / (n * dw)
        F = np.fft.fft(Xw)[j % n]
        return tau, np.exp(-1j * omega[0] * tau) * F
    tau = np.asarray(tau, float)
    phi = np.empty(tau.shape, complex)
    for s in range(0, tau.size, 256):
        t = tau[s:s + 256]
        phi[s:s + 256] = np.exp(-1j * np.outer(t, omega)) @ Xw
    return tau, phi


def correlation_g2(params: SystemParams, omega_grid: Optional[Sequence[float]] = None,
                   tau_grid: Optional[Sequence[float]] = None,
                   rho0: Optional[DensityMatrix] = None,
                   spectral: Optional[SpectralRates] = None,
                   nz: int = DEFAULT_NZ, workers: int = 1,
                   check_edges: bool = True) -> CorrelationResult:
    if spectral is None:
        spectral = spectral_rates(params, omega_grid, rho0, nz, workers)
    tot = total_rates(spectral, check_edges)
    rs, ras = tot.rs, tot.ras
    if not (rs * ras > 1e-30):
        raise ZeroRateNormalization(
            f"Rs * Ras = {rs * ras:.3e}: the medium emits no pairs, g2 is undefined")
    tau, phi = phi_of_tau(spectral.omega, spectral.cross,
                          None if tau_grid is None else np.asarray(tau_grid, float))
    g2 = 1.0 + np.abs(phi) ** 2 / (rs * ras)
    return CorrelationResult(tau, phi, g2, rs, ras)


def oscillation_frequency(tau: np.ndarray, phi2: np.ndarray, floor: float = 1e-6):
    """Dominant angular frequency of the ringing of |Phi(tau)|^2 after its peak.

    The ringing segment runs from the first minimum after the main peak to
    the last sample still above ``floor`` times the peak.  Its logarithm is
    detrended by a straight-line fit (removing the exponential envelope),
    Hann-windowed and Fourier transformed.  Returns (frequency, bin width)
    with bin width 2 pi / segment length; frequencies below one bin are
    ignored.
    """
    tau = np.asarray(tau, float)
    f = np.asarray(phi2, float)
    i0 = int(np.argmax(f))
    k = i0
    while k + 1 < f.size and f[k + 1] < f[k]:
        k += 1
    above = np.flatnonzero(f[i0:] >= floor * f[i0])
    j = i0 + int(above[-1])
    if j - k < 8:
        raise ValueError("ringing segment too short to analyse")
    t = tau[k:j + 1]
    y = np.log(f[k:j + 1])
    y = y - np.polyval(np.polyfit(t, y, 1), t)
    span = t[-1] - t[0]
    npad = 8 * t.size
    spec = np.abs(np.fft.rfft(y * np.hanning(t.size), npad))
    freqs = 2 * np.pi * np.fft.rfftfreq(npad, t[1] - t[0])
    bin_width = 2 * np.pi / span
    ok = freqs > bin_width
    return float(freqs[ok][np.argmax(spec[ok])]), float(bin_width)


def drive_sweep_rates(params: SystemParams, omega_d_grid: Sequence[float],
                      omega_grid: Optional[Sequence[float]] = None,
                      nz: int = DEFAULT_NZ, workers: int = 1,
                      check_edges: bool = True) -> List[dict]:
    """Total rates and the Rydberg validity flag at each drive strength."""
    rows = []
    for od in omega_d_grid:
        p = params.replace(omega_d=float(od))
        rho0 = solve_steady_state(p)
        tot = total_rates(spectral_rates(p, omega_grid, rho0, nz, workers), check_edges)
        s55 = float(rho0.s(5, 5).real)
        try:
            occ = rydberg.occupancy(p, s55, rydberg.blockade_radius(p))
        except ZeroDrive:
            occ = 0.0
        rows.append(dict(omega_d=float(od), rs_d=tot.rs_d, rs_f=tot.rs_f,
                         ras_d=tot.ras_d, ras_f=tot.ras_f, occupancy=occ,
                         valid=bool(occ <= 1.0)))
    return rows
