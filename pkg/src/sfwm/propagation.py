"""Counter-propagating Stokes/anti-Stokes boundary-value problem.

With M = [[g_R, kappa_s], [kappa_as, Gamma_as]] and y = (a_s, a_as^dag),

    dy/dz = -M y + (xi^s . F, xi^as . F),

so the homogeneous propagator over the cell is T = exp(-M L) = [[a, b], [c, d]].
Rearranging for the physical inputs (a_s(0), a_as^dag(L)) gives the boundary
matrix [[a - bc/d, b/d], [-c/d, 1/d]] and the noise kernels

    [P; Q](z) = [[1, -b/d], [0, -1/d]] exp(M (z - L)) [xi^s; xi^as].

Everything here is vectorised over a leading omega axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .diffusion import DiffusionMatrix
from .errors import SingularBoundary
from .response import ResponseSet

BOUNDARY_EPS = 1e-14
DEFAULT_NZ = 32


def _sinhc_cosh(x):
    """sinh(x)/x and cosh(x), with a series branch near x = 0."""
    x = np.asarray(x, complex)
    small = np.abs(x) < 1e-4
    xs = np.where(small, 1.0, x)
    sc = np.where(small, 1 + x * x / 6 + x ** 4 / 120, np.sinh(xs) / xs)
    ch = np.where(small, 1 + x * x / 2 + x ** 4 / 24, np.cosh(x))
    return sc, ch


def expm2(M, t=1.0):
    """exp(M t) for stacked 2x2 matrices M (..., 2, 2) and times t.

    ``t`` broadcasts against the leading axes of M; the result has shape
    broadcast(M[..., 0, 0], t) + (2, 2).  Uses the exact formula
    exp(X) = e^mu (cosh(delta) I + sinh(delta)/delta (X - mu I)).
    """
    M = np.asarray(M, complex)
    t = np.asarray(t, float)
    a, b, c, d = M[..., 0, 0], M[..., 0, 1], M[..., 1, 0], M[..., 1, 1]
    mu = 0.5 * (a + d)
    hd = 0.5 * (a - d)
    delta = np.sqrt(hd * hd + b * c)
    sc, ch = _sinhc_cosh(delta * t)
    e = np.exp(mu * t)
    out = np.empty(np.broadcast(a, t).shape + (2, 2), complex)
    out[..., 0, 0] = e * (ch + sc * t * hd)
    out[..., 1, 1] = e * (ch - sc * t * hd)
    out[..., 0, 1] = e * sc * t * b
    out[..., 1, 0] = e * sc * t * c
    return out


def transfer_matrix(resp, L: float) -> np.ndarray:
    """T = exp(-M L).  ``resp`` is a ResponseSet or an (..., 2, 2) array."""
    M = resp.coefficient_matrix() if isinstance(resp, ResponseSet) else np.asarray(resp)
    return expm2(-M, L)


def boundary_matrix(T) -> np.ndarray:
    T = np.asarray(T, complex)
    a, b, c, d = T[..., 0, 0], T[..., 0, 1], T[..., 1, 0], T[..., 1, 1]
    if np.any(np.abs(d) <= BOUNDARY_EPS):
        raise SingularBoundary("|d| <= 1e-14: the boundary problem is singular")
    out = np.empty(T.shape, complex)
    out[..., 0, 0] = a - b * c / d
    out[..., 0, 1] = b / d
    out[..., 1, 0] = -c / d
    out[..., 1, 1] = 1.0 / d
    return out


def gauss_nodes(L: float, nz: int = DEFAULT_NZ):
    """Gauss-Legendre nodes and weights on [0, L]."""
    x, w = np.polynomial.legendre.leggauss(nz)
    return 0.5 * L * (x + 1.0), 0.5 * L * w


def kernel_rows(M, T, z, L: float):
    """Rows u(z) = [1, -b/d] E(z) and v(z) = [0, -1/d] E(z), E = exp(M (z - L)).

    Shapes: M, T (..., 2, 2); z (Nz,); returns u, v of shape (..., Nz, 2).
    """
    M = np.asarray(M, complex)
    T = np.asarray(T, complex)
    b, d = T[..., 0, 1], T[..., 1, 1]
    if np.any(np.abs(d) <= BOUNDARY_EPS):
        raise SingularBoundary("|d| <= 1e-14: the boundary problem is singular")
    E = expm2(M[..., None, :, :], np.asarray(z, float) - L)   # (..., Nz, 2, 2)
    r = (-b / d)[..., None]
    q = (-1.0 / d)[..., None]
    u = np.stack([E[..., 0, 0] + r * E[..., 1, 0], E[..., 0, 1] + r * E[..., 1, 1]], -1)
    v = np.stack([q * E[..., 1, 0], q * E[..., 1, 1]], -1)
    return u, v


def noise_kernels(resp: ResponseSet, T, L: float, zgrid):
    """P_a(z), Q_a(z) as (Nz, 6) arrays in CHANNELS order."""
    xi = resp.xi_matrix()
    u, v = kernel_rows(resp.coefficient_matrix(), T, zgrid, L)
    return u @ xi, v @ xi


@dataclass
class TransferSolution:
    transfer: np.ndarray
    abcd: np.ndarray
    zgrid: np.ndarray
    weights: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    omega: float


def solve_transfer(resp: ResponseSet, L: float, nz: int = DEFAULT_NZ,
                   zgrid: Optional[np.ndarray] = None,
                   weights: Optional[np.ndarray] = None) -> TransferSolution:
    """Full per-omega solution on Gauss-Legendre nodes (or a supplied grid)."""
    if zgrid is None:
        zgrid, weights = gauss_nodes(L, nz)
    elif weights is None:
        raise ValueError("a custom zgrid needs quadrature weights")
    T = transfer_matrix(resp, L)
    abcd = boundary_matrix(T)
    P, Q = noise_kernels(resp, T, L, zgrid)
    return TransferSolution(T, abcd, np.asarray(zgrid), np.asarray(weights), P, Q, resp.omega)


def commutator_diagnostic(sol: TransferSolution, D: DiffusionMatrix) -> float:
    """|A|^2 - |B|^2 + int sum P_a P_b^* (D_{a,b~} - D_{b~,a}) dz - 1.

    Zero when the noise exactly restores [a_s(L), a_s^dag(L)] = 1.
    Returned as a real number (the imaginary part is round-off).
    """
    A, B = sol.abcd[0, 0], sol.abcd[0, 1]
    dif = D.antistokes_block() - D.reversed_antistokes_block()
    dens = np.einsum("za,zb,ab->z", sol.P, sol.P.conj(), dif)
    return float((abs(A) ** 2 - abs(B) ** 2 + np.sum(sol.weights * dens) - 1.0).real)
