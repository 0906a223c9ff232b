"""First-order response of the medium to the generated Stokes/anti-Stokes fields.

Linearising the Heisenberg-Langevin equations around the zeroth-order state
leaves a closed 6x6 problem for the cross coherences

    x = (sigma21, sigma31, sigma24, sigma34, sigma25, sigma35),

    A x = -i (a_s u_s + a_as^dag u_as) + F,

where the diagonal of A holds the detuning aggregates g1..g6.  sigma24
radiates the Stokes field and sigma31 the (conjugate) anti-Stokes field, so

    g_R     = -iK x24[a_s]       kappa_s  = -iK x24[a_as^dag]
    Gamma   = -iK x31[a_as^dag]  kappa_as = -iK x31[a_s]
    xi^s_a  = 2i sqrt(K) (A^-1)[24, a]
    xi^as_a = 2i sqrt(K) (A^-1)[31, a]

with K = density * cross_section * gamma31.  ``propagation_coefficients``
evaluates these through exact cofactor polynomials (Cramer's rule); the
numeric ``first_order_oracle`` solves the same problem from the 25x25 drift
matrix.  ``printed_coefficients`` keeps the truncated compact forms for auditing
only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .bloch import DensityMatrix, build_drift_matrix, solve_steady_state, vindex
from .errors import DenominatorVanishes, SingularFirstOrderSystem
from .parallel import pmap
from .params import SystemParams

CHANNELS = ("21", "31", "24", "34", "25", "35")
CONJ_CHANNELS = tuple(c[::-1] for c in CHANNELS)
_CROSS = [(int(c[0]), int(c[1])) for c in CHANNELS]
CROSS_INDEX = [vindex(m, n) for m, n in _CROSS]

DENOMINATOR_EPS = 1e-12


@dataclass(frozen=True)
class DetuningAggregates:
    g1: complex
    g2: complex
    g3: complex
    g4: complex
    g5: complex
    g6: complex

    def as_tuple(self):
        return self.g1, self.g2, self.g3, self.g4, self.g5, self.g6


@dataclass(frozen=True)
class ResponseSet:
    gamma_as: complex
    g_raman: complex
    kappa_s: complex
    kappa_as: complex
    xi_s: Dict[str, complex]
    xi_as: Dict[str, complex]
    omega: float

    def coefficient_matrix(self) -> np.ndarray:
        """[[g_R, kappa_s], [kappa_as, Gamma_as]]."""
        return np.array([[self.g_raman, self.kappa_s],
                         [self.kappa_as, self.gamma_as]])

    def xi_matrix(self) -> np.ndarray:
        """2x6 array, rows (xi^s, xi^as) in CHANNELS order."""
        return np.array([[self.xi_s[c] for c in CHANNELS],
                         [self.xi_as[c] for c in CHANNELS]])


@dataclass
class ResponseArrays:
    """Vectorised ResponseSet over an omega grid."""

    omega: np.ndarray
    gamma_as: np.ndarray
    g_raman: np.ndarray
    kappa_s: np.ndarray
    kappa_as: np.ndarray
    xi_s: np.ndarray   # (N, 6)
    xi_as: np.ndarray  # (N, 6)
    determinant: np.ndarray = field(repr=False)

    def at(self, i: int) -> ResponseSet:
        return ResponseSet(
            complex(self.gamma_as[i]), complex(self.g_raman[i]),
            complex(self.kappa_s[i]), complex(self.kappa_as[i]),
            dict(zip(CHANNELS, self.xi_s[i].tolist())),
            dict(zip(CHANNELS, self.xi_as[i].tolist())),
            float(self.omega[i]))

    def coefficient_matrices(self) -> np.ndarray:
        M = np.empty(self.omega.shape + (2, 2), complex)
        M[..., 0, 0] = self.g_raman
        M[..., 0, 1] = self.kappa_s
        M[..., 1, 0] = self.kappa_as
        M[..., 1, 1] = self.gamma_as
        return M


def detuning_aggregates(params: SystemParams, omega) -> DetuningAggregates:
    gam = params.dephasing_matrix()
    w = np.asarray(omega, dtype=float)
    dp, dc, d15 = params.delta_p, params.delta_c, params.delta_15
    return DetuningAggregates(
        g1=gam[1, 0] + 1j * w,
        g2=gam[1, 3] + 1j * (w + dp),
        g3=gam[1, 4] + 1j * (w + d15),
        g4=gam[2, 0] + 1j * (w - dc),
        g5=gam[2, 3] + 1j * (-dc + w + dp),
        g6=gam[2, 4] + 1j * (-dc + w + d15),
    )


def denominator(agg: DetuningAggregates, omega_c: complex, omega_d: complex):
    """The compact denominator (a subset of the full determinant)."""
    g1, g2, g3, g4, g5, g6 = agg.as_tuple()
    c = abs(omega_c) ** 2
    d = abs(omega_d) ** 2
    return g2 * g3 * c * d - 2 * c ** 2 * d + g2 * g5 * c ** 2 + g2 * g3 * g5 * g6 * c


def system_determinant(agg: DetuningAggregates, omega_c: complex,
                       omega_d: complex, omega_p: complex):
    """det A of the 6x6 cross-coherence system."""
    g1, g2, g3, g4, g5, g6 = agg.as_tuple()
    c = abs(omega_c) ** 2
    d = abs(omega_d) ** 2
    p = abs(omega_p) ** 2
    return (c ** 3 - 2 * c ** 2 * d - 2 * c ** 2 * p
            + c ** 2 * (g1 * g4 + g2 * g5 + g3 * g6)
            + c * d ** 2 + 2 * c * d * p
            + c * d * (g2 * g3 + g5 * g6 - 2 * g1 * g4)
            + c * p ** 2 + c * p * (g1 * g2 + g4 * g5 - 2 * g3 * g6)
            + c * (g1 * g2 * g4 * g5 + g1 * g3 * g4 * g6 + g2 * g3 * g5 * g6)
            + d ** 2 * g1 * g4 + d * p * (g1 * g6 + g3 * g4)
            + d * (g1 * g2 * g3 * g4 + g1 * g4 * g5 * g6)
            + p ** 2 * g3 * g6 + p * (g1 * g2 * g3 * g6 + g3 * g4 * g5 * g6)
            + g1 * g2 * g3 * g4 * g5 * g6)


def _cofactor_rows(agg: DetuningAggregates, Oc: complex, Od: complex, Op: complex):
    """Rows 24 and 31 of adj(A), each as a tuple over CHANNELS."""
    g1, g2, g3, g4, g5, g6 = agg.as_tuple()
    c, d, p = abs(Oc) ** 2, abs(Od) ** 2, abs(Op) ** 2
    Occ, Odc, Opc = np.conj(Oc), np.conj(Od), np.conj(Op)
    row24 = (
        1j * Op * (-c ** 2 + c * d + c * p - c * g3 * g6 + c * g4 * g5
                   + d * g3 * g4 + p * g3 * g6 + g3 * g4 * g5 * g6),
        Oc * Op * (c * g1 + c * g5 - d * g1 + d * g3 + g1 * g3 * g6 + g3 * g5 * g6),
        (c ** 2 * g5 + c * d * g3 + c * p * g1 + c * g1 * g4 * g5 + c * g3 * g5 * g6
         + d * g1 * g3 * g4 + p * g1 * g3 * g6 + g1 * g3 * g4 * g5 * g6),
        1j * Oc * (-c ** 2 + c * d + c * p - c * g1 * g4 - c * g3 * g6
                   + d * g1 * g4 + p * g3 * g6 - g1 * g3 * g4 * g6),
        1j * Odc * (-c ** 2 + c * d + c * p - c * g1 * g4 + c * g5 * g6
                    + d * g1 * g4 + p * g1 * g6 + g1 * g4 * g5 * g6),
        Oc * Odc * (c * g3 + c * g5 + p * g1 - p * g3 + g1 * g3 * g4 + g1 * g4 * g5),
    )
    row31 = (
        1j * Occ * (-c ** 2 + 2 * c * d + c * p - c * g2 * g5 - c * g3 * g6
                    - d ** 2 - d * p - d * g2 * g3 - d * g5 * g6 + p * g3 * g6
                    - g2 * g3 * g5 * g6),
        (c ** 2 * g1 - 2 * c * d * g1 + c * p * g5 + c * g1 * g2 * g5 + c * g1 * g3 * g6
         + d ** 2 * g1 + d * p * g3 + d * g1 * g2 * g3 + d * g1 * g5 * g6
         + p * g3 * g5 * g6 + g1 * g2 * g3 * g5 * g6),
        Occ * Opc * (c * g1 + c * g5 - d * g1 + d * g3 + g1 * g3 * g6 + g3 * g5 * g6),
        1j * Opc * (-c ** 2 + c * d + c * p + c * g1 * g2 - c * g3 * g6
                    + d * g1 * g6 + p * g3 * g6 + g1 * g2 * g3 * g6),
        1j * Occ * Odc * Opc * (-c + d + p + g1 * g2 + g1 * g6 + g5 * g6),
        Odc * Opc * (c * g1 + c * g3 + c * g5 - d * g1 - p * g3 - g1 * g2 * g3),
    )
    return row24, row31


def _drive_vectors(rho0: DensityMatrix):
    """Source terms per unit g_s a_s and per unit g_as a_as^dag, CHANNELS order."""
    s = rho0.s
    u_s = (s(4, 1), 0.0, s(4, 4) - s(2, 2), -s(3, 2), s(4, 5), 0.0)
    u_as = (-s(2, 3), s(1, 1) - s(3, 3), 0.0, s(1, 4), 0.0, s(1, 5))
    return u_s, u_as


def response_arrays(params: SystemParams, rho0: DensityMatrix, omegas,
                    eps: float = DENOMINATOR_EPS) -> ResponseArrays:
    """Closed-form coefficients on an array of omegas."""
    w = np.atleast_1d(np.asarray(omegas, dtype=float))
    agg = detuning_aggregates(params, w)
    Oc, Od, Op = (complex(params.omega_c), complex(params.omega_d),
                  complex(params.omega_p))
    det = np.asarray(system_determinant(agg, Oc, Od, Op), complex) * np.ones_like(w)
    if np.any(np.abs(det) <= eps):
        bad = w[np.abs(det) <= eps]
        raise DenominatorVanishes(f"|det| <= {eps:g} at omega = {bad[:5].tolist()}")
    row24, row31 = _cofactor_rows(agg, Oc, Od, Op)
    row24 = np.stack([np.broadcast_to(np.asarray(x, complex), w.shape) for x in row24], -1)
    row31 = np.stack([np.broadcast_to(np.asarray(x, complex), w.shape) for x in row31], -1)
    u_s, u_as = (np.array(u, complex) for u in _drive_vectors(rho0))
    K = params.optical_depth_rate
    inv = 1.0 / det
    x24_s = -1j * (row24 @ u_s) * inv
    x24_as = -1j * (row24 @ u_as) * inv
    x31_s = -1j * (row31 @ u_s) * inv
    x31_as = -1j * (row31 @ u_as) * inv
    xi_pref = 2j * np.sqrt(K) * inv[:, None]
    return ResponseArrays(
        omega=w,
        gamma_as=-1j * K * x31_as,
        g_raman=-1j * K * x24_s,
        kappa_s=-1j * K * x24_as,
        kappa_as=-1j * K * x31_s,
        xi_s=xi_pref * row24,
        xi_as=xi_pref * row31,
        determinant=det,
    )


def propagation_coefficients(params: SystemParams, rho0: DensityMatrix,
                             omega: float, eps: float = DENOMINATOR_EPS) -> ResponseSet:
    return response_arrays(params, rho0, [omega], eps).at(0)


def first_order_oracle(params: SystemParams, rho0: DensityMatrix, omega: float,
                       rcond_min: float = 1e-14) -> dict:
    """Independent numeric solve of the linearised problem.

    The cross-coherence block of the full drift matrix (at detuning omega)
    is inverted against sources obtained from the commutator of each
    generated-field coupling with sigma_mn.
    """
    L = build_drift_matrix(params, omega)
    ci = CROSS_INDEX
    B = L[np.ix_(ci, ci)]
    rest = [i for i in range(L.shape[0]) if i not in ci]
    if np.any(L[np.ix_(rest, ci)] != 0):  # pragma: no cover
        raise SingularFirstOrderSystem("cross block does not close")
    if 1.0 / np.linalg.cond(B) < rcond_min:
        raise SingularFirstOrderSystem("first-order block is rank deficient")
    y = rho0.vector

    def source(op):
        # i<[op, sigma_mn]> for every mn, restricted to the cross block
        out = np.zeros(len(ci), complex)
        for r, (m, n) in enumerate(_CROSS):
            E = np.zeros((5, 5), complex)
            E[m - 1, n - 1] = 1.0
            X = 1j * (op @ E - E @ op)
            out[r] = np.sum(X * y.reshape(5, 5))
        return out

    P_s = np.zeros((5, 5), complex)
    P_s[3, 1] = -1.0   # -a_s |4><2|
    P_as = np.zeros((5, 5), complex)
    P_as[0, 2] = -1.0  # -a_as^dag |1><3|
    x_s = np.linalg.solve(B, -source(P_s))
    x_as = np.linalg.solve(B, -source(P_as))
    W = np.linalg.solve(B, -np.eye(len(ci)))
    K = params.optical_depth_rate
    i24, i31 = CHANNELS.index("24"), CHANNELS.index("31")
    return {
        "gamma_as": -1j * K * x_as[i31],
        "g_raman": -1j * K * x_s[i24],
        "kappa_s": -1j * K * x_as[i24],
        "kappa_as": -1j * K * x_s[i31],
        "xi_s": 2j * np.sqrt(K) * W[i24],
        "xi_as": 2j * np.sqrt(K) * W[i31],
    }


def printed_coefficients(params: SystemParams, rho0: DensityMatrix, omega: float) -> dict:
    """Truncated compact forms of the four coefficients.

    Kept only to document how far they are from the exact response; the
    keys use the conventional labels Gamma, g_R, kappa_s, kappa_as.
    """
    agg = detuning_aggregates(params, omega)
    g1, g2, g3, g4, g5, g6 = (complex(x) for x in agg.as_tuple())
    Oc, Od, Op = (complex(params.omega_c), complex(params.omega_d),
                  complex(params.omega_p))
    a = abs
    W = denominator(agg, Oc, Od)
    A1 = 1j * g3 * a(Oc * Od) ** 2 + 1j * g5 * a(Oc) ** 4 + 1j * g3 * g5 * g6 * a(Oc) ** 2
    A2 = -Oc * a(Oc * Od) ** 2 + g3 * g6 * Oc * a(Oc) ** 2 + a(Oc) ** 4 * Oc
    A3 = g5 * g6 * a(Oc) ** 2 * Od - a(Oc) ** 4 * Od + a(Oc * Od) ** 2 * Od
    A4 = -1j * g3 * a(Oc) ** 2 * Oc * Od - 1j * g5 * a(Oc) ** 2 * Oc * Od
    A5 = a(Oc * Od) ** 2 * Op - g3 * g6 * a(Oc) ** 6 * a(Op) ** 2 + g3 * g4 * g5 * g6 * Op
    A6 = (-1j * g3 * Oc * a(Od) ** 2 * Op - 1j * g5 * a(Oc) ** 2 * Oc * Op
          - 1j * g3 * g5 * g6 * Oc * Op)
    B1 = (1j * g3 * Oc * Od ** 2 * Op + 1j * g5 * a(Oc) ** 2 * Oc * Op
          + 1j * g3 * g5 * g6 * Oc * Op)
    B2 = -1j * g3 * a(Oc) ** 2 * Od * Op - 1j * g5 * a(Oc) ** 2 * Od * Op
    B3 = -a(Oc * Od) ** 2 * Op + g3 * g6 * a(Oc) ** 2 * Op + a(Oc) ** 4 * Op
    B4 = g5 * g6 * Oc * Od * Op
    B5 = -g2 * g3 * Oc * a(Od) ** 2 - g2 * g5 * a(Oc) ** 2 * Oc - g2 * g3 * g5 * g6 * Oc
    B6 = -1j * g3 * g5 * g6 * a(Op) ** 2
    s = rho0.s
    K = params.optical_depth_rate
    pre = -1j * K / W
    out = {
        "Gamma": pre * (A1 * s(2, 2) + A2 * s(3, 2) + A5 * s(4, 1) - A1 * s(4, 4) + A3 * s(4, 5)),
        "kappa_s": pre * (B1 * s(2, 2) + B3 * s(3, 2) + B5 * s(4, 1) - B1 * s(4, 4) + B4 * s(4, 5)),
        "kappa_as": pre * (A6 * s(1, 1) - A2 * s(1, 4) + A4 * s(1, 5) - A5 * s(2, 3) - A6 * s(3, 3)),
        "g_R": pre * (B6 * s(1, 1) - B3 * s(1, 4) + B2 * s(1, 5) - B5 * s(2, 3) - B6 * s(3, 3)),
    }
    xp = 2j * np.sqrt(K) / W
    c2, d2, p2 = a(Oc) ** 2, a(Od) ** 2, a(Op) ** 2
    out["xi_as"] = {
        "21": xp * (-1j * g5 * g6 * Oc * d2 - 1j * g2 * g5 * c2 * Oc - 1j * g2 * g3 * g5 * g6 * Oc),
        "31": xp * (g5 * c2 * p2 + g3 * g5 * g6 * p2),
        "24": xp * (g5 * c2 * Oc * Op + g3 * g5 * g6 * Oc * Op),
        "34": xp * (1j * c2 * d2 * Op - 1j * g3 * g6 * c2 * Op),
        "25": xp * (1j * g5 * g6 * Oc * Od * Op + 1j * Oc * d2 * Od * Op),
        "35": xp * (g3 * c2 * Od * Op + g5 * c2 * Od * Op),
    }
    out["xi_s"] = {
        "21": xp * (1j * g3 * g4 * g5 * g6 * Op - 1j * g3 * g6 * c2 * Op),
        "31": xp * (g3 * Oc * d2 * Op + g3 * g5 * g6 * Oc * Op),
        "24": xp * (g3 * c2 * d2 + g3 * g5 * g6 * c2),
        "34": xp * (1j * c2 * Oc * Od ** 2 - 1j * g3 * g6 * c2 * Oc),
        "25": xp * (1j * g5 * g6 * c2 * Od + 1j * c2 * d2 * Od),
        "35": xp * (g5 * c2 * Oc * Od + g3 * c2 * Oc * Od),
    }
    return out


def coefficient_scan(params: SystemParams, omega_grid: Optional[Sequence[float]] = None,
                     omega_d_grid: Optional[Sequence[float]] = None,
                     omega: float = 0.0, workers: int = 1) -> List[dict]:
    """Per-point coefficients over an omega grid or an Omega_d grid.

    Exactly one grid must be given.  Points where the determinant vanishes
    are returned with ``ok = False`` and NaN values.
    """
    if (omega_grid is None) == (omega_d_grid is None):
        raise ValueError("give exactly one of omega_grid, omega_d_grid")

    def row(p, w, x):
        try:
            r = propagation_coefficients(p, solve_steady_state(p) if x is None else x, w)
            det = abs(system_determinant(detuning_aggregates(p, w), p.omega_c,
                                         p.omega_d, p.omega_p))
            return dict(ok=True, omega=w, omega_d=float(abs(p.omega_d)), resp=r, det=det)
        except DenominatorVanishes:
            return dict(ok=False, omega=w, omega_d=float(abs(p.omega_d)), resp=None, det=0.0)

    if omega_grid is not None:
        rho0 = solve_steady_state(params)
        w = np.asarray(omega_grid, float)
        det = np.abs(system_determinant(detuning_aggregates(params, w), params.omega_c,
                                        params.omega_d, params.omega_p)) * np.ones_like(w)
        good = np.flatnonzero(det > DENOMINATOR_EPS)
        arr = response_arrays(params, rho0, w[good]) if good.size else None
        out = [dict(ok=False, omega=float(x), omega_d=float(abs(params.omega_d)),
                    resp=None, det=0.0) for x in w]
        for k, i in enumerate(good):
            out[i].update(ok=True, resp=arr.at(k), det=float(det[i]))
        return out
    return pmap(lambda od: row(params.replace(omega_d=float(od)), omega, None),
                omega_d_grid, workers)
