"""Langevin diffusion coefficients D_{mn,m'n'}.

The generalised Einstein relation gives

    D_{mn,m'n'} = <Dr(sigma_mn sigma_m'n')> - <Dr(sigma_mn) sigma_m'n'>
                  - <sigma_mn Dr(sigma_m'n')>,

with Dr the deterministic drift and sigma_mn sigma_m'n' = delta_{nm'} sigma_mn'.
``einstein_oracle`` evaluates this mechanically from the drift matrix and is
what the propagation stage consumes.  ``diffusion_from_table`` is a
hand-written list of the closed-form entries used to cross-check it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from .bloch import DensityMatrix, build_drift_matrix
from .params import NLEVELS, SystemParams
from .response import CHANNELS, CONJ_CHANNELS

LABELS = CHANNELS + CONJ_CHANNELS

# entries listed in closed form (noise of the Stokes and anti-Stokes sets)
STOKES_ENTRIES = (
    ("12", "24"), ("12", "25"), ("13", "31"), ("13", "34"), ("13", "35"),
    ("42", "21"), ("42", "24"), ("43", "31"), ("43", "34"), ("43", "35"),
    ("52", "21"), ("53", "31"), ("53", "34"), ("53", "35"),
)
ANTISTOKES_ENTRIES = (
    ("21", "12"), ("21", "13"), ("31", "12"), ("31", "13"), ("24", "42"),
    ("24", "43"), ("25", "52"), ("25", "53"), ("35", "52"), ("35", "53"),
    ("34", "43"), ("34", "42"),
)
TABLE_ENTRIES = STOKES_ENTRIES + ANTISTOKES_ENTRIES


def _idx(label: str) -> Tuple[int, int]:
    return int(label[0]) - 1, int(label[1]) - 1


@dataclass(frozen=True)
class DiffusionMatrix:
    """Dense tensor ``d[m, n, m', n']`` (0-based) of diffusion coefficients."""

    d: np.ndarray

    def entry(self, alpha: str, beta: str) -> complex:
        m, n = _idx(alpha)
        p, q = _idx(beta)
        return complex(self.d[m, n, p, q])

    def stokes_block(self) -> np.ndarray:
        """6x6 matrix D_{conj(a), b} over CHANNELS (Stokes quadratic form)."""
        return np.array([[self.entry(a[::-1], b) for b in CHANNELS] for a in CHANNELS])

    def antistokes_block(self) -> np.ndarray:
        """6x6 matrix D_{a, conj(b)} over CHANNELS (anti-Stokes and cross forms)."""
        return np.array([[self.entry(a, b[::-1]) for b in CHANNELS] for a in CHANNELS])

    def reversed_antistokes_block(self) -> np.ndarray:
        """D_{conj(b), a} indexed [a, b]; enters the commutator diagnostic."""
        return np.array([[self.entry(b[::-1], a) for b in CHANNELS] for a in CHANNELS])

    def as_dict(self, labels=LABELS) -> Dict[Tuple[str, str], complex]:
        return {(a, b): self.entry(a, b) for a in labels for b in labels}


def einstein_oracle(params: SystemParams, rho0: DensityMatrix) -> DiffusionMatrix:
    L4 = build_drift_matrix(params).reshape((NLEVELS,) * 4)
    S = rho0.rho
    LS = np.einsum("mnab,ab->mn", L4, S)
    eye = np.eye(NLEVELS)
    d = (np.einsum("np,mq->mnpq", eye, LS)
         - np.einsum("mnap,aq->mnpq", L4, S)
         - np.einsum("pqnb,mb->mnpq", L4, S))
    return DiffusionMatrix(d)


def diffusion_matrix(params: SystemParams, rho0: DensityMatrix) -> DiffusionMatrix:
    """Complete diffusion matrix used downstream (Einstein relation)."""
    return einstein_oracle(params, rho0)


def table_entries(params: SystemParams, rho0: DensityMatrix,
                  verbatim: bool = False) -> Dict[Tuple[str, str], complex]:
    """Closed-form diffusion entries.

    With ``verbatim=True`` two entries take their uncorrected form:
    D_{13,35} as G31 + G32 s15 and D_{24,42} with the dephasing rates
    gamma32, gamma42 in place of the decay rates G32, G42.  The default
    uses the forms confirmed by the Einstein relation.
    """
    s = rho0.s
    G41, G42, G31, G32, G53, G54 = (params.decay_41, params.decay_42, params.decay_31,
                                    params.decay_32, params.decay_53, params.decay_54)
    G3, G4, G5 = G31 + G32, G41 + G42, G53 + G54
    g21 = params.gamma21
    gam = params.dephasing_matrix()
    t = {
        ("12", "24"): g21 * s(1, 4),
        ("12", "25"): g21 * s(1, 5),
        ("13", "31"): G41 * s(4, 4) + G31 * s(3, 3) + G3 * s(1, 1),
        ("13", "34"): G3 * s(1, 4),
        ("13", "35"): (G31 + G32 * s(1, 5)) if verbatim else G3 * s(1, 5),
        ("42", "21"): g21 * s(4, 1),
        ("42", "24"): G54 * s(5, 5),
        ("43", "31"): G3 * s(4, 1),
        ("43", "34"): G54 * s(5, 5) + G3 * s(4, 4),
        ("43", "35"): G3 * s(4, 5),
        ("52", "21"): g21 * s(5, 1),
        ("53", "31"): G3 * s(5, 1),
        ("53", "34"): G3 * s(5, 4),
        ("53", "35"): G3 * s(5, 5),
        ("21", "12"): G32 * s(3, 3) + G42 * s(4, 4) + 2 * g21 * s(2, 2),
        ("21", "13"): g21 * s(2, 3),
        ("31", "12"): g21 * s(3, 2),
        ("31", "13"): G53 * s(5, 5),
        ("24", "42"): ((gam[2, 1] * s(3, 3) + gam[3, 1] * s(4, 4)) if verbatim
                       else (G32 * s(3, 3) + G42 * s(4, 4))) + G4 * s(2, 2),
        ("24", "43"): G4 * s(2, 3),
        ("25", "52"): G32 * s(3, 3) + G42 * s(4, 4) + G5 * s(2, 2),
        ("25", "53"): G5 * s(2, 3),
        ("35", "52"): G5 * s(3, 2),
        ("35", "53"): G53 * s(5, 5) + G5 * s(3, 3),
        ("34", "43"): G53 * s(5, 5) + G4 * s(3, 3),
        ("34", "42"): G4 * s(3, 2),
    }
    return {k: complex(v) for k, v in t.items()}


def diffusion_from_table(params: SystemParams, rho0: DensityMatrix,
                         verbatim: bool = False) -> DiffusionMatrix:
    """DiffusionMatrix holding only the closed-form entries (others zero)."""
    d = np.zeros((NLEVELS,) * 4, complex)
    for (a, b), v in table_entries(params, rho0, verbatim).items():
        d[_idx(a) + _idx(b)] = v
    return DiffusionMatrix(d)


def table_discrepancies(params: SystemParams, rho0: DensityMatrix,
                        verbatim: bool = False) -> Dict[Tuple[str, str], float]:
    """|table - oracle| for every closed-form entry."""
    ora = einstein_oracle(params, rho0)
    return {k: abs(v - ora.entry(*k))
            for k, v in table_entries(params, rho0, verbatim).items()}


def completeness_audit(params: SystemParams, rho0: DensityMatrix,
                       tol: float = 1e-10) -> List[Tuple[str, str, complex]]:
    """Oracle entries above ``tol`` over the coherence labels missing from the table."""
    ora = einstein_oracle(params, rho0)
    listed = set(TABLE_ENTRIES)
    out = []
    for a in LABELS:
        for b in LABELS:
            v = ora.entry(a, b)
            if (a, b) not in listed and abs(v) > tol:
                out.append((a, b, v))
    return out


def dump_rows(params: SystemParams, rho0: DensityMatrix) -> List[tuple]:
    """(alpha, beta, Re, Im, table_value, oracle_value, abs_diff) per table entry.

    Re and Im are those of the oracle value; table_value and oracle_value
    are magnitudes.
    """
    ora = einstein_oracle(params, rho0)
    rows = []
    for (a, b), v in table_entries(params, rho0).items():
        o = ora.entry(a, b)
        rows.append((a, b, o.real, o.imag, abs(v), abs(o), abs(v - o)))
    return rows
