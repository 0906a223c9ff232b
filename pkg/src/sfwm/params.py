"""Physical inputs of the five-level medium.

Level labels follow the usual ladder/lambda scheme: |1>, |2> ground states,
|3>, |4> intermediate excited states, |5> the Rydberg state.  The pump
couples 1-4, the coupling field 2-3 and the Rydberg drive 4-5.  The Stokes
photon is emitted on 4-2 and the anti-Stokes photon on 3-1.

All rates and detunings are in units of gamma31 (so gamma31 never appears
as a number in the code).  Lengths are in cm and densities in cm^-3.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ValidationError

NLEVELS = 5

# (upper, lower) population decay channels, 1-based labels
DECAY_CHANNELS = ((4, 1), (4, 2), (3, 1), (3, 2), (5, 3), (5, 4))

# one inverse cubic micrometre in cm^-3
PER_UM3 = 1.0e12


@dataclass(frozen=True)
class SystemParams:
    """Immutable parameter set.  Rabi frequencies may be complex."""

    decay_41: float = 1.0
    decay_42: float = 1.0
    decay_31: float = 1.0
    decay_32: float = 1.0
    decay_53: float = 1.0e-3
    decay_54: float = 1.0e-3
    gamma21: float = 1.0e-3
    omega_p: complex = 1.2
    omega_c: complex = 3.0
    omega_d: complex = 1.2
    delta_p: float = 24.0
    delta_c: float = 0.0
    delta_d: float = 0.0
    delta_15: float = 24.0
    density: float = 1.0e12
    cross_section: float = 1.0e-9
    length: float = 0.01
    c6: float = 0.0
    light_speed: float = 2.99792458e10
    gamma31_hz: Optional[float] = None
    # dephasing overrides; None selects the radiative default
    gamma24: Optional[float] = None
    gamma25: Optional[float] = None
    gamma34: Optional[float] = None
    gamma35: Optional[float] = None
    gamma51: Optional[float] = None

    def __post_init__(self):
        for name in ("decay_41", "decay_42", "decay_31", "decay_32",
                     "decay_53", "decay_54", "gamma21", "density",
                     "cross_section", "length", "light_speed"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError("must be finite and > 0", name)
        if not (math.isfinite(self.c6) and self.c6 >= 0):
            raise ValidationError("must be finite and >= 0", "c6")
        for name in ("delta_p", "delta_c", "delta_d", "delta_15"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError("must be finite", name)
        for name in ("omega_p", "omega_c", "omega_d"):
            v = complex(getattr(self, name))
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ValidationError("must be finite", name)
        for name in ("gamma24", "gamma25", "gamma34", "gamma35",
                     "gamma51", "gamma31_hz"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v > 0):
                raise ValidationError("must be finite and > 0", name)

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)

    # -- derived rates -------------------------------------------------
    @property
    def decay_rates(self) -> dict:
        return {ch: getattr(self, f"decay_{ch[0]}{ch[1]}") for ch in DECAY_CHANNELS}

    @property
    def total_decay(self) -> dict:
        """Gamma_m, the total decay rate out of level m (1-based)."""
        g3 = self.decay_31 + self.decay_32
        g4 = self.decay_41 + self.decay_42
        g5 = self.decay_53 + self.decay_54
        return {1: 0.0, 2: 0.0, 3: g3, 4: g4, 5: g5}

    @property
    def optical_depth_rate(self) -> float:
        """K = density * cross_section * gamma31, in cm^-1."""
        return self.density * self.cross_section

    def dephasing_matrix(self) -> np.ndarray:
        """Symmetric 5x5 array of coherence damping rates gamma_mn."""
        G = self.total_decay
        g = np.zeros((NLEVELS, NLEVELS))

        def put(a, b, v):
            g[a - 1, b - 1] = g[b - 1, a - 1] = v

        put(2, 1, self.gamma21)
        put(3, 1, G[3] / 2)
        put(3, 2, G[3] / 2)
        put(4, 1, G[4] / 2)
        put(4, 2, _pick(self.gamma24, G[4] / 2))
        put(5, 4, (G[5] + G[4]) / 2)
        put(5, 3, _pick(self.gamma35, (G[5] + G[3]) / 2))
        put(4, 3, _pick(self.gamma34, (G[4] + G[3]) / 2))
        put(5, 1, _pick(self.gamma51, G[5] / 2))
        put(5, 2, _pick(self.gamma25, G[5] / 2))
        return g

    def hamiltonian(self, omega: float = 0.0) -> np.ndarray:
        """Rotating-frame Hamiltonian (hbar = 1) generating the drift.

        ``omega`` is the two-photon detuning carried by the generated-field
        coherences; it only enters the first-order problem.
        """
        H = np.diag([0.0, -omega, self.delta_c - omega,
                     self.delta_p, self.delta_15]).astype(complex)
        for (up, lo), rabi in (((4, 1), self.omega_p), ((3, 2), self.omega_c),
                               ((5, 4), self.omega_d)):
            H[up - 1, lo - 1] -= rabi
            H[lo - 1, up - 1] -= np.conj(rabi)
        return H


def _pick(override, default):
    return default if override is None else override


def fig3_params(**changes) -> SystemParams:
    """Reference parameter set used across the figure presets."""
    return SystemParams().replace(**changes) if changes else SystemParams()
