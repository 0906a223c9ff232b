"""Rydberg blockade radius, mean-field level shift and validity condition.

The shift of the Rydberg level produced by distant excited atoms is

    s = density * int_{R_b}^inf C6 / r^6 * sigma55 * 4 pi r^2 dr
      = (4 pi / 3) density C6 sigma55 / R_b^3,

and the mean-field picture is trusted while the expected number of Rydberg
excitations inside a sphere of radius 3 R_b stays below one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .bloch import solve_steady_state
from .errors import NoConvergence, ValidationError, ZeroDrive
from .parallel import pmap
from .params import SystemParams

FOUR_PI_3 = 4.0 * math.pi / 3.0


@dataclass(frozen=True)
class RydbergAssessment:
    delta_eit: float
    r_blockade: float
    shift_s: float
    occupancy: float
    valid: bool


def eit_linewidth(params: SystemParams) -> float:
    """delta_EIT = |Omega_d|^2 / Delta_p (far-detuned pump)."""
    if params.delta_p <= 0:
        raise ValidationError("blockade radius needs delta_p > 0", "delta_p")
    return abs(params.omega_d) ** 2 / params.delta_p


def blockade_radius(params: SystemParams) -> float:
    """R_b = (C6 Delta_p / |Omega_d|^2)^(1/6), in cm."""
    if params.omega_d == 0:
        raise ZeroDrive("omega_d = 0: no Rydberg admixture, radius diverges")
    return (params.c6 / eit_linewidth(params)) ** (1.0 / 6.0)


def meanfield_shift(params: SystemParams, sigma55: float, r_b: float) -> float:
    if r_b <= 0:
        raise ValidationError("r_b must be positive", "r_b")
    return FOUR_PI_3 * params.density * params.c6 * sigma55 / r_b ** 3


def occupancy(params: SystemParams, sigma55: float, r_b: float,
              density: Optional[float] = None) -> float:
    """Expected Rydberg excitations within 3 R_b."""
    dens = params.density if density is None else density
    return FOUR_PI_3 * (3.0 * r_b) ** 3 * dens * sigma55


def assess(params: SystemParams, sigma55: Optional[float] = None) -> RydbergAssessment:
    if sigma55 is None:
        sigma55 = float(solve_steady_state(params).s(5, 5).real)
    dEIT = eit_linewidth(params)
    rb = blockade_radius(params)
    occ = occupancy(params, sigma55, rb)
    return RydbergAssessment(dEIT, rb, meanfield_shift(params, sigma55, rb),
                             occ, occ <= 1.0)


def max_density(params: SystemParams, sigma55: Optional[float] = None) -> float:
    """Density at which the occupancy reaches exactly one (inf if sigma55 <= 0)."""
    if sigma55 is None:
        sigma55 = float(solve_steady_state(params).s(5, 5).real)
    rb = blockade_radius(params)
    denom = FOUR_PI_3 * (3.0 * rb) ** 3 * sigma55
    return math.inf if denom <= 0 else 1.0 / denom


def boundary_density_curve(params: SystemParams, omega_d_grid: Sequence[float],
                           ceiling: float = 1.0e20,
                           workers: int = 1) -> List[Tuple[float, float, bool]]:
    """(Omega_d, N_max, ceiling_hit) for each drive strength.

    N_max is capped at ``ceiling`` (cm^-3) where the Rydberg population
    vanishes; the flag records the cap.
    """
    grid = [float(x) for x in omega_d_grid]
    if any(x <= 0 for x in grid):
        raise ValidationError("every omega_d must be positive", "omega_d_grid")

    def one(od):
        n = max_density(params.replace(omega_d=od))
        hit = not (n < ceiling)
        return od, (ceiling if hit else n), hit

    return pmap(one, grid, workers)


def self_consistent_delta15(params: SystemParams, damping: float = 0.5,
                            tol: float = 1e-8, max_iter: int = 500) -> float:
    """Fixed point of Delta_15 = Delta_p + Delta_d + s(sigma55(Delta_15)).

    Damped iteration x <- x + damping (F(x) - x), started from the
    interaction-free value; returns once |F(x) - x| < tol / 2.
    """
    base = params.delta_p + params.delta_d
    if params.c6 == 0:
        return base
    rb = blockade_radius(params)

    def F(x):
        s55 = float(solve_steady_state(params.replace(delta_15=x)).s(5, 5).real)
        return base + meanfield_shift(params, s55, rb)

    x = base
    for _ in range(max_iter):
        r = F(x) - x
        if abs(r) < tol / 2:
            return x
        x = x + damping * r
    raise NoConvergence(f"delta_15 iteration did not settle in {max_iter} steps")


def calibrate_c6(params: SystemParams, omega_d: float = 17.0,
                 n_max: float = 1.0e12) -> float:
    """C6 (gamma31 cm^6) placing the validity boundary at (omega_d, n_max)."""
    p = params.replace(omega_d=omega_d)
    s55 = float(solve_steady_state(p).s(5, 5).real)
    rb3 = 1.0 / (FOUR_PI_3 * 27.0 * s55 * n_max)
    return rb3 ** 2 * abs(omega_d) ** 2 / params.delta_p

