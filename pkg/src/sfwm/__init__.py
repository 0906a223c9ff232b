"""Photon-pair generation by spontaneous four-wave mixing in a Rydberg-dressed
five-level atomic ensemble: steady state, mean-field validity, response
coefficients, Langevin noise, counter-propagating propagation and
coincidence statistics."""

__version__ = "0.1.0"

from .params import SystemParams, fig3_params
from .bloch import DensityMatrix, build_drift_matrix, integrate_bloch, solve_steady_state
from .response import ResponseSet, first_order_oracle, propagation_coefficients
from .diffusion import DiffusionMatrix, diffusion_matrix, einstein_oracle
from .propagation import TransferSolution, commutator_diagnostic, solve_transfer
from .observables import correlation_g2, spectral_rates, total_rates
from .config import RunConfig, load_config, preset

__all__ = [
    "SystemParams", "fig3_params", "DensityMatrix", "build_drift_matrix",
    "integrate_bloch", "solve_steady_state", "ResponseSet", "first_order_oracle",
    "propagation_coefficients", "DiffusionMatrix", "diffusion_matrix", "einstein_oracle",
    "TransferSolution", "commutator_diagnostic", "solve_transfer", "correlation_g2",
    "spectral_rates", "total_rates", "RunConfig", "load_config", "preset",
]
