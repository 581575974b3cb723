"""Spectral toolkit for energy localization of 1D Schrodinger dynamics.

The package splits a solution of ``i u_t - u_xx + V u = 0`` into a free wave,
an energy-localized piece and a remainder, and ships dense-matrix checks of
the operator estimates that such a splitting relies on.
"""

from .spectral import Grid, Field, Multiplier, to_frequency, to_position, apply_multiplier, weighted_norm
from .cutoffs import psi, eval_cutoff, lp_project
from .potential import PotentialSpec, eval_potential, validate_hypotheses
from .propagator import EvolutionConfig, Trajectory, free_propagate, evolve
from .channel import ChannelParams, apply_Jfree, cook_wave_operator, split_weakly_bound
from .decomposition import MicrolocParams, compute_J, proj, proj_tail, assemble, diagnostics

__version__ = "0.1.0"

__all__ = [
    "Grid", "Field", "Multiplier", "to_frequency", "to_position", "apply_multiplier", "weighted_norm",
    "psi", "eval_cutoff", "lp_project",
    "PotentialSpec", "eval_potential", "validate_hypotheses",
    "EvolutionConfig", "Trajectory", "free_propagate", "evolve",
    "ChannelParams", "apply_Jfree", "cook_wave_operator", "split_weakly_bound",
    "MicrolocParams", "compute_J", "proj", "proj_tail", "assemble", "diagnostics",
]
