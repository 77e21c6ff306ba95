"""Steady periodic water waves with vorticity: uniform streams, dispersion,
small-amplitude waves, branch continuation and nodal diagnostics."""

from .continuation import ContinuationConfig, continue_branch, detect_loop, detect_termination, newton_solve
from .conformal import PeriodicFunction, build_conformal_map, periodic_hilbert, surface_self_intersection
from .dispersion import eigen_spectrum, find_tau_star, gamma_profile, sigma_scan, transversality
from .field import WaveField, bernoulli_residual, check_nodal, pde_residual, stagnation_margin
from .linear_wave import build_linear_wave, coordinate_map, linear_wave_slope
from .uniform_stream import eval_stream, solve_uniform_stream
from .vorticity import VorticityFn

__version__ = "0.1.0"

__all__ = [
    "ContinuationConfig", "continue_branch", "detect_loop", "detect_termination", "newton_solve",
    "PeriodicFunction", "build_conformal_map", "periodic_hilbert", "surface_self_intersection",
    "eigen_spectrum", "find_tau_star", "gamma_profile", "sigma_scan", "transversality",
    "WaveField", "bernoulli_residual", "check_nodal", "pde_residual", "stagnation_margin",
    "build_linear_wave", "coordinate_map", "linear_wave_slope",
    "eval_stream", "solve_uniform_stream", "VorticityFn",
]
