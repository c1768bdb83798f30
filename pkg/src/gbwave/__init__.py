"""Gaussian-beam quasi-solutions for continuous and lattice wave equations."""

from .beam_continuous import ContinuousBeam, gaussian_moment
from .beam_discrete import DiscreteBeam, PhaseState, xi_hat_frequency
from .config import ExperimentSpec, parse_config
from .lattice import ComplexField, Grid
from .rays import BeamParams, RayPath, continuous_ray, fd_ray, group_velocity_fd
from .solver import DiagnosticsRow, SimulationConfig, SolverState

__all__ = [
    "BeamParams",
    "ComplexField",
    "ContinuousBeam",
    "DiagnosticsRow",
    "DiscreteBeam",
    "ExperimentSpec",
    "Grid",
    "PhaseState",
    "RayPath",
    "SimulationConfig",
    "SolverState",
    "continuous_ray",
    "fd_ray",
    "gaussian_moment",
    "group_velocity_fd",
    "parse_config",
    "xi_hat_frequency",
]
