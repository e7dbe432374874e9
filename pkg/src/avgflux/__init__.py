"""Solvers for heat conduction driven by the time-averaged boundary flux."""

from .closedform import (
    Coefficient,
    HalfPowerSeries,
    LaplaceClosedForm,
    adomian_closed_form,
    adomian_terms,
    evaluate_series,
    evaluate_W,
    flux_series,
    laplace_Q,
    ode_residual,
    series_W,
)
from .exceptions import DomainError, MeshError, QuadratureFailure, SeriesTruncationError, StepFailure
from .field import TemperatureField, initial_field, kernel, pde_residual, reconstruct
from .mesh import GradedMesh, SpatialGrid, build_graded, build_spatial, default_half_width
from .ndim import BandData, TransverseFlux, TransverseProblem, TruncationWarning, free_term, solve_transverse
from .specfun import erf, moment_sqrt, moment_sqrt_inv
from .volterra1d import (
    FluxSolution,
    LinearSource,
    ProblemSpec1D,
    SingularWeights,
    TableSource,
    build_weights,
    initial_flux,
    kernel_majorant_check,
    solve_average_linear,
    solve_flux,
)

__all__ = [
    "BandData",
    "Coefficient",
    "DomainError",
    "FluxSolution",
    "GradedMesh",
    "HalfPowerSeries",
    "LaplaceClosedForm",
    "LinearSource",
    "MeshError",
    "ProblemSpec1D",
    "QuadratureFailure",
    "SeriesTruncationError",
    "SingularWeights",
    "SpatialGrid",
    "StepFailure",
    "TableSource",
    "TemperatureField",
    "TransverseFlux",
    "TransverseProblem",
    "TruncationWarning",
    "adomian_closed_form",
    "adomian_terms",
    "build_graded",
    "build_spatial",
    "build_weights",
    "default_half_width",
    "erf",
    "evaluate_W",
    "evaluate_series",
    "flux_series",
    "free_term",
    "initial_field",
    "initial_flux",
    "kernel",
    "kernel_majorant_check",
    "laplace_Q",
    "moment_sqrt",
    "moment_sqrt_inv",
    "ode_residual",
    "pde_residual",
    "reconstruct",
    "series_W",
    "solve_average_linear",
    "solve_flux",
    "solve_transverse",
]
