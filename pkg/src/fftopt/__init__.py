"""FFT-accelerated periodic homogenization and phase-field topology
optimization for 2D linear elasticity on square and hexagonal lattices."""

from . import adjoint, equilibrium, grid, io, material, objective, optimize
from .adjoint import evaluate_with_gradient, fd_sensitivity
from .equilibrium import (
    EquilibriumSolution,
    LoadCase,
    SolverSettings,
    effective_constants,
    load_cases,
    mean_stress,
    solve,
)
from .errors import ConfigurationError, ConvergenceError, NumericalConsistencyError
from .grid import GridSpec, Lattice, build_stencils
from .kernels import BACKEND
from .material import IsotropicElastic2D, MaterialPair, lame_from_E_nu
from .objective import (
    ObjectiveReport,
    OptimizationProblem,
    PhaseFieldParams,
    TargetSpec,
    evaluate,
    make_problem,
)
from .optimize import OptimizerSettings, center_void, initial_phase, minimize
from .projection import ProjectionOperator, build_projection

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigurationError",
    "ConvergenceError",
    "EquilibriumSolution",
    "GridSpec",
    "IsotropicElastic2D",
    "Lattice",
    "LoadCase",
    "MaterialPair",
    "NumericalConsistencyError",
    "ObjectiveReport",
    "OptimizationProblem",
    "OptimizerSettings",
    "PhaseFieldParams",
    "ProjectionOperator",
    "SolverSettings",
    "TargetSpec",
    "adjoint",
    "build_projection",
    "build_stencils",
    "center_void",
    "effective_constants",
    "equilibrium",
    "evaluate",
    "evaluate_with_gradient",
    "fd_sensitivity",
    "grid",
    "initial_phase",
    "io",
    "lame_from_E_nu",
    "load_cases",
    "make_problem",
    "material",
    "mean_stress",
    "minimize",
    "objective",
    "optimize",
    "solve",
    "__version__",
]
