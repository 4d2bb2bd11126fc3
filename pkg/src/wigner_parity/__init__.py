"""Stationary 1-D Wigner equation with inflow boundaries via parity decomposition."""

__version__ = "0.1.0"

from .bvp import BoundaryData, SolutionField, assemble_boundary, check_sign_convention, solve_bvp
from .estimators import OddMomentMap, ParityBVPSolver, UpwindBVPSolver
from .exceptions import (
    AssemblyError,
    CapabilityError,
    ContractError,
    DivergenceError,
    DomainError,
    IllPosedError,
    NumericalError,
    QuadratureError,
    WignerError,
)
from .grid import (
    GridFunction,
    SpaceGrid,
    VelocityGrid,
    inflow_restrict,
    l2_norm,
    parity_project,
    velocity_moment,
)
from .odd_moments import MomentVector, build_moment_Q, reconstruct_odd, solve_hierarchy
from .oracle import compare_fields, solve_direct
from .potential import (
    KernelTable,
    PotentialSpec,
    build_kernel_table,
    eval_DV,
    eval_kernel,
    eval_potential,
    kernel_h1_norm,
    kernel_moments,
)
from .propagation import PropagatorMatrix, build_propagator, march_ivp
from .wigner_op import apply_A, apply_B, apply_theta, operator_bound_check

__all__ = [
    "AssemblyError", "BoundaryData", "CapabilityError", "ContractError", "DivergenceError",
    "DomainError", "GridFunction", "IllPosedError", "KernelTable", "MomentVector", "NumericalError",
    "OddMomentMap", "ParityBVPSolver", "PotentialSpec", "PropagatorMatrix", "QuadratureError",
    "SolutionField", "SpaceGrid", "UpwindBVPSolver", "VelocityGrid", "WignerError", "apply_A",
    "apply_B", "apply_theta", "assemble_boundary", "build_kernel_table", "build_moment_Q",
    "build_propagator", "check_sign_convention", "compare_fields", "eval_DV", "eval_kernel",
    "eval_potential", "inflow_restrict", "kernel_h1_norm", "kernel_moments", "l2_norm",
    "march_ivp", "operator_bound_check", "parity_project", "reconstruct_odd", "solve_bvp",
    "solve_direct", "solve_hierarchy", "velocity_moment",
]
