"""Multiharmonic finite elements with guaranteed error majorants for
time-periodic parabolic optimal control on the unit square."""

from .mesh import Mesh, build_uniform_mesh, evaluate_p1, interior_node_index_map
from .assembly import FemMatrices, assemble, assemble_load
from .fourier import ModalField, modal_l2_norms, perp, remainder_term
from .solver import MhSolution, ProblemSpec, SolverError, evaluate_cost, solve_all_modes
from .flux import Rt0Field, reconstruct_rt0, rt0_divergence
from .majorants import (
    StabilityConstants,
    cost_majorant,
    majorant_full_norm,
    majorant_seminorm,
    modal_residuals,
    optimize_young,
    per_mode_majorant,
)
from .problems import example_desired_state, example_exact_state, get_example, reference_solution

__version__ = "0.1.0"

__all__ = [
    "Mesh",
    "build_uniform_mesh",
    "evaluate_p1",
    "interior_node_index_map",
    "FemMatrices",
    "assemble",
    "assemble_load",
    "ModalField",
    "modal_l2_norms",
    "perp",
    "remainder_term",
    "MhSolution",
    "ProblemSpec",
    "SolverError",
    "evaluate_cost",
    "solve_all_modes",
    "Rt0Field",
    "reconstruct_rt0",
    "rt0_divergence",
    "StabilityConstants",
    "cost_majorant",
    "majorant_full_norm",
    "majorant_seminorm",
    "modal_residuals",
    "optimize_young",
    "per_mode_majorant",
    "example_desired_state",
    "example_exact_state",
    "get_example",
    "reference_solution",
]
