"""Boundary-integral solvers and first-order asymptotics for thin elastic coatings in 2D."""
from .asymptotics import (ConvergenceReport, CorrectorSolution, ExpansionOperators, ExpansionProblem,
                          InterfaceTensors, certify_theorem_1_1, certify_theorem_1_2,
                          measurement_functional, rhs_functional, solve_corrector,
                          tensor_identities_check)
from .boundary_ops import LayerOperators, jump_relation_violations
from .config import ConfigError, ExperimentConfig
from .geometry import (ClosedCurve, PerturbedCurve, ThicknessProfile, ellipse, fourier_radial, kite,
                       make_circle, make_smooth_curve)
from .kernels import LameParams, MaterialTriple
from .oracle import solve_radial, solve_radial_two_phase
from .transmission import (BackgroundField, SolverError, ThreePhaseSolution, TwoPhaseSolution,
                           solve_three_phase, solve_two_phase)

__all__ = [
    "BackgroundField", "ClosedCurve", "ConfigError", "ConvergenceReport", "CorrectorSolution",
    "ExpansionOperators", "ExpansionProblem", "ExperimentConfig", "InterfaceTensors", "LameParams",
    "LayerOperators", "MaterialTriple", "PerturbedCurve", "SolverError", "ThicknessProfile",
    "ThreePhaseSolution", "TwoPhaseSolution", "certify_theorem_1_1", "certify_theorem_1_2", "ellipse",
    "fourier_radial", "jump_relation_violations", "kite", "make_circle", "make_smooth_curve",
    "measurement_functional", "rhs_functional", "solve_corrector", "solve_radial",
    "solve_radial_two_phase", "solve_three_phase", "solve_two_phase", "tensor_identities_check",
]
