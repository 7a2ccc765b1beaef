"""Dual block-coordinate ascent solvers for MAP inference in pairwise
discrete graphical models.
"""
from .model import (COST_CAP, FEAS_TOL, GraphicalModel, Reparametrization,
                    check_feasible, dual_value, energy, primal_round)
from .generate import REGIMES, generate_instance
from .uai import ModelFormatError, parse_uai, write_uai
from .solve import METHODS, SolverConfig, TraceRecord, run

__all__ = [
    "COST_CAP", "FEAS_TOL", "GraphicalModel", "Reparametrization",
    "check_feasible", "dual_value", "energy", "primal_round",
    "REGIMES", "generate_instance",
    "ModelFormatError", "parse_uai", "write_uai",
    "METHODS", "SolverConfig", "TraceRecord", "run",
]

__version__ = "0.1.0"
