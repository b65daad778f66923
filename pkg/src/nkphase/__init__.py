"""Solubility of NK landscapes: generators, SAT reduction, structural
detectors, a DPLL solver and an experiment harness."""

from .cnf import CnfFormula, nk_to_cnf
from .core import LocalFitness, NKInstance, evaluate, is_solution
from .generate import GenParams, generate
from .solver import Status, brute_force, dpll
from .structure import decompose_solve, find_conflicting_pair
from .twosat import extract_two_sat, solve_two_sat

__version__ = "0.1.0"

__all__ = [
    "CnfFormula",
    "GenParams",
    "LocalFitness",
    "NKInstance",
    "Status",
    "brute_force",
    "decompose_solve",
    "dpll",
    "evaluate",
    "extract_two_sat",
    "find_conflicting_pair",
    "generate",
    "is_solution",
    "nk_to_cnf",
    "solve_two_sat",
]
