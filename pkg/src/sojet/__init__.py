"""Second-order jet descent for nonsmooth, nonconvex minimization."""

from .baseline import GSParams, min_norm_element, run_gs
from .bench import (BenchConfig, BenchResult, ProfilePoint, performance_profile,
                    read_results_csv, run_benchmark, write_profile_csv, write_results_csv)
from .exceptions import (AllRestartsInfeasible, DimensionTooLarge, DimensionTooSmall,
                         EmptyModel, EmptyResults, NonFiniteValue, SojetError, UnknownProblem)
from .model import ModelSet, carry_over, eval_model
from .oracle import JetElement, Oracle, OracleCounters, check_derivatives, evaluate_jet
from .solver import RunRecord, SolverParams, Termination, inner_refine, run_descent
from .subproblem import SolveOptions, Status, SubproblemSolution, brute_force_min, solve_subproblem
from .testbed import ProblemSpec, get_problem, list_problems

__version__ = "0.1.0"

__all__ = [
    "AllRestartsInfeasible", "BenchConfig", "BenchResult", "DimensionTooLarge",
    "DimensionTooSmall", "EmptyModel", "EmptyResults", "GSParams", "JetElement",
    "ModelSet", "NonFiniteValue", "Oracle", "OracleCounters", "ProblemSpec",
    "ProfilePoint", "RunRecord", "SojetError", "SolveOptions", "SolverParams", "Status",
    "SubproblemSolution", "Termination", "UnknownProblem", "brute_force_min",
    "carry_over", "check_derivatives", "eval_model", "evaluate_jet", "get_problem",
    "inner_refine", "list_problems", "min_norm_element", "performance_profile",
    "read_results_csv", "run_benchmark", "run_descent", "run_gs", "solve_subproblem",
    "write_profile_csv", "write_results_csv",
]
