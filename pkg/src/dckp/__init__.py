"""Memetic threshold search for the disjunctively constrained knapsack problem."""

from .exact import solve_exact
from .instance import GeneratorSpec, Instance, generate_instance, load_instance, parse_instance, serialize_instance
from .solution import Move, Solution
from .solver import SolverConfig, SolveReport, solve, verify

__all__ = [
    "GeneratorSpec", "Instance", "Move", "Solution", "SolveReport", "SolverConfig", "generate_instance",
    "load_instance", "parse_instance", "serialize_instance", "solve", "solve_exact", "verify",
]
