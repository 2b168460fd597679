"""Exact tools for small integer programs: detecting matrices, a SAT-to-ILP
reduction pipeline, small-coefficient gadgets, dual treedepth, Graver bases
and cross-checking feasibility solvers."""

from .core import BudgetExceeded, DimensionError, IlpInstance, IntMatrix, ParseError, Solution

__version__ = "0.1.0"

__all__ = ["BudgetExceeded", "DimensionError", "IlpInstance", "IntMatrix", "ParseError", "Solution"]
