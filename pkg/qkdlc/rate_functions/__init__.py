"""
Rate function registry.
Every closed-form key-rate formula is reachable by its FormulaId as a factory
that binds the channel and error parameters and leaves the signal intensity free.
"""
from typing import Callable, Optional

from .bb84_functions import functions as bb84_functions
from .cow_functions import functions as cow_functions
from .bound_functions import functions as bound_functions
from .params import ErrorParams, FormulaId

# Combine all formula registries
functions = {
    **bb84_functions,
    **cow_functions,
    **bound_functions,
}


def rate_objective(formula_id: FormulaId, T: float, r_E: float = 0.0,
                   errors: Optional[ErrorParams] = None) -> Callable:
    """Return mu -> raw normalised rate for the given formula and scenario."""
    return functions[formula_id](T, r_E, errors or ErrorParams())
