"""
Repeaterless benchmark for the key rates.
"""
import math
from typing import Callable

from ..exceptions import DomainError
from ..quantum_info import LN2, as_probability
from .params import ErrorParams, FormulaId


def plob_bound(T: float) -> float:
    """Repeaterless secret-key capacity -log2(1 - T) of a pure-loss channel."""
    T = as_probability(T, 'T')
    if T >= 1.0:
        raise DomainError('a lossless channel has unbounded repeaterless capacity')
    return -math.log1p(-T) / LN2


def plob_objective(T: float, r_E: float, errors: ErrorParams) -> Callable:
    capacity = plob_bound(T)

    def objective(mu):
        return capacity
    return objective


functions = {
    FormulaId.PLOB: plob_objective,
}
