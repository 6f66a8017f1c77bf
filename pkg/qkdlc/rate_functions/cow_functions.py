"""
Coherent One-Way key rates with loss control and under the beam-splitting
attack on the original protocol.
"""
from typing import Callable

import numpy as np

from ..quantum_info import as_nonnegative, as_probability, binary_entropy, holevo_two_pure, nonvacuum_prob
from .params import COWParams, ErrorParams, FormulaId


def tapped_pair_holevo(fraction, mu):
    """
    Holevo bound on the states |sqrt(f) g>|0>, |0>|sqrt(f) g> that a tap of
    fraction f sees; their overlap magnitude is exp(-f mu).
    """
    return holevo_two_pure(np.exp(-np.asarray(fraction * mu, dtype=float)))


def cow_eve_info(p: COWParams):
    return tapped_pair_holevo(p.r_E, p.intensity_mu)


def cow_conclusive_prob(p: COWParams, T: float):
    """Non-vacuum click on the non-empty pulse; COW has no basis sifting."""
    T = as_probability(T, 'T')
    return nonvacuum_prob(T * (1.0 - p.r_E) * p.intensity_mu)


def cow_enhanced_rate(p: COWParams, T: float):
    """p_ok (1 - h2(p_err) - chi(r_E)), normalised by the source bit rate."""
    return cow_conclusive_prob(p, T) * (1.0 - binary_entropy(p.p_err) - cow_eve_info(p))


def cow_bs_eve_info(intensity_mu, T: float):
    """Eve imitating the natural loss 1 - T with an ideal line."""
    T = as_probability(T, 'T')
    intensity_mu = as_nonnegative(intensity_mu, 'intensity_mu')
    return tapped_pair_holevo(1.0 - T, intensity_mu)


def cow_original_upper(p: COWParams, T: float):
    """Beam-splitting-attack bound on the original COW rate; r_E is ignored."""
    T = as_probability(T, 'T')
    p_ok = nonvacuum_prob(T * p.intensity_mu)
    return p_ok * (1.0 - binary_entropy(p.p_err) - cow_bs_eve_info(p.intensity_mu, T))


def enhanced_objective(T: float, r_E: float, errors: ErrorParams) -> Callable:
    def objective(mu):
        return cow_enhanced_rate(COWParams(mu, r_E, errors.p_err), T)
    return objective


def original_objective(T: float, r_E: float, errors: ErrorParams) -> Callable:
    def objective(mu):
        return cow_original_upper(COWParams(mu, 0.0, errors.p_err), T)
    return objective


functions = {
    FormulaId.COW_ENH: enhanced_objective,
    FormulaId.COW_ORIG_UB: original_objective,
}
