"""
BB84 key rates: the loss-controlled (enhanced) bound, the upper bound on the
original decoy-state protocol, and the general decoy-state expression.
"""
from typing import Callable

import numpy as np

from ..quantum_info import as_probability, binary_entropy, nonvacuum_prob
from .params import BB84Params, DecoyObservables, ErrorParams, FormulaId


def _basis_error_cost(p: BB84Params):
    return 0.5 * binary_entropy(p.p_err_x) + 0.5 * binary_entropy(p.p_err_z)


def bb84_eve_info(p: BB84Params):
    """Eve learns the bit whenever her tap catches at least one photon."""
    return nonvacuum_prob(p.r_E * p.intensity_mu)


def bb84_conclusive_prob(p: BB84Params, T: float):
    """Bob clicks and guessed the basis right; the 1/2 is sifting."""
    T = as_probability(T, 'T')
    return 0.5 * nonvacuum_prob(T * (1.0 - p.r_E) * p.intensity_mu)


def bb84_enhanced_rate(p: BB84Params, T: float):
    """
    Devetak-Winter rate of loss-controlled BB84, normalised by the source bit rate:
    1/2 (1 - h2(px)/2 - h2(pz)/2 - exp(-T(1-r_E)mu)) exp(-r_E mu).

    The raw value is returned; it goes negative once errors dominate.
    """
    T = as_probability(T, 'T')
    bracket = nonvacuum_prob(T * (1.0 - p.r_E) * p.intensity_mu) - _basis_error_cost(p)
    return 0.5 * bracket * np.exp(-p.r_E * p.intensity_mu)


def bb84_original_upper(p: BB84Params, T: float):
    """
    Upper bound on the decoy-state BB84 rate without loss control:
    1/2 [T mu exp(-mu) - (1 - exp(-T mu)) (h2(px) + h2(pz)) / 2]. r_E is ignored.
    """
    T = as_probability(T, 'T')
    mu = p.intensity_mu
    single_photon_gain = T * mu * np.exp(-mu)
    return 0.5 * (single_photon_gain - nonvacuum_prob(T * mu) * _basis_error_cost(p))


def decoy_rate(obs: DecoyObservables):
    """1/2 [Q1 (1 - h2(e1)) - Q f h2(p_err)]."""
    secure = obs.gain_Q1 * (1.0 - binary_entropy(obs.e1))
    correction = obs.gain_Q * obs.ec_efficiency_f * binary_entropy(obs.p_err)
    return 0.5 * (secure - correction)


def decoy_upper_observables(T: float, mu, p_err: float = 0.0,
                            ec_efficiency_f: float = 1.0) -> DecoyObservables:
    """
    Observables of an attack-free run, which maximise the decoy rate:
    Q = 1 - exp(-T mu), Q1 = T mu exp(-mu), e1 = 0.
    """
    T = as_probability(T, 'T')
    mu = np.asarray(mu, dtype=float)
    gain_q1 = T * mu * np.exp(-mu)
    gain_q = nonvacuum_prob(T * mu)
    if gain_q1.ndim == 0:
        gain_q1 = float(gain_q1)
    return DecoyObservables(gain_Q=gain_q, gain_Q1=gain_q1, e1=0.0, p_err=p_err,
                            ec_efficiency_f=ec_efficiency_f)


def enhanced_objective(T: float, r_E: float, errors: ErrorParams) -> Callable:
    def objective(mu):
        return bb84_enhanced_rate(BB84Params(mu, r_E, errors.x, errors.z), T)
    return objective


def original_objective(T: float, r_E: float, errors: ErrorParams) -> Callable:
    def objective(mu):
        return bb84_original_upper(BB84Params(mu, 0.0, errors.x, errors.z), T)
    return objective


def decoy_objective(T: float, r_E: float, errors: ErrorParams) -> Callable:
    def objective(mu):
        return decoy_rate(decoy_upper_observables(T, mu, errors.x))
    return objective


functions = {
    FormulaId.BB84_ENH: enhanced_objective,
    FormulaId.BB84_ORIG_UB: original_objective,
    FormulaId.DECOY: decoy_objective,
}
