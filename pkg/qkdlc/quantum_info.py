"""
Quantum-information primitives shared by every leakage and key-rate formula:
binary entropy, coherent-state overlaps, Poisson photon statistics and the
Holevo quantity of two equiprobable pure states.
"""
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.special import entr, gammaln, xlogy

from .exceptions import DomainError

ArrayLike = Union[float, np.ndarray]

LN2 = math.log(2.0)


def _to_float_or_array(arr: np.ndarray) -> ArrayLike:
    return float(arr) if arr.ndim == 0 else arr


def as_probability(value, name: str = 'probability') -> ArrayLike:
    """Return value as a float (or float array) after checking it lies in [0, 1]."""
    if isinstance(value, Probability):
        return value.value
    arr = np.asarray(value, dtype=float)
    # written as a negated range test so NaN is rejected too
    if np.any(~((arr >= 0.0) & (arr <= 1.0))):
        raise DomainError(f'{name} must lie in [0, 1], got {value!r}')
    return _to_float_or_array(arr)


def as_nonnegative(value, name: str) -> ArrayLike:
    """Return value as a float (or float array) after checking it is >= 0."""
    arr = np.asarray(value, dtype=float)
    if np.any(~(arr >= 0.0)):
        raise DomainError(f'{name} must be non-negative, got {value!r}')
    return _to_float_or_array(arr)


@dataclass(frozen=True)
class Probability:
    """A real number constrained to [0, 1]."""
    value: float

    def __post_init__(self):
        object.__setattr__(self, 'value', as_probability(self.value))

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class CoherentAmplitude:
    """Complex amplitude of a coherent state; intensity is the mean photon number."""
    re: float = 0.0
    im: float = 0.0

    @classmethod
    def from_intensity(cls, mu: float, phase: float = 0.0) -> 'CoherentAmplitude':
        mu = as_nonnegative(mu, 'mu')
        radius = math.sqrt(mu)
        return cls(radius * math.cos(phase), radius * math.sin(phase))

    @property
    def intensity(self) -> float:
        return self.re * self.re + self.im * self.im

    def scaled(self, factor: float) -> 'CoherentAmplitude':
        return CoherentAmplitude(self.re * factor, self.im * factor)

    def __neg__(self) -> 'CoherentAmplitude':
        return CoherentAmplitude(-self.re, -self.im)

    def __complex__(self) -> complex:
        return complex(self.re, self.im)


VACUUM = CoherentAmplitude()


def binary_entropy(p) -> ArrayLike:
    """
    h2(p) = -p log2 p - (1-p) log2 (1-p), with 0 log 0 = 0.

    Accepts a scalar, a Probability or an array of probabilities.
    """
    p = as_probability(p, 'p')
    # entr(x) = -x ln x and is exactly 0 at x = 0
    return (entr(p) + entr(1.0 - p)) / LN2


def coherent_overlap_mag(a: CoherentAmplitude, b: CoherentAmplitude) -> float:
    """|<a|b>| = exp(-|a - b|^2 / 2)."""
    distance = abs(complex(a) - complex(b))
    return math.exp(-0.5 * distance * distance)


def multimode_overlap_mag(a_modes: Sequence[CoherentAmplitude],
                          b_modes: Sequence[CoherentAmplitude]) -> float:
    """Overlap magnitude of two product states of coherent pulses."""
    if len(a_modes) != len(b_modes):
        raise DomainError(
            f'mode count mismatch: {len(a_modes)} vs {len(b_modes)}'
        )
    overlap = 1.0
    for a, b in zip(a_modes, b_modes):
        overlap *= coherent_overlap_mag(a, b)
    return overlap


def holevo_two_pure(overlap_mag) -> ArrayLike:
    """Holevo quantity of two equiprobable pure states with overlap magnitude s."""
    s = as_probability(overlap_mag, 'overlap_mag')
    return binary_entropy((1.0 - s) / 2.0)


def poisson_pmf(mu, n) -> ArrayLike:
    """
    Poisson probability of n photons at mean mu, evaluated in log space.

    The log-gamma form keeps test-pulse scale means (~1e11 photons) finite.
    """
    mu = as_nonnegative(mu, 'mu')
    n_arr = np.asarray(n)
    if not np.issubdtype(n_arr.dtype, np.integer):
        if np.any(n_arr != np.floor(n_arr)):
            raise DomainError(f'photon count must be an integer, got {n!r}')
    n_arr = n_arr.astype(float)
    if np.any(n_arr < 0):
        raise DomainError(f'photon count must be non-negative, got {n!r}')
    log_pmf = xlogy(n_arr, mu) - gammaln(n_arr + 1.0) - mu
    return _to_float_or_array(np.asarray(np.exp(log_pmf)))


def nonvacuum_prob(mu) -> ArrayLike:
    """Probability of at least one photon in a coherent pulse of mean mu."""
    mu = as_nonnegative(mu, 'mu')
    return _to_float_or_array(np.asarray(-np.expm1(-np.asarray(mu, dtype=float))))
