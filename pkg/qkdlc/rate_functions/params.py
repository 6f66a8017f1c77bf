"""
Parameter and result types shared by the key-rate formulas.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from ..exceptions import DomainError
from ..quantum_info import as_nonnegative, as_probability

RATE_CURVE_COLUMNS = ['distance_km', 'raw_rate', 'clamped_rate', 'intensity_mu', 'formula_id']


class Protocol(Enum):
    """Protocol families analysed with and without loss control."""
    BB84 = "bb84"
    COW = "cow"


class FormulaId(Enum):
    """Every closed-form rate the toolkit can evaluate."""
    BB84_ENH = "BB84_ENH"
    BB84_ORIG_UB = "BB84_ORIG_UB"
    DECOY = "DECOY"
    COW_ENH = "COW_ENH"
    COW_ORIG_UB = "COW_ORIG_UB"
    PLOB = "PLOB"


ENHANCED_FORMULA = {
    Protocol.BB84: FormulaId.BB84_ENH,
    Protocol.COW: FormulaId.COW_ENH,
}

ORIGINAL_FORMULA = {
    Protocol.BB84: FormulaId.BB84_ORIG_UB,
    Protocol.COW: FormulaId.COW_ORIG_UB,
}


@dataclass(frozen=True)
class BB84Params:
    """Signal intensity, detectable leak and per-basis error probabilities."""
    intensity_mu: Any
    r_E: float = 0.0
    p_err_x: float = 0.0
    p_err_z: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'intensity_mu', as_nonnegative(self.intensity_mu, 'intensity_mu'))
        object.__setattr__(self, 'r_E', as_probability(self.r_E, 'r_E'))
        object.__setattr__(self, 'p_err_x', as_probability(self.p_err_x, 'p_err_x'))
        object.__setattr__(self, 'p_err_z', as_probability(self.p_err_z, 'p_err_z'))


@dataclass(frozen=True)
class COWParams:
    """Signal intensity, detectable leak and the raw-key error probability."""
    intensity_mu: Any
    r_E: float = 0.0
    p_err: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'intensity_mu', as_nonnegative(self.intensity_mu, 'intensity_mu'))
        object.__setattr__(self, 'r_E', as_probability(self.r_E, 'r_E'))
        object.__setattr__(self, 'p_err', as_probability(self.p_err, 'p_err'))


@dataclass(frozen=True)
class DecoyObservables:
    """Gains, single-photon error rate and error-correction efficiency of a decoy run."""
    gain_Q: Any
    gain_Q1: Any
    e1: float = 0.0
    p_err: float = 0.0
    ec_efficiency_f: float = 1.0

    def __post_init__(self):
        gain_q = as_probability(self.gain_Q, 'gain_Q')
        gain_q1 = as_probability(self.gain_Q1, 'gain_Q1')
        if np.any(np.asarray(gain_q1) > np.asarray(gain_q)):
            raise DomainError(f'single-photon gain Q1={gain_q1!r} exceeds signal gain Q={gain_q!r}')
        if not self.ec_efficiency_f >= 1.0:
            raise DomainError(f'error-correction efficiency must be >= 1, got {self.ec_efficiency_f!r}')
        object.__setattr__(self, 'gain_Q', gain_q)
        object.__setattr__(self, 'gain_Q1', gain_q1)
        object.__setattr__(self, 'e1', as_probability(self.e1, 'e1'))
        object.__setattr__(self, 'p_err', as_probability(self.p_err, 'p_err'))


@dataclass(frozen=True)
class ErrorParams:
    """
    Error probabilities of a run. BB84 reads both bases (z defaults to x);
    COW has a single raw-key error probability, `p_err`.
    """
    p_err: float = 0.0
    p_err_z: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'p_err', as_probability(self.p_err, 'p_err'))
        if self.p_err_z is not None:
            object.__setattr__(self, 'p_err_z', as_probability(self.p_err_z, 'p_err_z'))

    @property
    def x(self) -> float:
        return self.p_err

    @property
    def z(self) -> float:
        return self.p_err if self.p_err_z is None else self.p_err_z


@dataclass(frozen=True)
class RatePoint:
    """Normalised secret key rate L_f/L at one distance, with provenance."""
    distance_km: float
    raw_rate: float
    intensity_mu: Optional[float]
    formula_id: FormulaId

    @property
    def clamped_rate(self) -> float:
        return max(0.0, self.raw_rate)

    @property
    def normalized_rate(self) -> float:
        return self.clamped_rate

    def to_dict(self) -> Dict[str, Any]:
        return {
            'distance_km': self.distance_km,
            'raw_rate': self.raw_rate,
            'clamped_rate': self.clamped_rate,
            'intensity_mu': self.intensity_mu,
            'formula_id': self.formula_id.value,
        }


@dataclass
class RateCurve:
    """An ordered series of rate points sharing one formula and scenario."""
    series: str
    formula_id: FormulaId
    r_E: Optional[float] = None
    points: List[RatePoint] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([point.to_dict() for point in self.points], columns=RATE_CURVE_COLUMNS)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'series': self.series,
            'formula_id': self.formula_id.value,
            'r_E': self.r_E,
            'points': [point.to_dict() for point in self.points],
        }

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, series: str, r_E: Optional[float] = None) -> 'RateCurve':
        points = [
            RatePoint(
                distance_km=float(row.distance_km),
                raw_rate=float(row.raw_rate),
                intensity_mu=None if pd.isna(row.intensity_mu) else float(row.intensity_mu),
                formula_id=FormulaId(row.formula_id),
            )
            for row in frame.itertuples(index=False)
        ]
        formula_id = points[0].formula_id if points else FormulaId.PLOB
        return cls(series=series, formula_id=formula_id, r_E=r_E, points=points)
