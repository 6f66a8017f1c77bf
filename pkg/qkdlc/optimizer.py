"""
Signal-intensity optimisation of the key-rate formulas and the analyses built
on it: optimal-intensity curves, boost factors, the PLOB crossover distance,
error sweeps and the rate-curve family compared in distance plots.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import bisect, minimize_scalar

from .channel import FiberSpec, transmittance
from .exceptions import DomainError, FitDegenerateError
from .rate_functions import rate_objective
from .rate_functions.bound_functions import plob_bound
from .rate_functions.params import (
    ENHANCED_FORMULA, ORIGINAL_FORMULA, ErrorParams, FormulaId, Protocol,
    RateCurve, RatePoint,
)
from .utilities import get_tunable, parallel_map

logger = logging.getLogger(__name__)

DEFAULT_SEARCH_LO = 1e-3
DEFAULT_SEARCH_HI = 1e4
DEFAULT_GRID_POINTS = 200
DEFAULT_REL_TOL = 1e-6

# Intensity at which the original BB84 bound peaks (|gamma| = 1)
BB84_ORIGINAL_MU = 1.0

CROSSOVER_XTOL_KM = 0.1
CROSSOVER_MAXITER = 60

OPTIMAL_INTENSITY_COLUMNS = ['distance_km', 'optimal_mu', 'optimal_rate']
RATE_SERIES = ('enhanced', 'enhanced_original_mu', 'original', 'plob')


@dataclass(frozen=True)
class OptimizationResult:
    optimal_mu: float
    optimal_rate: float
    bracket: Tuple[float, float]
    evaluations: int
    degenerate: bool = False
    on_edge: bool = False

    @property
    def well_posed(self) -> bool:
        return not (self.degenerate or self.on_edge)


@dataclass(frozen=True)
class BoostReport:
    """Optimised enhanced rate over the optimised original bound at one distance."""
    protocol: Protocol
    distance_km: float
    r_E: float
    factor: float
    enhanced: OptimizationResult
    original: OptimizationResult
    unbounded: bool = False

    def to_dict(self) -> Dict:
        return {
            'protocol': self.protocol.value,
            'distance_km': self.distance_km,
            'r_E': self.r_E,
            'factor': None if self.unbounded else self.factor,
            'unbounded': self.unbounded,
            'enhanced_rate': self.enhanced.optimal_rate,
            'enhanced_mu': self.enhanced.optimal_mu,
            'original_rate': self.original.optimal_rate,
            'original_mu': self.original.optimal_mu,
        }


def _optimizer_setting(key: str, value, default):
    return get_tunable('QKDLC_OPTIMIZER', key, default) if value is None else value


def optimize_intensity(objective: Callable[[float], float],
                       search_lo: Optional[float] = None,
                       search_hi: Optional[float] = None,
                       rel_tol: Optional[float] = None,
                       grid_points: Optional[int] = None) -> OptimizationResult:
    """
    Maximise `objective` over mu in [search_lo, search_hi].

    A log-spaced grid locates the best point (ties go to the smaller mu);
    golden-section search then refines inside the two neighbouring grid cells.
    The refined point is kept only if it does not lose to the grid optimum.
    """
    search_lo = float(_optimizer_setting('SEARCH_LO', search_lo, DEFAULT_SEARCH_LO))
    search_hi = float(_optimizer_setting('SEARCH_HI', search_hi, DEFAULT_SEARCH_HI))
    rel_tol = float(_optimizer_setting('REL_TOL', rel_tol, DEFAULT_REL_TOL))
    grid_points = int(_optimizer_setting('GRID_POINTS', grid_points, DEFAULT_GRID_POINTS))

    if not 0 < search_lo < search_hi:
        raise DomainError(f'need 0 < search_lo < search_hi, got [{search_lo}, {search_hi}]')
    if grid_points < 3:
        raise DomainError(f'grid_points must be at least 3, got {grid_points}')

    grid = np.geomspace(search_lo, search_hi, grid_points)
    values = np.array([float(objective(mu)) for mu in grid])
    values = np.where(np.isfinite(values), values, -np.inf)
    evaluations = grid_points

    if np.all(values == 0.0):
        logger.warning(f'Objective is identically zero on [{search_lo}, {search_hi}]')
        return OptimizationResult(search_lo, 0.0, (search_lo, search_hi), evaluations, degenerate=True)

    best = int(np.argmax(values))
    mu_lo = float(grid[max(best - 1, 0)])
    mu_hi = float(grid[min(best + 1, grid_points - 1)])
    optimal_mu, optimal_rate = float(grid[best]), float(values[best])

    if 0 < best < grid_points - 1:
        try:
            result = minimize_scalar(
                lambda mu: -float(objective(mu)),
                bracket=(mu_lo, optimal_mu, mu_hi),
                method='golden',
                tol=rel_tol,
            )
            evaluations += int(result.nfev)
            refined_mu = float(np.clip(result.x, mu_lo, mu_hi))
            refined_rate = float(objective(refined_mu))
            evaluations += 1
            if refined_rate >= optimal_rate:
                optimal_mu, optimal_rate = refined_mu, refined_rate
        except ValueError as e:
            # Flat neighbourhood: the grid point already is the answer
            logger.debug(f'Golden refinement skipped at mu={optimal_mu}: {e}')
    else:
        logger.debug(f'Grid optimum on the search edge at mu={optimal_mu}')

    logger.debug(f'Optimum mu={optimal_mu} rate={optimal_rate} in [{mu_lo}, {mu_hi}]')
    return OptimizationResult(optimal_mu, optimal_rate, (mu_lo, mu_hi), evaluations,
                              on_edge=best in (0, grid_points - 1))


def _require_well_posed(result: OptimizationResult, label: str):
    if result.well_posed:
        return
    if result.degenerate:
        raise FitDegenerateError(f'{label}: rate is identically zero over the intensity search range')
    if result.on_edge:
        raise FitDegenerateError(
            f'{label}: optimum sits on the intensity search edge at mu={result.optimal_mu:g}'
        )


def _require_sorted(distances: Sequence[float]) -> List[float]:
    distances = [float(d) for d in distances]
    if any(b < a for a, b in zip(distances, distances[1:])):
        raise DomainError('distances must be sorted ascending')
    return distances


def optimal_intensity_curve(formula_id: FormulaId, distances: Sequence[float],
                            r_E: float = 0.0, errors: Optional[ErrorParams] = None,
                            fiber: Optional[FiberSpec] = None,
                            strict: bool = False) -> List[Tuple[float, float, float]]:
    """
    (distance_km, mu*, rate*) at every distance.

    With `strict`, a flat objective or an optimum on the search edge raises
    FitDegenerateError instead of being tabulated.
    """
    distances = _require_sorted(distances)
    fiber = fiber or FiberSpec()

    def optimise_at(distance_km: float) -> Tuple[float, float, float]:
        objective = rate_objective(formula_id, transmittance(fiber, distance_km), r_E, errors)
        result = optimize_intensity(objective)
        if strict:
            _require_well_posed(result, f'{formula_id.value} at {distance_km} km')
        return distance_km, result.optimal_mu, result.optimal_rate

    curve = parallel_map(optimise_at, distances)
    logger.info(f'Optimised {formula_id.value} at {len(curve)} distances (r_E={r_E})')
    return curve


def optimal_intensity_frame(curve: List[Tuple[float, float, float]]) -> pd.DataFrame:
    return pd.DataFrame(curve, columns=OPTIMAL_INTENSITY_COLUMNS)


def _optimised(formula_id: FormulaId, T: float, r_E: float,
               errors: Optional[ErrorParams]) -> OptimizationResult:
    return optimize_intensity(rate_objective(formula_id, T, r_E, errors))


def boost_factor(protocol: Protocol, distance_km: float, r_E: float,
                 errors: Optional[ErrorParams] = None,
                 fiber: Optional[FiberSpec] = None, strict: bool = False) -> BoostReport:
    """
    Optimised loss-controlled rate divided by the optimised original upper bound.

    A non-positive original bound gives an infinite factor, flagged `unbounded`.
    With `strict`, an ill-posed loss-controlled optimum raises FitDegenerateError.
    """
    T = transmittance(fiber or FiberSpec(), distance_km)
    enhanced = _optimised(ENHANCED_FORMULA[protocol], T, r_E, errors)
    if strict:
        _require_well_posed(enhanced, f'{protocol.value} at {distance_km} km (r_E={r_E})')
    original = _optimised(ORIGINAL_FORMULA[protocol], T, r_E, errors)

    if original.optimal_rate <= 0:
        logger.warning(f'{protocol.value}: original bound vanishes at {distance_km} km, boost unbounded')
        return BoostReport(protocol, distance_km, r_E, float('inf'), enhanced, original, unbounded=True)

    factor = max(enhanced.optimal_rate, 0.0) / original.optimal_rate
    return BoostReport(protocol, distance_km, r_E, factor, enhanced, original)


def _original_mu(protocol: Protocol, original: OptimizationResult) -> float:
    """Intensity the original protocol would run at, given its optimised bound."""
    return BB84_ORIGINAL_MU if protocol is Protocol.BB84 else original.optimal_mu


def dashed_gain(protocol: Protocol, distance_km: float, r_E: float,
                errors: Optional[ErrorParams] = None,
                fiber: Optional[FiberSpec] = None) -> float:
    """
    Loss-controlled rate at the original protocol's intensity, divided by the
    optimised original bound.
    """
    T = transmittance(fiber or FiberSpec(), distance_km)
    original = _optimised(ORIGINAL_FORMULA[protocol], T, 0.0, errors)
    mu = _original_mu(protocol, original)
    enhanced = float(rate_objective(ENHANCED_FORMULA[protocol], T, r_E, errors)(mu))
    if original.optimal_rate <= 0:
        return float('inf')
    return max(enhanced, 0.0) / original.optimal_rate


def plob_crossover(formula_id: FormulaId, r_E: float, errors: Optional[ErrorParams] = None,
                   d_lo: float = 50.0, d_hi: float = 250.0,
                   fiber: Optional[FiberSpec] = None) -> Optional[float]:
    """
    Distance where the optimised rate meets the PLOB bound, or None when the
    two curves do not change order on [d_lo, d_hi].
    """
    if not d_lo < d_hi:
        raise DomainError(f'need d_lo < d_hi, got [{d_lo}, {d_hi}]')
    fiber = fiber or FiberSpec()

    def margin(distance_km: float) -> float:
        T = transmittance(fiber, distance_km)
        return _optimised(formula_id, T, r_E, errors).optimal_rate - plob_bound(T)

    at_lo, at_hi = margin(d_lo), margin(d_hi)
    if at_lo == 0:
        return d_lo
    if at_hi == 0:
        return d_hi
    if np.sign(at_lo) == np.sign(at_hi):
        logger.debug(f'{formula_id.value}: no PLOB crossover on [{d_lo}, {d_hi}] km (r_E={r_E})')
        return None
    return float(bisect(margin, d_lo, d_hi, xtol=CROSSOVER_XTOL_KM, maxiter=CROSSOVER_MAXITER))


def _column_label(r_E: float) -> str:
    return f'rate_rE_{r_E:g}'


def error_sweep(distance_km: float, r_E_list: Sequence[float], p_err_grid: Sequence[float],
                protocol: Protocol = Protocol.BB84,
                fiber: Optional[FiberSpec] = None) -> pd.DataFrame:
    """
    Optimised clamped rates against the error probability, one column per r_E
    plus the original bound. BB84 errors apply equally to both bases.
    """
    T = transmittance(fiber or FiberSpec(), distance_km)
    r_E_list = [float(r) for r in r_E_list]

    def row(p_err: float) -> Dict[str, float]:
        errors = ErrorParams(p_err)
        values = {'p_err': float(p_err)}
        for r_E in r_E_list:
            values[_column_label(r_E)] = max(_optimised(ENHANCED_FORMULA[protocol], T, r_E, errors).optimal_rate, 0.0)
        values['rate_original'] = max(_optimised(ORIGINAL_FORMULA[protocol], T, 0.0, errors).optimal_rate, 0.0)
        return values

    rows = parallel_map(row, list(p_err_grid))
    columns = ['p_err'] + [_column_label(r) for r in r_E_list] + ['rate_original']
    return pd.DataFrame(rows, columns=columns)


def error_ratio_report(distance_km: float, r_E: float, p_err: float,
                       protocol: Protocol = Protocol.BB84,
                       fiber: Optional[FiberSpec] = None) -> Dict[str, float]:
    """
    Two readings of the gain under errors: against the original bound at the
    same error level, and against the error-free original bound.
    """
    T = transmittance(fiber or FiberSpec(), distance_km)
    errors = ErrorParams(p_err)
    enhanced = _optimised(ENHANCED_FORMULA[protocol], T, r_E, errors).optimal_rate
    original = _optimised(ORIGINAL_FORMULA[protocol], T, 0.0, errors).optimal_rate
    original_error_free = _optimised(ORIGINAL_FORMULA[protocol], T, 0.0, ErrorParams()).optimal_rate

    def ratio(denominator: float) -> Optional[float]:
        return None if denominator <= 0 else max(enhanced, 0.0) / denominator

    return {
        'distance_km': float(distance_km),
        'r_E': float(r_E),
        'p_err': float(p_err),
        'enhanced_rate': enhanced,
        'original_rate': original,
        'original_rate_error_free': original_error_free,
        'ratio_same_errors': ratio(original),
        'ratio_error_free_baseline': ratio(original_error_free),
    }


def rate_curves(protocol: Protocol, distances: Sequence[float], r_E: float,
                errors: Optional[ErrorParams] = None, mu: Optional[float] = None,
                fiber: Optional[FiberSpec] = None) -> Dict[str, RateCurve]:
    """
    The four series of a rate-versus-distance comparison:

    - enhanced: loss-controlled rate, optimised over mu (or at the fixed `mu`)
    - enhanced_original_mu: loss-controlled rate at the original protocol's intensity
    - original: upper bound on the original protocol, always optimised
    - plob: the repeaterless bound

    A fixed `mu` only applies to the enhanced series.
    """
    distances = _require_sorted(distances)
    fiber = fiber or FiberSpec()
    enhanced_id, original_id = ENHANCED_FORMULA[protocol], ORIGINAL_FORMULA[protocol]

    def points_at(distance_km: float) -> Tuple[RatePoint, ...]:
        T = transmittance(fiber, distance_km)
        enhanced_objective = rate_objective(enhanced_id, T, r_E, errors)
        if mu is None:
            enhanced = optimize_intensity(enhanced_objective)
            enhanced_mu, enhanced_rate = enhanced.optimal_mu, enhanced.optimal_rate
        else:
            enhanced_mu, enhanced_rate = float(mu), float(enhanced_objective(mu))
        original = _optimised(original_id, T, 0.0, errors)
        dashed_mu = _original_mu(protocol, original)
        dashed_rate = float(enhanced_objective(dashed_mu))
        return (
            RatePoint(distance_km, enhanced_rate, enhanced_mu, enhanced_id),
            RatePoint(distance_km, dashed_rate, dashed_mu, enhanced_id),
            RatePoint(distance_km, original.optimal_rate, original.optimal_mu, original_id),
            RatePoint(distance_km, plob_bound(T), None, FormulaId.PLOB),
        )

    rows = parallel_map(points_at, distances)
    formulas = (enhanced_id, enhanced_id, original_id, FormulaId.PLOB)
    curves = {}
    for index, (series, formula_id) in enumerate(zip(RATE_SERIES, formulas)):
        series_r_E = r_E if formula_id is enhanced_id else None
        curves[series] = RateCurve(series, formula_id, series_r_E, [row[index] for row in rows])

    logger.info(f'Built {protocol.value} rate curves at {len(distances)} distances (r_E={r_E})')
    return curves
