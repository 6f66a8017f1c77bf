"""
Reflectogram synthesis and line-tomogram fitting.

A reflectogram is modelled as a linear decline in dB (natural attenuation seen
on the round trip) plus a downward step at every local leak. Fitting undoes the
model: robust slope, windowed-derivative change points, then a joint
least-squares fit of slope and step heights.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import median_abs_deviation, siegelslopes

from ..channel import ChannelState, LocalLeak
from ..exceptions import DomainError, FitDegenerateError
from ..quantum_info import as_probability
from ..utilities import get_tunable

logger = logging.getLogger(__name__)

DEFAULT_WINDOW_BINS = 5
DEFAULT_MAD_FACTOR = 5.0
DEFAULT_MIN_LEAK_MAGNITUDE = 1e-3

REFLECTOGRAM_COLUMNS = ['position_km', 'power_dB']

# Smallest step the change-point detector reacts to, in dB
_STEP_FLOOR_DB = 1e-9
_POSITION_TOL_KM = 1e-9


def round_trip_step_db(magnitude: float) -> float:
    """Height of a leak's step in a reflectogram: twice the one-way loss."""
    return -20.0 * math.log10(1.0 - magnitude)


def magnitude_from_step(step_db: float) -> float:
    return 1.0 - 10.0 ** (-step_db / 20.0)


@dataclass(frozen=True, eq=False)
class Reflectogram:
    """Backscatter power in dB relative to launch on a uniform position grid."""
    positions_km: np.ndarray
    power_dB: np.ndarray
    resolution_km: float
    n_averages: int = 1

    def __post_init__(self):
        positions = np.asarray(self.positions_km, dtype=float)
        power = np.asarray(self.power_dB, dtype=float)
        if positions.ndim != 1 or positions.shape != power.shape:
            raise DomainError('positions and power must be 1-D arrays of equal length')
        if positions.size > 1:
            steps = np.diff(positions)
            if np.any(steps <= 0) or not np.allclose(steps, self.resolution_km, rtol=1e-6, atol=1e-12):
                raise DomainError(f'positions must be uniformly spaced by {self.resolution_km} km')
        if not np.all(np.isfinite(power)):
            raise DomainError('reflectogram power must be finite')
        object.__setattr__(self, 'positions_km', positions)
        object.__setattr__(self, 'power_dB', power)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'position_km': self.positions_km, 'power_dB': self.power_dB},
                            columns=REFLECTOGRAM_COLUMNS)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, n_averages: int = 1) -> 'Reflectogram':
        positions = frame['position_km'].to_numpy(dtype=float)
        if positions.size < 2:
            raise DomainError('a reflectogram needs at least two points')
        resolution = float(np.mean(np.diff(positions)))
        return cls(positions, frame['power_dB'].to_numpy(dtype=float), resolution, n_averages)


@dataclass(frozen=True)
class Tomogram:
    """Recovered local leaks with the fitted natural-loss slope."""
    leaks: Tuple[LocalLeak, ...] = field(default_factory=tuple)
    fitted_slope_dB_per_km: float = 0.0
    residual_rms_dB: float = 0.0

    @property
    def total_leak(self) -> float:
        """1 - prod(1 - m_i) over the recovered leaks."""
        log_survival = math.fsum(math.log1p(-leak.magnitude) for leak in self.leaks)
        return -math.expm1(log_survival)


def synth_reflectogram(channel: ChannelState, resolution_km: float, noise_sigma_dB: float = 0.0,
                       n_averages: int = 1, seed: Any = None) -> Reflectogram:
    """
    power(z) = -2 (10 xi) z - sum_{z_i <= z} 2 Delta_i + noise, with Delta_i the
    one-way step of leak i and Gaussian noise of std noise_sigma / sqrt(n_averages).
    """
    length = channel.fiber.length_km
    if not resolution_km > 0:
        raise DomainError(f'resolution must be positive, got {resolution_km!r}')
    if not noise_sigma_dB >= 0:
        raise DomainError(f'noise sigma must be non-negative, got {noise_sigma_dB!r}')
    if int(n_averages) < 1:
        raise DomainError(f'n_averages must be at least 1, got {n_averages!r}')
    if resolution_km > length:
        raise DomainError(f'resolution {resolution_km} km exceeds the fiber length {length} km')

    count = int(np.floor(length / resolution_km + 1e-9)) + 1
    positions = resolution_km * np.arange(count)
    power = -2.0 * channel.fiber.loss_db_per_km * positions
    for leak in channel.leaks:
        power = power - 2.0 * leak.one_way_db * (positions >= leak.position_km - _POSITION_TOL_KM)

    if noise_sigma_dB > 0:
        rng = np.random.default_rng(seed)
        power = power + rng.normal(0.0, noise_sigma_dB / math.sqrt(n_averages), size=count)

    return Reflectogram(positions, power, float(resolution_km), int(n_averages))


def windowed_derivative(residual: np.ndarray, window: int) -> np.ndarray:
    """
    d[k] = mean(residual[k:k+w]) - mean(residual[k-w:k]) for k in [w, n-w];
    entries outside that range are NaN.
    """
    n = residual.size
    cumulative = np.concatenate(([0.0], np.cumsum(residual)))
    k = np.arange(window, n - window + 1)
    after = (cumulative[k + window] - cumulative[k]) / window
    before = (cumulative[k] - cumulative[k - window]) / window
    derivative = np.full(n, np.nan)
    derivative[k] = after - before
    return derivative


def _change_points(derivative: np.ndarray, threshold: float) -> List[int]:
    centred = derivative - np.nanmedian(derivative)
    below = np.nan_to_num(centred, nan=0.0) < -threshold
    points = []
    k = 0
    while k < below.size:
        if not below[k]:
            k += 1
            continue
        start = k
        while k < below.size and below[k]:
            k += 1
        points.append(start + int(np.argmin(centred[start:k])))
    return points


def _joint_fit(positions: np.ndarray, power: np.ndarray, change_points: Sequence[int]):
    columns = [np.ones_like(positions), positions]
    columns += [-(np.arange(positions.size) >= index).astype(float) for index in change_points]
    design = np.column_stack(columns)
    coefficients, _, rank, _ = np.linalg.lstsq(design, power, rcond=None)
    if rank < design.shape[1]:
        raise FitDegenerateError(f'step design is rank-deficient ({rank} < {design.shape[1]})')
    residual = power - design @ coefficients
    return coefficients, residual


def fit_tomogram(r: Reflectogram, min_leak_magnitude: Optional[float] = None,
                 window: Optional[int] = None, mad_factor: Optional[float] = None) -> Tomogram:
    """
    Recover the loss tomogram of a reflectogram.

    Steps are detected where the windowed derivative of the detrended trace
    drops below -max(mad_factor * MAD, half the step of the smallest reportable
    leak). Leaks closer than one window to either end of the trace are not
    resolvable.
    """
    if min_leak_magnitude is None:
        min_leak_magnitude = get_tunable('QKDLC_TOMOGRAPHY', 'MIN_LEAK_MAGNITUDE', DEFAULT_MIN_LEAK_MAGNITUDE)
    if window is None:
        window = get_tunable('QKDLC_TOMOGRAPHY', 'WINDOW_BINS', DEFAULT_WINDOW_BINS)
    if mad_factor is None:
        mad_factor = get_tunable('QKDLC_TOMOGRAPHY', 'MAD_FACTOR', DEFAULT_MAD_FACTOR)
    min_leak_magnitude = as_probability(min_leak_magnitude, 'min_leak_magnitude')
    window = int(window)

    positions, power = r.positions_km, r.power_dB
    if window < 1 or positions.size < 3 * window:
        raise FitDegenerateError(
            f'trace of {positions.size} points is shorter than three windows of {window} bins'
        )

    slope, intercept = siegelslopes(power, positions)
    residual = power - (intercept + slope * positions)
    derivative = windowed_derivative(residual, window)

    spread = float(median_abs_deviation(derivative, nan_policy='omit'))
    floor = 0.5 * round_trip_step_db(min_leak_magnitude) if min_leak_magnitude < 1 else 0.0
    threshold = max(mad_factor * spread, floor, _STEP_FLOOR_DB)
    change_points = _change_points(derivative, threshold)
    logger.debug(f'Robust slope {slope} dB/km, threshold {threshold} dB, change points {change_points}')

    while True:
        coefficients, fit_residual = _joint_fit(positions, power, change_points)
        heights = coefficients[2:]
        kept = [index for index, height in zip(change_points, heights)
                if height > 0 and magnitude_from_step(height) >= min_leak_magnitude]
        if len(kept) == len(change_points):
            break
        change_points = kept

    leaks = tuple(
        LocalLeak(float(positions[index]), float(magnitude_from_step(height)))
        for index, height in zip(change_points, heights)
    )
    rms = float(np.sqrt(np.mean(fit_residual ** 2)))
    logger.debug(f'Recovered {len(leaks)} leaks, residual rms {rms} dB')
    return Tomogram(leaks, float(coefficients[1]), rms)


def compare_leaks(injected: Sequence[LocalLeak], recovered: Sequence[LocalLeak]) -> List[Dict[str, Any]]:
    """Pair every injected leak with the nearest recovered one."""
    report = []
    for leak in injected:
        nearest = min(recovered, key=lambda found: abs(found.position_km - leak.position_km), default=None)
        entry = {
            'position_km': leak.position_km,
            'magnitude': leak.magnitude,
            'benign': leak.benign,
            'recovered_position_km': None,
            'recovered_magnitude': None,
            'position_error_km': None,
            'magnitude_error': None,
        }
        if nearest is not None:
            entry.update({
                'recovered_position_km': nearest.position_km,
                'recovered_magnitude': nearest.magnitude,
                'position_error_km': nearest.position_km - leak.position_km,
                'magnitude_error': nearest.magnitude - leak.magnitude,
            })
        report.append(entry)
    return report
