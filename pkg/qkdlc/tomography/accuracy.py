"""
Monte Carlo calibration of the tomogram fit: how often a leak of a given
magnitude is recovered at a given noise floor, and the smallest magnitude
recovered with a required confidence.
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional

from scipy.stats import binomtest

from ..channel import ChannelState, FiberSpec, LocalLeak
from ..exceptions import DomainError, FitDegenerateError
from ..utilities import get_tunable, parallel_map
from .reflectogram import DEFAULT_MIN_LEAK_MAGNITUDE, fit_tomogram, synth_reflectogram

logger = logging.getLogger(__name__)

DEFAULT_TRIALS = 200
DEFAULT_FIBER_LENGTH_KM = 25.0
DEFAULT_RESOLUTION_KM = 0.05
POSITION_TOLERANCE_BINS = 2
MAGNITUDE_TOLERANCE = 0.2

# Largest magnitude probed by the bisection
MAGNITUDE_CEILING = 0.05
BISECTION_RATIO = 1.05
BISECTION_MAXITER = 30


@dataclass(frozen=True)
class RecoveryReport:
    magnitude: float
    successes: int
    trials: int
    ci_low: float
    ci_high: float

    @property
    def rate(self) -> float:
        return self.successes / self.trials if self.trials else 1.0


@dataclass(frozen=True)
class AccuracyReport:
    """Smallest reliably recovered magnitude and the success rate measured there."""
    magnitude: float
    success_rate: float
    ci_low: float
    ci_high: float
    trials: int
    confidence: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            'magnitude': self.magnitude,
            'success_rate': self.success_rate,
            'ci_low': self.ci_low,
            'ci_high': self.ci_high,
            'trials': self.trials,
            'confidence': self.confidence,
        }


def _probe_channel(magnitude: float, fiber_length_km: float, resolution_km: float,
                   xi: Optional[float]) -> ChannelState:
    fiber = FiberSpec(length_km=fiber_length_km) if xi is None else FiberSpec(xi, fiber_length_km)
    # Leak centred on a grid point
    position = resolution_km * round(0.5 * fiber_length_km / resolution_km)
    return ChannelState(fiber, (LocalLeak(position, magnitude),))


def recovery_rate(magnitude: float, noise_sigma_dB: float, n_averages: int = 1,
                  resolution_km: float = DEFAULT_RESOLUTION_KM, trials: int = DEFAULT_TRIALS,
                  seed: int = 0, confidence: float = 0.95,
                  min_leak_magnitude: Optional[float] = None,
                  fiber_length_km: float = DEFAULT_FIBER_LENGTH_KM,
                  xi: Optional[float] = None) -> RecoveryReport:
    """
    Share of seeded synth/fit trials recovering a single leak within two bins
    and 20% of its magnitude, with a Wilson interval at `confidence`.

    Trial i draws its noise from (seed, i), so probes at different magnitudes
    share noise realisations.
    """
    if int(trials) < 1:
        raise DomainError(f'trials must be at least 1, got {trials!r}')
    channel = _probe_channel(magnitude, fiber_length_km, resolution_km, xi)
    target = channel.leaks[0]

    def trial(index: int) -> bool:
        trace = synth_reflectogram(channel, resolution_km, noise_sigma_dB, n_averages, seed=[seed, index])
        try:
            tomogram = fit_tomogram(trace, min_leak_magnitude)
        except FitDegenerateError:
            return False
        return any(
            abs(leak.position_km - target.position_km) <= POSITION_TOLERANCE_BINS * resolution_km + 1e-9
            and abs(leak.magnitude - target.magnitude) <= MAGNITUDE_TOLERANCE * target.magnitude
            for leak in tomogram.leaks
        )

    successes = int(sum(parallel_map(trial, range(int(trials)))))
    interval = binomtest(successes, int(trials)).proportion_ci(confidence_level=confidence, method='wilson')
    logger.debug(f'm={magnitude}: {successes}/{trials} recovered')
    return RecoveryReport(float(magnitude), successes, int(trials), float(interval.low), float(interval.high))


def detection_accuracy(noise_sigma_dB: float, n_averages: int = 1,
                       resolution_km: float = DEFAULT_RESOLUTION_KM, confidence: float = 0.95,
                       trials: int = DEFAULT_TRIALS, seed: int = 0,
                       min_leak_magnitude: Optional[float] = None,
                       fiber_length_km: float = DEFAULT_FIBER_LENGTH_KM,
                       xi: Optional[float] = None) -> AccuracyReport:
    """
    Smallest leak magnitude recovered in at least `confidence` of the trials,
    found by bisection in log-magnitude between the reporting threshold and
    MAGNITUDE_CEILING.

    Without noise the fit is exact and the reporting threshold is returned.
    """
    if min_leak_magnitude is None:
        min_leak_magnitude = get_tunable('QKDLC_TOMOGRAPHY', 'MIN_LEAK_MAGNITUDE', DEFAULT_MIN_LEAK_MAGNITUDE)
    if not noise_sigma_dB >= 0 or not resolution_km > 0 or int(n_averages) < 1:
        raise DomainError('noise must be non-negative, resolution positive and n_averages at least 1')
    if not 0 < confidence < 1:
        raise DomainError(f'confidence must lie in (0, 1), got {confidence!r}')

    if noise_sigma_dB == 0:
        return AccuracyReport(float(min_leak_magnitude), 1.0, 1.0, 1.0, 0, confidence)

    def probe(magnitude: float) -> RecoveryReport:
        return recovery_rate(magnitude, noise_sigma_dB, n_averages, resolution_km, trials, seed,
                             confidence, min_leak_magnitude, fiber_length_km, xi)

    lo, hi = max(float(min_leak_magnitude), 1e-6), MAGNITUDE_CEILING
    best = probe(lo)
    if best.rate < confidence:
        best = probe(hi)
        if best.rate < confidence:
            logger.warning(f'No magnitude up to {hi} is recovered at {confidence} confidence')
        else:
            for _ in range(BISECTION_MAXITER):
                if hi / lo <= BISECTION_RATIO:
                    break
                middle = math.sqrt(lo * hi)
                report = probe(middle)
                if report.rate >= confidence:
                    hi, best = middle, report
                else:
                    lo = middle

    logger.info(f'Detection accuracy {best.magnitude} at noise {noise_sigma_dB} dB / {n_averages} averages')
    return AccuracyReport(best.magnitude, best.rate, best.ci_low, best.ci_high, best.trials, confidence)

