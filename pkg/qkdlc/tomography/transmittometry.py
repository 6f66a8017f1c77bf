"""
Modulated transmittometry: total leakage from the ratio of input and output
spectral power at the modulation frequency, read off a windowed periodogram
the way a digital lock-in does.
"""
import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.signal import periodogram

from ..exceptions import DomainError, ParameterValidationError, SpectralAlignmentError

logger = logging.getLogger(__name__)

# Test-pulse constants of the reference setup; recorded, not simulated
TEST_PULSE_PHOTONS = 1e11
TEST_PULSE_DURATION_S = 1e-6
TEST_WAVELENGTH_NM = 1530.0

MIN_CYCLES = 100
ONE_OVER_F_OCTAVES = 10
_ALIGNMENT_TOL = 1e-6


@dataclass(frozen=True)
class TransmittometryConfig:
    """Modulation tone, sampling window and noise model of one measurement."""
    mod_freq_hz: float = 1e6
    sample_rate_hz: float = 16e6
    duration_s: float = 1e-3
    one_over_f_amp: float = 0.0
    white_noise_amp: float = 0.0
    seed: int = 0
    tone_amp: float = 1.0
    pulse_photons: float = TEST_PULSE_PHOTONS
    pulse_duration_s: float = TEST_PULSE_DURATION_S
    wavelength_nm: float = TEST_WAVELENGTH_NM

    def __post_init__(self):
        if not (self.mod_freq_hz > 0 and self.sample_rate_hz > 0 and self.duration_s > 0):
            raise ParameterValidationError('frequencies and duration must be positive')
        if not self.mod_freq_hz < self.sample_rate_hz / 2:
            raise ParameterValidationError(
                f'modulation {self.mod_freq_hz} Hz is not below Nyquist ({self.sample_rate_hz / 2} Hz)'
            )
        if self.cycles < MIN_CYCLES - _ALIGNMENT_TOL:
            raise ParameterValidationError(
                f'window holds {self.cycles:g} modulation cycles, need at least {MIN_CYCLES}'
            )
        if self.one_over_f_amp < 0 or self.white_noise_amp < 0 or self.tone_amp <= 0:
            raise ParameterValidationError('noise amplitudes must be non-negative and the tone positive')
        if abs(self.n_samples - self.duration_s * self.sample_rate_hz) > _ALIGNMENT_TOL:
            raise SpectralAlignmentError('duration must hold an integer number of samples')
        if abs(self.cycles - round(self.cycles)) > _ALIGNMENT_TOL:
            raise SpectralAlignmentError(
                f'{self.cycles:g} modulation cycles in the window: the tone falls between DFT bins'
            )

    @property
    def cycles(self) -> float:
        return self.duration_s * self.mod_freq_hz

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s * self.sample_rate_hz))

    @property
    def tone_bin(self) -> int:
        return int(round(self.cycles))


def _check_transmittances(true_effective_T: float, natural_T: float):
    if not 0 < true_effective_T <= natural_T <= 1:
        raise DomainError(
            f'need 0 < effective T <= natural T <= 1, got {true_effective_T!r}, {natural_T!r}'
        )


def _noise(cfg: TransmittometryConfig, t: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Octave-band sinusoids below f_mod (amplitude ~ 1/sqrt(f)) plus white noise."""
    noise = np.zeros_like(t)
    if cfg.one_over_f_amp > 0:
        frequencies = cfg.mod_freq_hz / 2.0 ** np.arange(1, ONE_OVER_F_OCTAVES + 1)
        amplitudes = cfg.one_over_f_amp * np.sqrt(frequencies[-1] / frequencies)
        phases = rng.uniform(0.0, 2.0 * np.pi, frequencies.size)
        noise += np.sum(amplitudes[:, None] * np.sin(2.0 * np.pi * frequencies[:, None] * t + phases[:, None]), axis=0)
    if cfg.white_noise_amp > 0:
        noise += rng.normal(0.0, cfg.white_noise_amp, t.size)
    return noise


def synthesize_tones(cfg: TransmittometryConfig, true_effective_T: float) -> Tuple[np.ndarray, np.ndarray]:
    """Input tone and the tone returned through the line, each with independent noise."""
    rng = np.random.default_rng(cfg.seed)
    t = np.arange(cfg.n_samples) / cfg.sample_rate_hz
    tone = cfg.tone_amp * np.sin(2.0 * np.pi * cfg.mod_freq_hz * t)
    launched = tone + _noise(cfg, t, rng)
    received = true_effective_T * tone + _noise(cfg, t, rng)
    return launched, received


def _leak_from_ratio(ratio: float, natural_T: float) -> float:
    return float(min(max(1.0 - ratio / natural_T, 0.0), 1.0))


def transmittometry_estimate(cfg: TransmittometryConfig, true_effective_T: float, natural_T: float) -> float:
    """
    r_E estimate 1 - T_hat / T_natural, where T_hat is the square root of the
    output-to-input power ratio in the modulation bin of a Hann periodogram.
    """
    _check_transmittances(true_effective_T, natural_T)
    launched, received = synthesize_tones(cfg, true_effective_T)
    _, power_in = periodogram(launched, cfg.sample_rate_hz, window='hann', detrend=False, scaling='spectrum')
    _, power_out = periodogram(received, cfg.sample_rate_hz, window='hann', detrend=False, scaling='spectrum')
    ratio = math.sqrt(power_out[cfg.tone_bin] / power_in[cfg.tone_bin])
    estimate = _leak_from_ratio(ratio, natural_T)
    logger.debug(f'Lock-in transmittance {ratio}, r_E estimate {estimate}')
    return estimate


def naive_rms_estimate(cfg: TransmittometryConfig, true_effective_T: float, natural_T: float) -> float:
    """Time-domain RMS ratio on the same synthesized signals, for comparison."""
    _check_transmittances(true_effective_T, natural_T)
    launched, received = synthesize_tones(cfg, true_effective_T)
    ratio = math.sqrt(np.mean(received ** 2) / np.mean(launched ** 2))
    return _leak_from_ratio(ratio, natural_T)
