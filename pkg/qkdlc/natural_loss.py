"""
Upper bounds on the information an eavesdropper could extract from
Rayleigh-scattered natural losses, as a function of the length of the
collection apparatus, for three bit encodings.
"""
import logging
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .channel import FiberSpec, natural_scatter_fraction
from .exceptions import DomainError
from .quantum_info import (
    VACUUM, CoherentAmplitude, as_nonnegative, holevo_two_pure,
    multimode_overlap_mag, nonvacuum_prob,
)

logger = logging.getLogger(__name__)

DEFAULT_INTENSITY = 100.0
DEFAULT_THRESHOLD_BITS = 0.5


class EncodingKind(Enum):
    """Bit encodings compared for natural-loss eavesdropping."""
    DPS_LIKE = "dps"                  # "0" -> |g>|g>,  "1" -> |g>|-g>
    COW_LIKE = "cow"                  # "0" -> |0>|g>,  "1" -> |g>|0>
    PHASE_RANDOMIZED = "pr"           # polarization of phase-randomized pulses


def _encoded_pair(kind: EncodingKind, amplitude: CoherentAmplitude):
    if kind is EncodingKind.DPS_LIKE:
        return (amplitude, amplitude), (amplitude, -amplitude)
    return (VACUUM, amplitude), (amplitude, VACUUM)


def natural_loss_info_bound(kind: EncodingKind, fiber: FiberSpec,
                            segment_km: float, intensity: float) -> float:
    """Bits per pulse extractable from the light scattered along `segment_km`."""
    intensity = as_nonnegative(intensity, 'intensity')
    r_l = natural_scatter_fraction(fiber, segment_km)
    if kind is EncodingKind.PHASE_RANDOMIZED:
        return float(nonvacuum_prob(r_l * intensity))

    scattered = CoherentAmplitude.from_intensity(r_l * intensity)
    state_0, state_1 = _encoded_pair(kind, scattered)
    return float(holevo_two_pure(multimode_overlap_mag(state_0, state_1)))


def natural_loss_curve(kind: EncodingKind, fiber: FiberSpec,
                       l_grid: Sequence[float], intensity: float) -> List[Tuple[float, float]]:
    """Evaluate the bound at every segment length of a strictly increasing grid."""
    grid = np.asarray(l_grid, dtype=float)
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise DomainError('segment grid must be strictly increasing')
    return [
        (float(l), natural_loss_info_bound(kind, fiber, l, intensity))
        for l in grid
    ]


def threshold_length(kind: EncodingKind, fiber: FiberSpec, intensity: float,
                     threshold: float = DEFAULT_THRESHOLD_BITS,
                     l_max: Optional[float] = None) -> Optional[float]:
    """
    Smallest segment length whose bound exceeds `threshold` bits.

    Returns None when the bound stays below the threshold up to `l_max`
    (defaults to the fiber length, which must then be finite).
    """
    l_max = fiber.length_km if l_max is None else l_max
    if l_max is None:
        raise DomainError('threshold search needs l_max or a fiber of finite length')

    def excess(l: float) -> float:
        return natural_loss_info_bound(kind, fiber, l, intensity) - threshold

    if excess(0.0) > 0:
        return 0.0
    if l_max <= 0 or excess(l_max) <= 0:
        logger.debug(f'{kind.name}: bound stays below {threshold} bit up to {l_max} km')
        return None
    return float(brentq(excess, 0.0, l_max, xtol=1e-9))
