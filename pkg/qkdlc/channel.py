"""
Optical-fiber channel model: attenuation law, natural scattering per segment,
and the composition of artificial local leaks into an effective transmittance.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

import numpy as np

from .exceptions import DomainError
from .quantum_info import ArrayLike, as_nonnegative

logger = logging.getLogger(__name__)

DEFAULT_XI_PER_KM = 0.02

LN10 = math.log(10.0)


@dataclass(frozen=True)
class FiberSpec:
    """
    Fiber with power transmittance 10^(-xi * length).

    `length_km` of None leaves the line unbounded: any distance or segment is
    accepted. Channels and reflectograms need a finite length.
    """
    attenuation_xi: float = DEFAULT_XI_PER_KM
    length_km: Optional[float] = None

    def __post_init__(self):
        if not self.attenuation_xi > 0:
            raise DomainError(f'attenuation_xi must be positive, got {self.attenuation_xi!r}')
        if self.length_km is not None and not self.length_km >= 0:
            raise DomainError(f'length_km must be non-negative, got {self.length_km!r}')

    @property
    def loss_db_per_km(self) -> float:
        return 10.0 * self.attenuation_xi


@dataclass(frozen=True)
class LocalLeak:
    """Lumped loss diverting `magnitude` of the passing signal at `position_km`."""
    position_km: float
    magnitude: float
    benign: bool = False

    def __post_init__(self):
        if not self.position_km >= 0:
            raise DomainError(f'leak position must be non-negative, got {self.position_km!r}')
        if not 0.0 <= self.magnitude < 1.0:
            raise DomainError(f'leak magnitude must lie in [0, 1), got {self.magnitude!r}')

    @property
    def survival(self) -> float:
        return 1.0 - self.magnitude

    @property
    def one_way_db(self) -> float:
        """Step height of this leak in dB for a single pass."""
        return -10.0 * math.log10(self.survival)


def _merge_leaks(leaks: Iterable[LocalLeak], length_km: float) -> Tuple[LocalLeak, ...]:
    by_position = {}
    for leak in leaks:
        if leak.position_km > length_km:
            raise DomainError(
                f'leak at {leak.position_km} km lies beyond the fiber end ({length_km} km)'
            )
        previous = by_position.get(leak.position_km)
        if previous is None:
            by_position[leak.position_km] = leak
            continue
        # Two taps at one point act as a single beamsplitter cascade
        merged = 1.0 - previous.survival * leak.survival
        logger.debug(f'Merging leaks at {leak.position_km} km into magnitude {merged}')
        by_position[leak.position_km] = LocalLeak(
            leak.position_km, merged, benign=previous.benign and leak.benign
        )
    return tuple(by_position[position] for position in sorted(by_position))


@dataclass(frozen=True)
class ChannelState:
    """A fiber together with its sorted, position-unique list of local leaks."""
    fiber: FiberSpec
    leaks: Tuple[LocalLeak, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.fiber.length_km is None:
            raise DomainError('a channel needs a fiber of finite length')
        object.__setattr__(self, 'leaks', _merge_leaks(self.leaks, self.fiber.length_km))

    @property
    def artificial_leaks(self) -> List[LocalLeak]:
        return [leak for leak in self.leaks if not leak.benign]

    @property
    def benign_leaks(self) -> List[LocalLeak]:
        return [leak for leak in self.leaks if leak.benign]


def transmittance(fiber: FiberSpec, distance_km) -> ArrayLike:
    """T = 10^(-xi * D)."""
    distance_km = as_nonnegative(distance_km, 'distance_km')
    value = np.power(10.0, -fiber.attenuation_xi * np.asarray(distance_km, dtype=float))
    return float(value) if np.ndim(value) == 0 else value


def natural_scatter_fraction(fiber: FiberSpec, segment_km) -> ArrayLike:
    """r_l = 1 - 10^(-xi * l), the Rayleigh-scattered share of a segment."""
    segment_km = as_nonnegative(segment_km, 'segment_km')
    if fiber.length_km is not None and np.any(np.asarray(segment_km) > fiber.length_km):
        raise DomainError(
            f'segment of {segment_km} km exceeds the fiber length {fiber.length_km} km'
        )
    value = -np.expm1(-fiber.attenuation_xi * LN10 * np.asarray(segment_km, dtype=float))
    return float(value) if np.ndim(value) == 0 else value


def leak_survival(channel: ChannelState) -> float:
    """Product of (1 - m_i) over every leak on the line."""
    log_survival = math.fsum(math.log1p(-leak.magnitude) for leak in channel.leaks)
    return math.exp(log_survival)


def total_artificial_leak(channel: ChannelState) -> float:
    """r_E = 1 - prod(1 - m_i); benign connector/bend losses are included."""
    log_survival = math.fsum(math.log1p(-leak.magnitude) for leak in channel.leaks)
    return -math.expm1(log_survival)


def effective_transmittance(channel: ChannelState) -> float:
    """Natural transmittance of the whole line times the survival through every leak."""
    return transmittance(channel.fiber, channel.fiber.length_km) * leak_survival(channel)
