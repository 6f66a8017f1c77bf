"""
Pulse-level simulation of BB84 and COW under the local-leak attack.

Eve's tap and Bob's detector receive independent Poisson photon numbers
(beamsplitter thinning of a coherent state). Pulses are processed in fixed-size
blocks; block i draws from a generator seeded with (seed, i), so the tallies do
not depend on how many workers run the blocks.
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from scipy.stats import chisquare, poisson

from .channel import DEFAULT_XI_PER_KM, FiberSpec, transmittance
from .exceptions import DomainError, OutcomeMismatchError, ParameterValidationError, StatisticalValidationError
from .quantum_info import as_nonnegative, as_probability, nonvacuum_prob
from .rate_functions.bb84_functions import bb84_conclusive_prob
from .rate_functions.cow_functions import cow_conclusive_prob
from .rate_functions.params import BB84Params, COWParams, Protocol
from .utilities import get_tunable, parallel_map

logger = logging.getLogger(__name__)

DEFAULT_BLOCK_SIZE = 65536
DEFAULT_Z_LIMIT = 4.0
GOODNESS_OF_FIT_ALPHA = 0.01
MIN_EXPECTED_PER_BIN = 5.0


@dataclass(frozen=True)
class SimConfig:
    protocol: Protocol
    intensity_mu: float
    distance_km: float
    r_E: float
    n_pulses: int
    seed: int = 0
    xi: float = DEFAULT_XI_PER_KM

    def __post_init__(self):
        try:
            object.__setattr__(self, 'protocol', Protocol(self.protocol))
            object.__setattr__(self, 'intensity_mu', as_nonnegative(self.intensity_mu, 'intensity_mu'))
            object.__setattr__(self, 'distance_km', as_nonnegative(self.distance_km, 'distance_km'))
            object.__setattr__(self, 'r_E', as_probability(self.r_E, 'r_E'))
            FiberSpec(self.xi)
        except (DomainError, ValueError) as e:
            raise ParameterValidationError(f'invalid simulation config: {e}') from e
        if int(self.n_pulses) != self.n_pulses or self.n_pulses < 1:
            raise ParameterValidationError(f'n_pulses must be a positive integer, got {self.n_pulses!r}')
        object.__setattr__(self, 'n_pulses', int(self.n_pulses))

    @property
    def transmittance(self) -> float:
        return transmittance(FiberSpec(self.xi), self.distance_km)

    @property
    def tap_mean(self) -> float:
        return self.r_E * self.intensity_mu

    @property
    def bob_mean(self) -> float:
        return self.transmittance * (1.0 - self.r_E) * self.intensity_mu

    def to_dict(self) -> Dict[str, Any]:
        document = asdict(self)
        document['protocol'] = self.protocol.value
        return document


@dataclass(frozen=True)
class SimOutcome:
    """Tallies of one run; COW has no basis sifting, so sifted equals conclusive."""
    conclusive_count: int
    sifted_count: int
    eve_tap_count: int
    n_pulses: int
    seed: int
    tap_histogram: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class Comparison:
    name: str
    empirical: float
    analytic: float
    z: float

    def to_dict(self) -> Dict[str, Any]:
        return {'name': self.name, 'empirical': self.empirical, 'analytic': self.analytic,
                'z': self.z if math.isfinite(self.z) else None}


@dataclass(frozen=True)
class ValidationReport:
    comparisons: List[Comparison]
    z_limit: float = DEFAULT_Z_LIMIT

    @property
    def failures(self) -> List[Comparison]:
        return [c for c in self.comparisons if not abs(c.z) <= self.z_limit]

    @property
    def passed(self) -> bool:
        return not self.failures

    def check(self):
        """Raise StatisticalValidationError when any |z| exceeds the limit."""
        if self.failures:
            names = ', '.join(f'{c.name} (z={c.z:.3g})' for c in self.failures)
            raise StatisticalValidationError(f'Monte Carlo disagrees with closed form: {names}')


@dataclass(frozen=True)
class GoodnessOfFit:
    statistic: float
    p_value: float
    bins: int
    passed: bool


def _block_sizes(n_pulses: int, block_size: int) -> List[int]:
    full, remainder = divmod(n_pulses, block_size)
    return [block_size] * full + ([remainder] if remainder else [])


def simulate(cfg: SimConfig, block_size: Optional[int] = None) -> SimOutcome:
    """Draw every pulse of `cfg` and tally Bob's clicks, sifting and Eve's taps."""
    if block_size is None:
        block_size = get_tunable('QKDLC_MONTECARLO', 'BLOCK_SIZE', DEFAULT_BLOCK_SIZE)
    sizes = _block_sizes(cfg.n_pulses, int(block_size))
    tap_mean, bob_mean = cfg.tap_mean, cfg.bob_mean

    def run_block(index: int) -> Dict[str, Any]:
        rng = np.random.default_rng([cfg.seed, index])
        size = sizes[index]
        taps = rng.poisson(tap_mean, size)
        clicks = rng.poisson(bob_mean, size) >= 1
        if cfg.protocol is Protocol.BB84:
            sifted = clicks & (rng.random(size) < 0.5)
        else:
            sifted = clicks
        return {
            'conclusive': int(np.count_nonzero(clicks)),
            'sifted': int(np.count_nonzero(sifted)),
            'taps': int(np.count_nonzero(taps)),
            'histogram': np.bincount(taps),
        }

    blocks = parallel_map(run_block, range(len(sizes)))
    width = max(block['histogram'].size for block in blocks)
    histogram = np.zeros(width, dtype=np.int64)
    for block in blocks:
        histogram[:block['histogram'].size] += block['histogram']

    outcome = SimOutcome(
        conclusive_count=sum(block['conclusive'] for block in blocks),
        sifted_count=sum(block['sifted'] for block in blocks),
        eve_tap_count=sum(block['taps'] for block in blocks),
        n_pulses=cfg.n_pulses,
        seed=cfg.seed,
        tap_histogram=[int(count) for count in histogram],
    )
    logger.info(f'Simulated {cfg.n_pulses} {cfg.protocol.value} pulses in {len(sizes)} blocks')
    return outcome


def _z_score(successes: int, trials: int, p: float) -> float:
    empirical = successes / trials
    if p <= 0.0 or p >= 1.0:
        return 0.0 if empirical == p else math.inf
    return (empirical - p) / math.sqrt(p * (1.0 - p) / trials)


def _comparison(name: str, successes: int, trials: int, p: float) -> Comparison:
    p = float(p)
    return Comparison(name, successes / trials, p, _z_score(successes, trials, p))


def _check_outcome(outcome: SimOutcome, cfg: SimConfig):
    if outcome.n_pulses != cfg.n_pulses or outcome.seed != cfg.seed:
        raise OutcomeMismatchError(
            f'outcome of {outcome.n_pulses} pulses / seed {outcome.seed} does not belong to '
            f'config of {cfg.n_pulses} pulses / seed {cfg.seed}'
        )
    counts = (outcome.conclusive_count, outcome.sifted_count, outcome.eve_tap_count)
    if any(count < 0 or count > outcome.n_pulses for count in counts):
        raise OutcomeMismatchError('counts must lie between 0 and n_pulses')
    if outcome.sifted_count > outcome.conclusive_count:
        raise OutcomeMismatchError('sifted count exceeds conclusive count')
    if cfg.protocol is Protocol.COW and outcome.sifted_count != outcome.conclusive_count:
        raise OutcomeMismatchError('COW outcomes have no sifting')


def compare_to_analytic(outcome: SimOutcome, cfg: SimConfig,
                        z_limit: Optional[float] = None) -> ValidationReport:
    """
    Binomial z-scores of the simulated frequencies against their closed forms:
    detector clicks, conclusive results (sifted for BB84), Eve's tap clicks,
    and for BB84 the sifted share of clicks.
    """
    if z_limit is None:
        z_limit = get_tunable('QKDLC_MONTECARLO', 'Z_LIMIT', DEFAULT_Z_LIMIT)
    _check_outcome(outcome, cfg)
    n = outcome.n_pulses
    T = cfg.transmittance

    comparisons = [_comparison('detector_click', outcome.conclusive_count, n, nonvacuum_prob(cfg.bob_mean))]
    if cfg.protocol is Protocol.BB84:
        p_conclusive = bb84_conclusive_prob(BB84Params(cfg.intensity_mu, cfg.r_E), T)
        comparisons.append(_comparison('conclusive', outcome.sifted_count, n, p_conclusive))
    else:
        p_conclusive = cow_conclusive_prob(COWParams(cfg.intensity_mu, cfg.r_E), T)
        comparisons.append(_comparison('conclusive', outcome.conclusive_count, n, p_conclusive))
    comparisons.append(_comparison('eve_tap', outcome.eve_tap_count, n, nonvacuum_prob(cfg.tap_mean)))
    if cfg.protocol is Protocol.BB84 and outcome.conclusive_count > 0:
        comparisons.append(_comparison('sifting_ratio', outcome.sifted_count, outcome.conclusive_count, 0.5))

    report = ValidationReport(comparisons, float(z_limit))
    for failure in report.failures:
        logger.warning(f'{failure.name}: empirical {failure.empirical} vs analytic {failure.analytic}, z={failure.z}')
    return report


def tap_goodness_of_fit(outcome: SimOutcome, cfg: SimConfig,
                        alpha: float = GOODNESS_OF_FIT_ALPHA) -> GoodnessOfFit:
    """
    Chi-square test of Eve's tap photon numbers against Poisson(r_E mu).
    Bins expected to hold fewer than five pulses are pooled into the tails.
    """
    _check_outcome(outcome, cfg)
    n = outcome.n_pulses
    mean = cfg.tap_mean
    observed = np.asarray(outcome.tap_histogram, dtype=float)
    if mean == 0:
        passed = observed.size <= 1
        return GoodnessOfFit(0.0 if passed else math.inf, 1.0 if passed else 0.0, 1, passed)

    k_max = max(observed.size - 1, int(poisson.ppf(1.0 - 1e-12, mean)))
    observed = np.pad(observed, (0, k_max + 1 - observed.size))
    expected = n * poisson.pmf(np.arange(k_max + 1), mean)
    expected[-1] += n * poisson.sf(k_max, mean)

    eligible = np.flatnonzero(expected >= MIN_EXPECTED_PER_BIN)
    if eligible.size < 2:
        return GoodnessOfFit(0.0, 1.0, 1, True)
    first, last = eligible[0], eligible[-1]
    pooled_observed = np.concatenate(([observed[:first + 1].sum()], observed[first + 1:last], [observed[last:].sum()]))
    pooled_expected = np.concatenate(([expected[:first + 1].sum()], expected[first + 1:last], [expected[last:].sum()]))
    # Renormalise away float drift so both totals equal n
    pooled_expected *= pooled_observed.sum() / pooled_expected.sum()

    statistic, p_value = chisquare(pooled_observed, pooled_expected)
    return GoodnessOfFit(float(statistic), float(p_value), int(pooled_observed.size), bool(p_value >= alpha))
