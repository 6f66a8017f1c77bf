"""
Management command to validate the closed-form rates by pulse-level simulation
"""
import math

from qkdlc.management.base import QkdCommand
from qkdlc.montecarlo import SimConfig, compare_to_analytic, simulate, tap_goodness_of_fit
from qkdlc.serializers import PROTOCOL_CHOICES, MonteCarloSerializer
from qkdlc.utilities import to_json


class Command(QkdCommand):
    help = 'Simulate pulses under the local-leak attack and compare the tallies with the closed forms'
    serializer_class = MonteCarloSerializer

    def add_command_arguments(self, parser):
        parser.add_argument('--protocol', choices=PROTOCOL_CHOICES, help='Protocol family')
        parser.add_argument('--mu', type=float, help='Signal intensity (mean photons per pulse)')
        parser.add_argument('--d', type=float, help='Distance in km')
        parser.add_argument('--re', type=float, help='Artificial leak r_E (default 0)')
        parser.add_argument('--n', type=int, help='Number of pulses')
        parser.add_argument('--seed', type=int, help='RNG seed (default 0)')

    def run(self, serializer, params):
        cfg = SimConfig(
            protocol=params['protocol'],
            intensity_mu=params['mu'],
            distance_km=params['d'],
            r_E=params['re'],
            n_pulses=params['n'],
            seed=params['seed'],
            xi=params['xi'],
        )
        outcome = simulate(cfg)
        report = compare_to_analytic(outcome, cfg)
        fit = tap_goodness_of_fit(outcome, cfg)

        document = {
            'config': cfg.to_dict(),
            'outcome': outcome.to_dict(),
            'comparisons': [comparison.to_dict() for comparison in report.comparisons],
            'tap_goodness_of_fit': {
                'statistic': fit.statistic if math.isfinite(fit.statistic) else None,
                'p_value': fit.p_value,
                'bins': fit.bins,
                'passed': fit.passed,
            },
            'passed': report.passed,
        }
        self.emit(to_json(document), params['output'])

        for comparison in report.comparisons:
            style = self.style.SUCCESS if abs(comparison.z) <= report.z_limit else self.style.ERROR
            self.stderr.write(style(
                f'{comparison.name}: empirical {comparison.empirical:.6g}, '
                f'analytic {comparison.analytic:.6g}, z = {comparison.z:.3g}'
            ))
        report.check()
