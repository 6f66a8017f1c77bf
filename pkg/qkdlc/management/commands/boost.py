"""
Management command reporting how far loss control lifts a protocol at one distance
"""
from qkdlc.channel import transmittance
from qkdlc.management.base import QkdCommand
from qkdlc.optimizer import boost_factor, dashed_gain, plob_crossover
from qkdlc.rate_functions.bound_functions import plob_bound
from qkdlc.rate_functions.params import ENHANCED_FORMULA, Protocol
from qkdlc.serializers import PROTOCOL_CHOICES, BoostSerializer
from qkdlc.utilities import to_json


class Command(QkdCommand):
    help = 'Boost factor, gain at the original intensity, PLOB comparison and PLOB crossover distance'
    serializer_class = BoostSerializer

    def add_command_arguments(self, parser):
        parser.add_argument('--protocol', choices=PROTOCOL_CHOICES, help='Protocol family')
        parser.add_argument('--d', type=float, help='Distance in km (default 200)')
        parser.add_argument('--re', type=float, help='Artificial leak r_E')
        parser.add_argument('--perr', type=float, help='Error probability')
        parser.add_argument('--perr-z', type=float, help='BB84 z-basis error probability')
        parser.add_argument('--d-lo', type=float, help='Crossover search start in km (default 50)')
        parser.add_argument('--d-hi', type=float, help='Crossover search end in km (default 250)')

    def run(self, serializer, params):
        protocol = Protocol(params['protocol'])
        errors, fiber = serializer.error_params, serializer.fiber
        report = boost_factor(protocol, params['d'], params['re'], errors, fiber, strict=True)
        gain = dashed_gain(protocol, params['d'], params['re'], errors, fiber)
        plob = plob_bound(transmittance(fiber, params['d']))
        crossover = plob_crossover(ENHANCED_FORMULA[protocol], params['re'], errors,
                                   params['d_lo'], params['d_hi'], fiber)

        document = report.to_dict()
        document.update({
            'dashed_gain': gain if gain != float('inf') else None,
            'plob_rate': plob,
            'exceeds_plob': report.enhanced.optimal_rate > plob,
            'plob_crossover_km': crossover,
        })
        self.emit(to_json(document), params['output'])

        if report.unbounded:
            self.stderr.write(self.style.WARNING('Original bound vanishes here: boost is unbounded'))
        else:
            self.stderr.write(self.style.SUCCESS(f'{protocol.value} boost at {params["d"]} km: {report.factor:.4g}'))
