"""
Management command to tabulate optimised key rates against the error probability
"""
from qkdlc.management.base import QkdCommand
from qkdlc.optimizer import error_ratio_report, error_sweep
from qkdlc.rate_functions.params import Protocol
from qkdlc.serializers import PROTOCOL_CHOICES, ErrorSweepSerializer
from qkdlc.utilities import frame_to_csv, to_json


class Command(QkdCommand):
    help = 'Optimised key rate against error probability at one distance, one column per r_E'
    serializer_class = ErrorSweepSerializer

    def add_command_arguments(self, parser):
        parser.add_argument('--protocol', choices=PROTOCOL_CHOICES, help='Protocol family (default bb84)')
        parser.add_argument('--d', type=float, help='Distance in km (default 200)')
        parser.add_argument('--re', type=float, nargs='+', help='Artificial leak levels (default 0.005 0.01 0.1)')
        parser.add_argument('--perr', type=str, help='Error grid lo:hi:step (default 0:0.5:0.01)')

    def run(self, serializer, params):
        protocol = Protocol(params['protocol'])
        frame = error_sweep(params['d'], params['re'], params['perr'], protocol, serializer.fiber)
        if params['format'] == 'json':
            ratios = [
                error_ratio_report(params['d'], r_E, p_err, protocol, serializer.fiber)
                for r_E in params['re'] for p_err in params['perr'] if p_err > 0
            ]
            text = to_json({'distance_km': params['d'], 'sweep': frame.to_dict(orient='records'),
                            'ratios': ratios})
        else:
            text = frame_to_csv(frame)
        self.emit(text, params['output'])
