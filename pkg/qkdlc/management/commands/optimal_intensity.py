"""
Management command to tabulate the rate-maximising intensity against distance
"""
from qkdlc.management.base import QkdCommand
from qkdlc.optimizer import optimal_intensity_curve, optimal_intensity_frame
from qkdlc.rate_functions.params import FormulaId
from qkdlc.serializers import OptimalIntensitySerializer
from qkdlc.utilities import frame_to_csv, to_json


class Command(QkdCommand):
    help = 'Optimal signal intensity and the rate it achieves at every distance'
    serializer_class = OptimalIntensitySerializer

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--formula',
            choices=[f.value for f in FormulaId if f is not FormulaId.PLOB],
            help='Rate formula to maximise'
        )
        parser.add_argument('--re', type=float, help='Artificial leak r_E (default 0)')
        parser.add_argument('--d', type=str, help='Distance range lo:hi:step in km (default 50:250:1)')
        parser.add_argument('--perr', type=float, help='Error probability')
        parser.add_argument('--perr-z', type=float, help='BB84 z-basis error probability')

    def run(self, serializer, params):
        formula_id = FormulaId(params['formula'])
        curve = optimal_intensity_curve(formula_id, params['d'], params['re'],
                                        serializer.error_params, serializer.fiber, strict=True)
        frame = optimal_intensity_frame(curve)
        if params['format'] == 'json':
            text = to_json({'formula_id': formula_id.value, 'r_E': params['re'],
                            'curve': frame.to_dict(orient='records')})
        else:
            text = frame_to_csv(frame)
        self.emit(text, params['output'])
