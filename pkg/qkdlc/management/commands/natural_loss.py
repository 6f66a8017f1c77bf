"""
Management command to tabulate the information extractable from natural losses
"""
import pandas as pd

from qkdlc.channel import FiberSpec
from qkdlc.management.base import QkdCommand
from qkdlc.natural_loss import EncodingKind, natural_loss_curve, threshold_length
from qkdlc.serializers import NaturalLossSerializer
from qkdlc.utilities import frame_to_csv, to_json

COLUMNS = {
    EncodingKind.DPS_LIKE: 'dps_bound',
    EncodingKind.COW_LIKE: 'cow_bound',
    EncodingKind.PHASE_RANDOMIZED: 'pr_bound',
}


class Command(QkdCommand):
    help = 'Bits per pulse an eavesdropper can extract from light scattered along a segment of length l'
    serializer_class = NaturalLossSerializer

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--mu',
            type=float,
            help='Signal intensity (default 100 photons per pulse)'
        )
        parser.add_argument(
            '--l',
            type=str,
            help='Segment-length grid lo:hi:step in km (default 0:1:0.01)'
        )
        parser.add_argument(
            '--threshold',
            type=float,
            help='Report the smallest l whose bound exceeds this many bits (default 0.5)'
        )
        parser.add_argument(
            '--fiber-length',
            type=float,
            help='Fiber length in km (default: the largest l of the grid)'
        )

    def run(self, serializer, params):
        grid = params['l']
        length = params['fiber_length'] if params['fiber_length'] is not None else max(grid)
        fiber = FiberSpec(params['xi'], length)

        frame = pd.DataFrame({'l_km': grid})
        for kind, column in COLUMNS.items():
            frame[column] = [bound for _, bound in natural_loss_curve(kind, fiber, grid, params['mu'])]

        thresholds = {}
        if params['threshold'] is not None:
            for kind, column in COLUMNS.items():
                thresholds[column] = threshold_length(kind, fiber, params['mu'], params['threshold'])
                found = thresholds[column]
                message = (f'{column}: exceeds {params["threshold"]} bit at l = {found:.6g} km'
                           if found is not None else
                           f'{column}: stays below {params["threshold"]} bit up to {fiber.length_km} km')
                self.stderr.write(message)

        if params['format'] == 'json':
            text = to_json({
                'mu': params['mu'],
                'threshold': params['threshold'],
                'threshold_length_km': thresholds,
                'curve': frame.to_dict(orient='records'),
            })
        else:
            text = frame_to_csv(frame)
        self.emit(text, params['output'])
