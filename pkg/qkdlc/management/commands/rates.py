"""
Management command to tabulate key rates against distance
"""
import pandas as pd

from qkdlc.management.base import QkdCommand
from qkdlc.optimizer import rate_curves
from qkdlc.rate_functions.params import RATE_CURVE_COLUMNS, Protocol
from qkdlc.serializers import PROTOCOL_CHOICES, RatesSerializer
from qkdlc.utilities import atomic_write, frame_to_csv, to_json

# Series that do not depend on r_E are written once
SHARED_SERIES = ('original', 'plob')


class Command(QkdCommand):
    help = ('Key rate against distance: loss-controlled (optimised or fixed mu), '
            'loss-controlled at the original intensity, original upper bound and PLOB')
    serializer_class = RatesSerializer

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--protocol',
            choices=PROTOCOL_CHOICES,
            help='Protocol family'
        )
        parser.add_argument(
            '--re',
            type=float,
            nargs='+',
            help='One or more artificial leak levels r_E'
        )
        parser.add_argument(
            '--d',
            type=str,
            help='Distance range lo:hi:step in km (default 50:250:1)'
        )
        parser.add_argument(
            '--perr',
            type=float,
            help='Error probability (BB84: x basis, and z basis unless --perr-z)'
        )
        parser.add_argument(
            '--perr-z',
            type=float,
            help='BB84 z-basis error probability'
        )
        intensity = parser.add_mutually_exclusive_group()
        intensity.add_argument(
            '--mu',
            type=float,
            help='Fixed signal intensity (mean photons per pulse)'
        )
        intensity.add_argument(
            '--optimize-intensity',
            action='store_true',
            help='Optimise the intensity at every distance (the default without --mu)'
        )

    def run(self, serializer, params):
        protocol = Protocol(params['protocol'])
        families = [
            (r_E, rate_curves(protocol, params['d'], r_E, serializer.error_params,
                              params['mu'], serializer.fiber))
            for r_E in params['re']
        ]

        directory = self.output_dir(params['output'])
        if directory is None:
            self.emit(self._combined(families, params['format']))
        else:
            self._write_files(directory, protocol, families, params['format'])

        self.stderr.write(self.style.SUCCESS(
            f'{protocol.value}: {len(families)} leak level(s) x {len(params["d"])} distances'
        ))

    @staticmethod
    def _combined(families, fmt: str) -> str:
        if fmt == 'json':
            return to_json([curve.to_dict() for _, family in families for curve in family.values()])
        frames = []
        for r_E, family in families:
            for series, curve in family.items():
                frame = curve.to_frame()
                frame.insert(0, 'r_E', r_E)
                frame.insert(0, 'series', series)
                frames.append(frame)
        return frame_to_csv(pd.concat(frames, ignore_index=True)[['series', 'r_E'] + RATE_CURVE_COLUMNS])

    def _write_files(self, directory, protocol: Protocol, families, fmt: str):
        for index, (r_E, family) in enumerate(families):
            for series, curve in family.items():
                if series in SHARED_SERIES:
                    if index > 0:
                        continue
                    name = f'{protocol.value}_{series}.{fmt}'
                else:
                    name = f'{protocol.value}_{series}_rE{r_E:g}.{fmt}'
                text = to_json(curve.to_dict()) if fmt == 'json' else frame_to_csv(curve.to_frame())
                atomic_write(directory / name, text)
                self.stderr.write(f'Wrote {directory / name}')
