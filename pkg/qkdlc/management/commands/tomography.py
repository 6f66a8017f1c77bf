"""
Management command for the line-tomography round trip
"""
import json

from django.core.management.base import CommandError

from qkdlc.channel import effective_transmittance, total_artificial_leak, transmittance
from qkdlc.management.base import EXIT_USAGE, QkdCommand
from qkdlc.serializers import ChannelStateSerializer, TomogramSerializer, TomographySerializer
from qkdlc.tomography import (
    TransmittometryConfig, compare_leaks, detection_accuracy, fit_tomogram,
    naive_rms_estimate, synth_reflectogram, transmittometry_estimate,
)
from qkdlc.utilities import atomic_write, frame_to_csv, to_json


class Command(QkdCommand):
    help = ('Synthesize a reflectogram for a channel, fit its loss tomogram, estimate the total '
            'leak by modulated transmittometry and optionally calibrate the detection accuracy')
    serializer_class = TomographySerializer

    def add_command_arguments(self, parser):
        parser.add_argument('--channel', type=str, help='Channel JSON document (fiber and leaks)')
        parser.add_argument('--trace', type=str, help='Also write the synthesized reflectogram CSV here')
        parser.add_argument('--resolution', type=float, help='Reflectogram bin width in km (default 0.05)')
        parser.add_argument('--noise-sigma', type=float, help='Single-trace noise std in dB (default 0)')
        parser.add_argument('--n-averages', type=int, help='Number of averaged traces (default 1)')
        parser.add_argument('--seed', type=int, help='RNG seed (default 0)')
        parser.add_argument('--min-leak', type=float, help='Smallest leak magnitude reported (default 1e-3)')
        parser.add_argument('--accuracy', action='store_true', help='Run the detection-accuracy bisection')
        parser.add_argument('--confidence', type=float, help='Required recovery rate for --accuracy (default 0.95)')
        parser.add_argument('--trials', type=int, help='Trials per accuracy probe (default 200)')
        parser.add_argument('--mod-freq', type=float, help='Transmittometry modulation frequency in Hz (default 1e6)')
        parser.add_argument('--sample-rate', type=float, help='Transmittometry sample rate in Hz (default 16e6)')
        parser.add_argument('--duration', type=float, help='Transmittometry window in s (default 1e-3)')
        parser.add_argument('--one-over-f', type=float, help='1/f noise amplitude relative to the tone (default 0)')
        parser.add_argument('--white-noise', type=float, help='White noise std relative to the tone (default 0)')

    def _load_channel(self, path: str):
        try:
            with open(path, 'r') as f:
                document = json.load(f)
        except FileNotFoundError:
            raise CommandError(f'Channel file not found: {path}', returncode=EXIT_USAGE)
        except json.JSONDecodeError:
            raise CommandError(f'Invalid JSON in channel file: {path}', returncode=EXIT_USAGE)
        serializer = ChannelStateSerializer(data=document)
        if not serializer.is_valid():
            raise CommandError(f'Invalid channel: {json.dumps(serializer.errors)}', returncode=EXIT_USAGE)
        return serializer.save()

    def run(self, serializer, params):
        channel = self._load_channel(params['channel'])

        trace = synth_reflectogram(channel, params['resolution'], params['noise_sigma'],
                                   params['n_averages'], params['seed'])
        if params['trace']:
            atomic_write(params['trace'], frame_to_csv(trace.to_frame()))
        tomogram = fit_tomogram(trace, params['min_leak'])

        cfg = TransmittometryConfig(
            mod_freq_hz=params['mod_freq'],
            sample_rate_hz=params['sample_rate'],
            duration_s=params['duration'],
            one_over_f_amp=params['one_over_f'],
            white_noise_amp=params['white_noise'],
            seed=params['seed'],
        )
        natural_T = transmittance(channel.fiber, channel.fiber.length_km)
        effective_T = effective_transmittance(channel)

        report = {
            'channel': ChannelStateSerializer(channel).data,
            'tomogram': TomogramSerializer(tomogram).data,
            'leaks': compare_leaks(channel.leaks, tomogram.leaks),
            'total_leak': {
                'injected': total_artificial_leak(channel),
                'tomogram': tomogram.total_leak,
                'transmittometry': transmittometry_estimate(cfg, effective_T, natural_T),
                'transmittometry_naive': naive_rms_estimate(cfg, effective_T, natural_T),
            },
            'accuracy': None,
        }

        if params['accuracy']:
            accuracy = detection_accuracy(
                params['noise_sigma'], params['n_averages'], params['resolution'],
                params['confidence'], params['trials'], params['seed'], params['min_leak'],
                fiber_length_km=channel.fiber.length_km, xi=channel.fiber.attenuation_xi,
            )
            report['accuracy'] = accuracy.to_dict()
            self.stderr.write(self.style.SUCCESS(
                f'Detectable leak magnitude {accuracy.magnitude:.4g} '
                f'(success {accuracy.success_rate:.3f}, CI [{accuracy.ci_low:.3f}, {accuracy.ci_high:.3f}])'
            ))

        self.emit(to_json(report), params['output'])
        self.stderr.write(self.style.SUCCESS(
            f'Recovered {len(tomogram.leaks)} of {len(channel.leaks)} leaks'
        ))
