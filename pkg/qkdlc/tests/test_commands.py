import json
import math
import tempfile
from contextlib import redirect_stdout
from io import StringIO
from pathlib import Path

import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from qkdlc.channel import FiberSpec, transmittance
from qkdlc.utilities import frame_to_csv, read_csv, to_json


def run(name, *args, **options):
    out, err = StringIO(), StringIO()
    call_command(name, *args, stdout=out, stderr=err, **options)
    return out.getvalue(), err.getvalue()


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def assertExitCode(self, code, name, **options):
        with self.assertRaises(CommandError) as cm:
            run(name, **options)
        self.assertEqual(cm.exception.returncode, code)

    def write_json(self, name, document):
        path = self.tmp / name
        path.write_text(json.dumps(document))
        return str(path)


class HelpTests(SimpleTestCase):
    def test_every_command_documents_its_flags(self):
        expected = {
            'rates': ['--protocol', '--re', '--d', '--mu', '--optimize-intensity', '--perr', '--config'],
            'natural_loss': ['--mu', '--l', '--threshold', '--output', '--format'],
            'tomography': ['--channel', '--noise-sigma', '--n-averages', '--accuracy', '--trace'],
            'montecarlo': ['--protocol', '--mu', '--d', '--re', '--n', '--seed'],
            'optimal_intensity': ['--formula', '--re', '--d'],
            'error_sweep': ['--protocol', '--d', '--re', '--perr'],
            'boost': ['--protocol', '--d', '--re', '--d-lo', '--d-hi'],
        }
        for name, flags in expected.items():
            buffer = StringIO()
            with redirect_stdout(buffer), self.assertRaises(SystemExit) as cm:
                call_command(name, '--help')
            self.assertEqual(cm.exception.code, 0)
            for flag in flags:
                self.assertIn(flag, buffer.getvalue())


class RatesCommandTests(CommandTestCase):
    def test_combined_csv(self):
        out, _ = run('rates', protocol='bb84', re=[0.005], d='50:250:50', optimize_intensity=True)
        frame = pd.read_csv(StringIO(out))
        self.assertEqual(set(frame.series), {'enhanced', 'enhanced_original_mu', 'original', 'plob'})
        self.assertEqual(len(frame), 4 * 5)
        enhanced = frame[frame.series == 'enhanced']
        plob = frame[frame.series == 'plob']
        self.assertTrue((enhanced.clamped_rate.to_numpy() >= 0).all())
        self.assertGreater(enhanced.raw_rate.iloc[3], plob.raw_rate.iloc[3])

    def test_fixed_intensity_without_leak(self):
        out, _ = run('rates', protocol='bb84', re=[0.0], mu=1.0, perr=0.0, d='50:200:50')
        frame = pd.read_csv(StringIO(out), float_precision='round_trip')
        enhanced = frame[frame.series == 'enhanced']
        for row in enhanced.itertuples():
            T = transmittance(FiberSpec(), row.distance_km)
            self.assertAlmostEqual(row.raw_rate, 0.5 * -math.expm1(-T), places=15)

    def test_solid_dominates_dashed(self):
        out, _ = run('rates', protocol='cow', re=[0.1], d='50:250:100')
        frame = pd.read_csv(StringIO(out))
        solid = frame[frame.series == 'enhanced'].clamped_rate.to_numpy()
        dashed = frame[frame.series == 'enhanced_original_mu'].clamped_rate.to_numpy()
        self.assertTrue((solid >= dashed).all())

    def test_output_directory_round_trip(self):
        directory = self.tmp / 'curves'
        run('rates', protocol='cow', re=[0.005, 0.01], d='50:250:100', output=str(directory))
        names = sorted(path.name for path in directory.iterdir())
        self.assertEqual(names, [
            'cow_enhanced_original_mu_rE0.005.csv', 'cow_enhanced_original_mu_rE0.01.csv',
            'cow_enhanced_rE0.005.csv', 'cow_enhanced_rE0.01.csv',
            'cow_original.csv', 'cow_plob.csv',
        ])
        for path in directory.iterdir():
            self.assertEqual(frame_to_csv(read_csv(path)), path.read_text())

    def test_json_files_round_trip(self):
        directory = self.tmp / 'json'
        run('rates', protocol='bb84', re=[0.005], d='50:250:100', output=str(directory), format='json')
        paths = list(directory.iterdir())
        self.assertEqual(len(paths), 4)
        for path in paths:
            self.assertEqual(to_json(json.loads(path.read_text())), path.read_text())

    def test_fixed_intensity_keeps_original_series(self):
        out, _ = run('rates', protocol='bb84', re=[0.005], mu=50.0, d='200')
        frame = pd.read_csv(StringIO(out)).set_index('series')
        self.assertEqual(frame.loc['enhanced', 'intensity_mu'], 50.0)
        self.assertEqual(frame.loc['enhanced_original_mu', 'intensity_mu'], 1.0)
        self.assertAlmostEqual(frame.loc['original', 'intensity_mu'], 1.0, delta=1e-3)

    def test_json_output(self):
        out, _ = run('rates', protocol='bb84', re=[0.01], d='100', format='json')
        document = json.loads(out)
        self.assertEqual([curve['series'] for curve in document],
                         ['enhanced', 'enhanced_original_mu', 'original', 'plob'])

    def test_config_overrides_flags(self):
        config = self.write_json('config.json', {'re': [0.01], 'd': '100:200:100'})
        out, _ = run('rates', protocol='bb84', re=[0.005], config=config)
        frame = pd.read_csv(StringIO(out))
        self.assertEqual(set(frame.r_E), {0.01})
        self.assertEqual(sorted(set(frame.distance_km)), [100.0, 200.0])

    def test_usage_errors(self):
        self.assertExitCode(2, 'rates', protocol='xyz', re=[0.005])
        self.assertExitCode(2, 'rates', protocol='bb84', re=[0.005], mu=1.0, optimize_intensity=True)
        self.assertExitCode(2, 'rates', protocol='bb84', re=[1.5])
        self.assertExitCode(2, 'rates', protocol='bb84', re=[0.005], d='250:50:10')
        self.assertExitCode(2, 'rates', protocol='bb84', re=[0.005], config=str(self.tmp / 'missing.json'))


class NaturalLossCommandTests(CommandTestCase):
    def test_default_table(self):
        out, err = run('natural_loss')
        frame = pd.read_csv(StringIO(out))
        self.assertEqual(list(frame.columns), ['l_km', 'dps_bound', 'cow_bound', 'pr_bound'])
        self.assertEqual(len(frame), 101)
        self.assertTrue((frame.dps_bound >= frame.cow_bound - 1e-12).all())
        self.assertIn('exceeds 0.5 bit', err)

    def test_vacuum_signal(self):
        out, _ = run('natural_loss', mu=0.0, l='0:0.5:0.1')
        frame = pd.read_csv(StringIO(out))
        self.assertTrue((frame[['dps_bound', 'cow_bound', 'pr_bound']] == 0.0).all().all())

    def test_json(self):
        out, _ = run('natural_loss', l='0:0.2:0.1', format='json')
        document = json.loads(out)
        self.assertEqual(len(document['curve']), 3)
        self.assertEqual(set(document['threshold_length_km']), {'dps_bound', 'cow_bound', 'pr_bound'})

    def test_bad_grid(self):
        self.assertExitCode(2, 'natural_loss', l='1:0:0.1')


class TomographyCommandTests(CommandTestCase):
    def channel(self, length_km, leaks):
        return self.write_json('channel.json', {
            'length_km': length_km,
            'leaks': [{'position_km': p, 'magnitude': m} for p, m in leaks],
        })

    def test_noiseless_report(self):
        channel = self.channel(25.0, [(12.5, 0.01)])
        trace = self.tmp / 'trace.csv'
        out, _ = run('tomography', channel=channel, trace=str(trace))
        report = json.loads(out)
        self.assertEqual(len(report['tomogram']['leaks']), 1)
        self.assertLessEqual(abs(report['leaks'][0]['position_error_km']), 0.05 + 1e-9)
        self.assertAlmostEqual(report['total_leak']['tomogram'], 0.01, places=6)
        self.assertAlmostEqual(report['total_leak']['transmittometry'], 0.01, places=9)
        self.assertAlmostEqual(report['channel']['total_artificial_leak'], 0.01, places=12)
        self.assertIsNone(report['accuracy'])
        self.assertEqual(list(read_csv(trace).columns), ['position_km', 'power_dB'])

    def test_seeded_runs_repeat(self):
        channel = self.channel(25.0, [(12.5, 0.01)])
        first, _ = run('tomography', channel=channel, noise_sigma=0.05, n_averages=100, seed=3)
        second, _ = run('tomography', channel=channel, noise_sigma=0.05, n_averages=100, seed=3)
        self.assertEqual(first, second)

    def test_short_line_is_degenerate(self):
        self.assertExitCode(3, 'tomography', channel=self.channel(0.1, []), resolution=0.01)

    def test_invalid_channel(self):
        self.assertExitCode(2, 'tomography', channel=self.channel(10.0, [(5.0, 1.5)]))
        self.assertExitCode(2, 'tomography', channel=self.channel(10.0, [(15.0, 0.1)]))
        self.assertExitCode(2, 'tomography', channel=str(self.tmp / 'missing.json'))


class MonteCarloCommandTests(CommandTestCase):
    def test_passing_run(self):
        out, _ = run('montecarlo', protocol='cow', mu=1.0, d=50.0, re=0.0, n=1000000, seed=7)
        document = json.loads(out)
        self.assertTrue(document['passed'])
        self.assertEqual(document['config']['n_pulses'], 1000000)
        self.assertEqual(document['outcome']['eve_tap_count'], 0)

    def test_vacuum_input(self):
        out, _ = run('montecarlo', protocol='bb84', mu=0.0, d=50.0, n=1000)
        self.assertEqual(json.loads(out)['outcome']['conclusive_count'], 0)

    def test_invalid_pulse_count(self):
        self.assertExitCode(2, 'montecarlo', protocol='bb84', mu=1.0, d=50.0, n=0)

    @override_settings(QKDLC_MONTECARLO={'BLOCK_SIZE': 65536, 'Z_LIMIT': 0.0})
    def test_statistical_failure(self):
        self.assertExitCode(4, 'montecarlo', protocol='cow', mu=1.0, d=50.0, n=100000, seed=1)


class AnalysisCommandTests(CommandTestCase):
    def test_optimal_intensity(self):
        out, _ = run('optimal_intensity', formula='BB84_ORIG_UB', d='50:200:50')
        frame = pd.read_csv(StringIO(out))
        self.assertEqual(list(frame.columns), ['distance_km', 'optimal_mu', 'optimal_rate'])
        self.assertTrue(((frame.optimal_mu - 1.0).abs() < 1e-3).all())

    def test_optimal_intensity_rejects_plob(self):
        self.assertExitCode(2, 'optimal_intensity', formula='PLOB')

    def test_error_sweep(self):
        out, _ = run('error_sweep', re=[0.005, 0.1], perr='0:0.5:0.25')
        frame = pd.read_csv(StringIO(out))
        self.assertEqual(list(frame.columns), ['p_err', 'rate_rE_0.005', 'rate_rE_0.1', 'rate_original'])
        self.assertEqual(list(frame.p_err), [0.0, 0.25, 0.5])

    def test_error_sweep_json(self):
        out, _ = run('error_sweep', re=[0.005], perr='0:0.02:0.02', format='json')
        document = json.loads(out)
        self.assertEqual(len(document['ratios']), 1)
        self.assertEqual(document['ratios'][0]['p_err'], 0.02)

    def test_boost(self):
        out, _ = run('boost', protocol='bb84', re=0.005)
        document = json.loads(out)
        self.assertGreaterEqual(document['factor'], 100.0)
        self.assertTrue(document['exceeds_plob'])
        self.assertGreater(document['dashed_gain'], 2.0)

    def test_boost_crossover(self):
        out, _ = run('boost', protocol='bb84', re=0.1, d=100.0)
        crossing = json.loads(out)['plob_crossover_km']
        self.assertGreater(crossing, 50.0)
        self.assertLess(crossing, 100.0)

    def test_boost_bad_interval(self):
        self.assertExitCode(2, 'boost', protocol='bb84', re=0.005, d_lo=250.0, d_hi=50.0)

    def test_stdout_round_trip(self):
        out, _ = run('error_sweep', re=[0.005, 0.1], perr='0:0.1:0.05')
        self.assertEqual(frame_to_csv(pd.read_csv(StringIO(out), float_precision='round_trip')), out)
        out, _ = run('optimal_intensity', formula='COW_ENH', re=0.01, d='50:150:50', format='json')
        self.assertEqual(to_json(json.loads(out)), out)

    def test_edge_optimum_is_degenerate(self):
        # No leak: the loss-controlled BB84 rate rises all the way to the search edge
        self.assertExitCode(3, 'optimal_intensity', formula='BB84_ENH', d='250')

    def test_boost_with_full_leak_is_degenerate(self):
        self.assertExitCode(3, 'boost', protocol='bb84', re=1.0, d=100.0)
