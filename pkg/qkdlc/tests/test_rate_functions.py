import math

import numpy as np
import pandas as pd
from django.test import SimpleTestCase

from qkdlc.exceptions import DomainError
from qkdlc.quantum_info import binary_entropy
from qkdlc.rate_functions import functions, rate_objective
from qkdlc.rate_functions.bb84_functions import (
    bb84_conclusive_prob, bb84_enhanced_rate, bb84_eve_info, bb84_original_upper,
    decoy_rate, decoy_upper_observables,
)
from qkdlc.rate_functions.bound_functions import plob_bound
from qkdlc.rate_functions.cow_functions import (
    cow_bs_eve_info, cow_conclusive_prob, cow_enhanced_rate, cow_eve_info, cow_original_upper,
)
from qkdlc.rate_functions.params import (
    BB84Params, COWParams, DecoyObservables, ErrorParams, FormulaId, RateCurve, RatePoint,
)


def _tapped_holevo(x):
    return binary_entropy((1.0 - math.exp(-x)) / 2.0)


class BB84RateTests(SimpleTestCase):
    def test_eve_info(self):
        self.assertAlmostEqual(bb84_eve_info(BB84Params(200.0, 0.005)), 1.0 - math.exp(-1.0), places=12)
        self.assertEqual(bb84_eve_info(BB84Params(200.0, 0.0)), 0.0)

    def test_conclusive_prob(self):
        self.assertAlmostEqual(bb84_conclusive_prob(BB84Params(198.0, 0.005), 1e-4), 0.009754, places=6)

    def test_enhanced_without_leak(self):
        self.assertAlmostEqual(bb84_enhanced_rate(BB84Params(100.0), 1e-4), 4.9750e-3, places=7)
        self.assertEqual(
            bb84_enhanced_rate(BB84Params(100.0), 1e-4),
            bb84_conclusive_prob(BB84Params(100.0), 1e-4),
        )

    def test_enhanced_at_stationary_intensity(self):
        a, b = 1e-4 * 0.995, 0.005
        mu_star = math.log((a + b) / b) / a
        rate = bb84_enhanced_rate(BB84Params(mu_star, 0.005), 1e-4)
        self.assertAlmostEqual(rate, 3.63e-3, delta=1e-5)
        for step in (0.9, 1.1):
            self.assertLess(bb84_enhanced_rate(BB84Params(mu_star * step, 0.005), 1e-4), rate)

    def test_original_upper(self):
        self.assertAlmostEqual(bb84_original_upper(BB84Params(1.0), 1e-4), 0.5e-4 * math.exp(-1.0), places=9)
        self.assertAlmostEqual(bb84_original_upper(BB84Params(1.0), 1e-4), 1.8394e-5, delta=1e-9)

    def test_enhanced_bounded_by_conclusive(self):
        mu = np.geomspace(0.01, 1000.0, 50)
        for r_E in (0.0, 0.005, 0.1):
            params = BB84Params(mu, r_E)
            self.assertTrue(np.all(bb84_enhanced_rate(params, 1e-3) <= bb84_conclusive_prob(params, 1e-3) + 1e-18))

    def test_monotone_in_distance_and_leak(self):
        params = BB84Params(50.0, 0.01)
        rates = [bb84_enhanced_rate(params, t) for t in (0.1, 0.01, 1e-3, 1e-4)]
        self.assertTrue(all(x > y for x, y in zip(rates, rates[1:])))
        by_leak = [bb84_enhanced_rate(BB84Params(50.0, r), 1e-3) for r in (0.0, 0.005, 0.05, 0.5)]
        self.assertTrue(all(x > y for x, y in zip(by_leak, by_leak[1:])))

    def test_rejects_invalid_parameters(self):
        with self.assertRaises(DomainError):
            BB84Params(-1.0)
        with self.assertRaises(DomainError):
            BB84Params(1.0, 1.5)
        with self.assertRaises(DomainError):
            bb84_enhanced_rate(BB84Params(1.0), 1.5)


class DecoyRateTests(SimpleTestCase):
    def test_reference_value(self):
        obs = decoy_upper_observables(1e-4, 1.0, p_err=0.05)
        self.assertAlmostEqual(decoy_rate(obs), 4.075e-6, delta=1e-9)

    def test_matches_original_upper(self):
        for mu in (0.1, 0.5, 1.0, 3.0):
            self.assertAlmostEqual(
                decoy_rate(decoy_upper_observables(1e-3, mu, p_err=0.02)),
                bb84_original_upper(BB84Params(mu, 0.0, 0.02, 0.02), 1e-3),
                places=15,
            )

    def test_edge_cases(self):
        self.assertEqual(decoy_rate(DecoyObservables(gain_Q=1e-3, gain_Q1=5e-4)), 2.5e-4)
        self.assertLess(decoy_rate(DecoyObservables(gain_Q=1e-3, gain_Q1=0.0, p_err=0.01)), 0.0)
        with self.assertRaises(DomainError):
            DecoyObservables(gain_Q=1e-4, gain_Q1=1e-3)
        with self.assertRaises(DomainError):
            DecoyObservables(gain_Q=1e-3, gain_Q1=1e-4, ec_efficiency_f=0.9)


class COWRateTests(SimpleTestCase):
    def test_eve_info(self):
        value = cow_eve_info(COWParams(100.0, 0.005))
        self.assertAlmostEqual(value, _tapped_holevo(0.5), places=12)
        self.assertAlmostEqual(value, 0.717, delta=0.005)
        self.assertEqual(cow_eve_info(COWParams(100.0, 0.0)), 0.0)

    def test_conclusive_prob(self):
        self.assertAlmostEqual(cow_conclusive_prob(COWParams(100.0, 0.005), 1e-4), 9.9007e-3, places=7)

    def test_beam_splitting_info(self):
        value = cow_bs_eve_info(0.5, 1e-4)
        self.assertAlmostEqual(value, _tapped_holevo(0.5 * (1.0 - 1e-4)), places=12)
        self.assertAlmostEqual(value, 0.717, delta=0.005)

    def test_shared_kernel(self):
        for mu, T in ((0.5, 1e-4), (3.0, 0.1), (40.0, 0.9)):
            self.assertEqual(cow_bs_eve_info(mu, T), cow_eve_info(COWParams(mu, 1.0 - T)))

    def test_enhanced_and_original(self):
        self.assertAlmostEqual(cow_enhanced_rate(COWParams(80.0, 0.005), 1e-4), 2.81e-3, delta=5e-5)
        self.assertAlmostEqual(cow_original_upper(COWParams(0.5), 1e-4), 1.42e-5, delta=5e-7)

    def test_lossless_original_keeps_every_click(self):
        for mu in (0.1, 1.0, 5.0):
            self.assertAlmostEqual(cow_original_upper(COWParams(mu), 1.0), 1.0 - math.exp(-mu), places=15)

    def test_monotone_in_leak(self):
        rates = [cow_enhanced_rate(COWParams(20.0, r), 1e-3) for r in (0.0, 0.005, 0.05, 0.5)]
        self.assertTrue(all(x > y for x, y in zip(rates, rates[1:])))


class MonotonicityTests(SimpleTestCase):
    TRANSMITTANCES = (0.1, 0.01, 1e-3, 1e-4)
    ERROR_GRID = (0.0, 0.01, 0.05, 0.1)

    def assertStrictlyDecreasing(self, values):
        for x, y in zip(values, values[1:]):
            self.assertGreater(x, y)

    def test_every_formula_falls_with_distance(self):
        formulas = {
            'bb84 enhanced': lambda T: bb84_enhanced_rate(BB84Params(50.0, 0.01), T),
            'bb84 original': lambda T: bb84_original_upper(BB84Params(1.0), T),
            'cow enhanced': lambda T: cow_enhanced_rate(COWParams(20.0, 0.01), T),
            'cow original': lambda T: cow_original_upper(COWParams(0.5), T),
            'decoy': lambda T: decoy_rate(decoy_upper_observables(T, 1.0, p_err=0.05)),
            'plob': plob_bound,
        }
        for name, rate in formulas.items():
            with self.subTest(formula=name):
                self.assertStrictlyDecreasing([rate(T) for T in self.TRANSMITTANCES])

    def test_rates_fall_with_error_probability(self):
        formulas = {
            'bb84 enhanced': lambda p: bb84_enhanced_rate(BB84Params(50.0, 0.01, p, p), 1e-3),
            'bb84 original': lambda p: bb84_original_upper(BB84Params(1.0, 0.0, p, p), 1e-3),
            'cow enhanced': lambda p: cow_enhanced_rate(COWParams(20.0, 0.01, p), 1e-3),
            'cow original': lambda p: cow_original_upper(COWParams(0.5, 0.0, p), 1e-3),
        }
        for name, rate in formulas.items():
            with self.subTest(formula=name):
                self.assertStrictlyDecreasing([rate(p) for p in self.ERROR_GRID])


class PlobTests(SimpleTestCase):
    def test_reference_values(self):
        self.assertEqual(plob_bound(0.0), 0.0)
        self.assertAlmostEqual(plob_bound(0.5), 1.0, places=15)
        self.assertAlmostEqual(plob_bound(1e-4), 1.44277e-4, delta=1e-9)

    def test_lossless_channel_rejected(self):
        with self.assertRaises(DomainError):
            plob_bound(1.0)


class RegistryTests(SimpleTestCase):
    def test_every_formula_registered(self):
        self.assertEqual(set(functions), set(FormulaId))

    def test_objectives_match_direct_calls(self):
        errors = ErrorParams(0.01)
        self.assertEqual(
            rate_objective(FormulaId.BB84_ENH, 1e-3, 0.01, errors)(30.0),
            bb84_enhanced_rate(BB84Params(30.0, 0.01, 0.01, 0.01), 1e-3),
        )
        self.assertEqual(
            rate_objective(FormulaId.COW_ORIG_UB, 1e-3, 0.01, errors)(0.5),
            cow_original_upper(COWParams(0.5, 0.0, 0.01), 1e-3),
        )
        self.assertEqual(rate_objective(FormulaId.PLOB, 0.5)(123.0), plob_bound(0.5))

    def test_error_params(self):
        self.assertEqual(ErrorParams(0.02).z, 0.02)
        self.assertEqual(ErrorParams(0.02, 0.03).z, 0.03)
        with self.assertRaises(DomainError):
            ErrorParams(1.2)


class RateCurveTests(SimpleTestCase):
    def test_clamping(self):
        point = RatePoint(200.0, -1e-6, 1.0, FormulaId.BB84_ORIG_UB)
        self.assertEqual(point.clamped_rate, 0.0)
        self.assertEqual(point.raw_rate, -1e-6)

    def test_frame_round_trip(self):
        curve = RateCurve('enhanced', FormulaId.BB84_ENH, 0.005, [
            RatePoint(50.0, 1e-2, 30.5, FormulaId.BB84_ENH),
            RatePoint(100.0, 4e-3, 90.1, FormulaId.BB84_ENH),
        ])
        frame = curve.to_frame()
        self.assertIsInstance(frame, pd.DataFrame)
        restored = RateCurve.from_frame(frame, 'enhanced', 0.005)
        self.assertEqual(restored.points, curve.points)
        self.assertEqual(restored.to_dict(), curve.to_dict())
