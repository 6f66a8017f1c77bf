import math

import numpy as np
from django.test import SimpleTestCase

from qkdlc.exceptions import DomainError
from qkdlc.quantum_info import (
    VACUUM, CoherentAmplitude, Probability, binary_entropy, coherent_overlap_mag,
    holevo_two_pure, multimode_overlap_mag, nonvacuum_prob, poisson_pmf,
)


class BinaryEntropyTests(SimpleTestCase):
    def test_reference_values(self):
        self.assertAlmostEqual(binary_entropy(0.5), 1.0, places=15)
        self.assertEqual(binary_entropy(0.0), 0.0)
        self.assertEqual(binary_entropy(1.0), 0.0)
        self.assertAlmostEqual(binary_entropy(0.25), 0.8112781244591328, places=12)

    def test_symmetry_and_concavity(self):
        grid = np.linspace(0.0, 1.0, 101)
        values = binary_entropy(grid)
        np.testing.assert_allclose(values, binary_entropy(1.0 - grid), atol=1e-15)
        midpoints = binary_entropy(0.5 * (grid[:-1] + grid[1:]))
        self.assertTrue(np.all(midpoints >= 0.5 * (values[:-1] + values[1:]) - 1e-15))
        self.assertEqual(grid[int(np.argmax(values))], 0.5)

    def test_accepts_probability(self):
        self.assertAlmostEqual(binary_entropy(Probability(0.5)), 1.0, places=15)

    def test_rejects_out_of_range(self):
        for bad in (-0.1, 1.1, float('nan')):
            with self.assertRaises(DomainError):
                binary_entropy(bad)
        with self.assertRaises(DomainError):
            Probability(2.0)


class CoherentOverlapTests(SimpleTestCase):
    def test_reference_values(self):
        gamma = CoherentAmplitude.from_intensity(1.0)
        self.assertEqual(coherent_overlap_mag(gamma, gamma), 1.0)
        self.assertAlmostEqual(coherent_overlap_mag(VACUUM, gamma), math.exp(-0.5), places=12)
        self.assertAlmostEqual(coherent_overlap_mag(gamma, -gamma), math.exp(-2.0), places=12)

    def test_symmetric(self):
        a = CoherentAmplitude(0.3, -1.2)
        b = CoherentAmplitude(-0.7, 0.4)
        self.assertEqual(coherent_overlap_mag(a, b), coherent_overlap_mag(b, a))

    def test_scaling_law(self):
        gamma = CoherentAmplitude.from_intensity(2.5, phase=0.7)
        base = coherent_overlap_mag(VACUUM, gamma)
        for t in (0.0, 0.3, 0.8, 1.0):
            self.assertAlmostEqual(coherent_overlap_mag(VACUUM, gamma.scaled(t)), base ** (t * t), places=12)

    def test_multimode_is_product(self):
        gamma = CoherentAmplitude.from_intensity(0.4)
        overlap = multimode_overlap_mag((VACUUM, gamma), (gamma, VACUUM))
        self.assertAlmostEqual(overlap, math.exp(-0.4), places=12)
        with self.assertRaises(DomainError):
            multimode_overlap_mag((VACUUM,), (gamma, VACUUM))

    def test_intensity(self):
        self.assertAlmostEqual(CoherentAmplitude.from_intensity(3.0, 1.1).intensity, 3.0, places=12)
        with self.assertRaises(DomainError):
            CoherentAmplitude.from_intensity(-1.0)


class HolevoTests(SimpleTestCase):
    def test_reference_values(self):
        self.assertEqual(holevo_two_pure(1.0), 0.0)
        self.assertAlmostEqual(holevo_two_pure(0.0), 1.0, places=15)
        s = math.exp(-1.0)
        self.assertAlmostEqual(holevo_two_pure(s), binary_entropy((1.0 - s) / 2.0), places=15)
        self.assertAlmostEqual(holevo_two_pure(s), 0.900, places=3)

    def test_monotone_in_overlap(self):
        values = holevo_two_pure(np.linspace(0.0, 1.0, 201))
        self.assertTrue(np.all(np.diff(values) <= 1e-15))


class PoissonTests(SimpleTestCase):
    def test_reference_values(self):
        self.assertEqual(poisson_pmf(0.0, 0), 1.0)
        self.assertEqual(poisson_pmf(0.0, 1), 0.0)
        self.assertAlmostEqual(poisson_pmf(1.0, 1), math.exp(-1.0), places=15)

    def test_normalisation(self):
        for mu in (0.5, 10.0, 100.0, 1000.0):
            cutoff = math.ceil(mu + 10.0 * math.sqrt(mu) + 10.0)
            total = math.fsum(poisson_pmf(mu, np.arange(cutoff + 1)))
            self.assertAlmostEqual(total, 1.0, delta=1e-8)

    def test_test_pulse_scale_is_finite(self):
        value = poisson_pmf(1e11, 100000000000)
        self.assertTrue(math.isfinite(value))
        self.assertAlmostEqual(value, 1.0 / math.sqrt(2.0 * math.pi * 1e11), delta=1e-8)

    def test_rejects_bad_counts(self):
        with self.assertRaises(DomainError):
            poisson_pmf(1.0, 1.5)
        with self.assertRaises(DomainError):
            poisson_pmf(1.0, -1)
        with self.assertRaises(DomainError):
            poisson_pmf(-1.0, 0)


class NonvacuumTests(SimpleTestCase):
    def test_reference_values(self):
        self.assertEqual(nonvacuum_prob(0.0), 0.0)
        self.assertAlmostEqual(nonvacuum_prob(0.01), 0.00995017, places=8)

    def test_monotone_to_one(self):
        values = nonvacuum_prob(np.geomspace(1e-3, 50.0, 100))
        self.assertTrue(np.all(np.diff(values) >= 0))
        self.assertAlmostEqual(values[-1], 1.0, places=12)

    def test_complements_vacuum(self):
        for mu in (1e-6, 0.3, 7.0, 200.0):
            self.assertAlmostEqual(nonvacuum_prob(mu) + poisson_pmf(mu, 0), 1.0, places=15)
