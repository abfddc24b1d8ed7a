import math
from unittest.mock import patch

import numpy as np
from django.test import SimpleTestCase, override_settings

from .automata import Automaton, check_unambiguous
from .exceptions import ConvergenceError, HypothesisError
from .spectral import adjacency, entropy, run_growth_rate, spectral_radius, theorem1_check
from .subshift import factor_count, fischer_cover
from .testing import fixture_automaton, random_automata

PHI = (1 + math.sqrt(5)) / 2


class BaseSpectralTestCase(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.golden = fixture_automaton('golden')
        cls.golden_amb = fixture_automaton('golden_amb')
        cls.full2 = fixture_automaton('full2')
        cls.full2_presentations = [fixture_automaton(name) for name in ('full2_det', 'full2_revdet', 'full2_unamb')]


class AdjacencyTests(BaseSpectralTestCase):

    def test_parallel_transitions_are_counted(self):
        m = adjacency(fixture_automaton('full2_unamb'))
        self.assertEqual(m.dimension, 4)
        self.assertEqual(m.entries[3][2], 2)
        self.assertEqual(m.entries[3][0], 1)
        self.assertEqual(adjacency(self.golden_amb).entries, ((1, 1), (1, 1)))

    def test_exact_powers(self):
        self.assertEqual(adjacency(self.golden).power(5), [[8, 5], [5, 3]])
        self.assertEqual(adjacency(self.golden).power(0), [[1, 0], [0, 1]])

    def test_run_growth_rate_tends_to_log_radius(self):
        self.assertAlmostEqual(run_growth_rate(adjacency(self.full2), 10), math.log(2), places=12)
        # The entries of the golden-mean powers sum to a Fibonacci number.
        fibonacci = [0, 1]
        while len(fibonacci) < 64:
            fibonacci.append(fibonacci[-1] + fibonacci[-2])
        self.assertAlmostEqual(run_growth_rate(adjacency(self.golden), 60), math.log(fibonacci[63]) / 60, places=12)

    def test_run_growth_rate_within_the_perron_bound(self):
        # With v the Perron vector, sum(v)/max(v) <= sum(M^n) / rho^n <= sum(v)/min(v).
        n = 60
        automata = [self.golden, self.golden_amb, self.full2, fixture_automaton('full3')] + self.full2_presentations
        for a in automata + random_automata(6, 40, max_states=5):
            m = adjacency(a)
            values, vectors = np.linalg.eig(m.as_array())
            top = int(np.argmax(values.real))
            v = np.abs(vectors[:, top].real)
            excess = run_growth_rate(m, n) - math.log(values[top].real)
            self.assertGreaterEqual(excess, math.log(v.sum() / v.max()) / n - 1e-9, a.transitions)
            self.assertLessEqual(excess, math.log(v.sum() / v.min()) / n + 1e-9, a.transitions)

    def test_radius_of_powers(self):
        automata = [self.golden, self.golden_amb, fixture_automaton('full3')] + self.full2_presentations
        for a in automata + random_automata(12, 30, max_states=5):
            m = adjacency(a)
            base = spectral_radius(m).radius
            for n in range(1, 6):
                report = spectral_radius(m.power(n), tol=1e-12 * max(1.0, base ** n))
                self.assertAlmostEqual(math.log(report.radius), n * math.log(base), delta=n * 1e-9)


class SpectralRadiusTests(BaseSpectralTestCase):

    def test_full_shift_matrices_have_radius_two(self):
        for a in self.full2_presentations:
            report = spectral_radius(adjacency(a))
            self.assertAlmostEqual(report.radius, 2.0, places=9)
            self.assertAlmostEqual(report.log_radius, math.log(2), places=9)

    def test_all_ones_and_golden(self):
        self.assertAlmostEqual(spectral_radius([[1, 1], [1, 1]]).radius, 2.0, places=10)
        report = spectral_radius(adjacency(self.golden))
        self.assertAlmostEqual(report.radius, PHI, places=10)
        self.assertLessEqual(report.residual, 1e-12 * (PHI + 1))

    def test_periodic_matrix_converges(self):
        # A bare 3-cycle has eigenvalues on the unit circle; the shift by I handles it.
        cycle = [[0, 1, 0], [0, 0, 1], [1, 0, 0]]
        self.assertAlmostEqual(spectral_radius(cycle).radius, 1.0, places=9)

    def test_matches_numpy_eigenvalues(self):
        for a in random_automata(3, 40):
            m = adjacency(a)
            expected = max(abs(np.linalg.eigvals(m.as_array())))
            self.assertAlmostEqual(spectral_radius(m).radius, expected, places=6)

    def test_zero_matrix(self):
        report = spectral_radius([[0]])
        self.assertEqual(report.radius, 0.0)
        self.assertEqual(report.log_radius, float("-inf"))

    def test_negative_entries_rejected(self):
        with self.assertRaises(ValueError):
            spectral_radius([[1, -1], [0, 1]])

    def test_non_convergence_carries_last_estimate(self):
        with self.assertRaises(ConvergenceError) as ctx:
            spectral_radius(adjacency(self.golden), max_iterations=1)
        self.assertEqual(ctx.exception.iterations, 1)
        self.assertIsNotNone(ctx.exception.last_estimate)

    def test_non_convergence_is_a_warning(self):
        with self.assertLogs('core.spectral', 'WARNING') as logs, self.assertRaises(ConvergenceError):
            spectral_radius(adjacency(self.golden), max_iterations=1)
        self.assertEqual([record.levelname for record in logs.records], ['WARNING'])
        self.assertIn("did not converge after 1 iterations", logs.output[0])

    @override_settings(SPECTRAL_MAX_ITERATIONS=1)
    def test_iteration_limit_read_from_settings(self):
        with self.assertRaises(ConvergenceError):
            spectral_radius(adjacency(self.golden))


class EntropyTests(BaseSpectralTestCase):

    def test_golden_mean_entropy(self):
        self.assertAlmostEqual(entropy(self.golden), 0.481212, places=6)
        self.assertAlmostEqual(entropy(self.golden_amb), math.log(PHI), places=10)
        self.assertAlmostEqual(entropy(fixture_automaton('golden_revdet')), math.log(PHI), places=10)

    def test_full_shift_entropy(self):
        for a in self.full2_presentations:
            self.assertAlmostEqual(entropy(a), math.log(2), places=10)
        self.assertAlmostEqual(entropy(fixture_automaton('full3')), math.log(3), places=10)

    def test_single_periodic_orbit_has_zero_entropy(self):
        a = Automaton.build(["1", "2"], ["0", "1"], [("1", "0", "2"), ("2", "1", "1")])
        self.assertAlmostEqual(entropy(a), 0.0, places=10)

    def test_proper_subshift_has_smaller_entropy(self):
        self.assertLess(entropy(self.golden), entropy(self.full2))

    def test_factor_counts_approach_the_entropy(self):
        automata = [self.golden, self.golden_amb, fixture_automaton('golden_revdet'), self.full2,
                    fixture_automaton('full3')] + self.full2_presentations
        for a in automata:
            self.assertAlmostEqual(math.log(factor_count(a, 40)) / 40, entropy(a), delta=0.02)

    def test_entropy_reuses_a_given_cover(self):
        cover = fischer_cover(self.golden_amb)
        with patch('core.spectral.fischer_cover') as mock_cover:
            self.assertAlmostEqual(entropy(self.golden_amb, cover=cover), math.log(PHI), places=10)
        mock_cover.assert_not_called()

    def test_entropy_requires_irreducible_shift_automaton(self):
        a = Automaton.build(["1", "2"], ["0"], [("1", "0", "1"), ("2", "0", "2")])
        with self.assertRaises(HypothesisError):
            entropy(a)


class Theorem1Tests(BaseSpectralTestCase):

    def test_ambiguous_presentation_of_golden_mean(self):
        report = theorem1_check(self.golden_amb, self.golden)
        self.assertEqual(report.conditions, {'i': False, 'ii': True, 'iii': False})
        self.assertTrue(report.consistent)
        self.assertIsNotNone(report.witness)
        self.assertIsNone(report.counterexample)

    def test_unambiguous_presentations(self):
        report = theorem1_check(fixture_automaton('golden_revdet'), self.golden)
        self.assertEqual(report.conditions, {'i': True, 'ii': True, 'iii': True})
        for a in self.full2_presentations:
            self.assertTrue(theorem1_check(a, self.full2).consistent)

    def test_proper_subshift(self):
        report = theorem1_check(self.golden, self.full2)
        self.assertEqual(report.conditions, {'i': True, 'ii': False, 'iii': False})
        self.assertEqual(report.counterexample, ("1", "1"))
        self.assertTrue(report.consistent)

    def test_words_outside_the_shift_are_rejected(self):
        with self.assertRaises(HypothesisError):
            theorem1_check(self.full2, self.golden)

    def test_automata_must_be_in_shift_mode(self):
        a = Automaton.build(["1"], ["0"], [("1", "0", "1")], final=[])
        with self.assertRaises(HypothesisError):
            theorem1_check(a, a)

    def test_never_exactly_two_conditions(self):
        for a in random_automata(2024, 200, max_states=5):
            report = theorem1_check(a, fischer_cover(a).underlying)
            self.assertTrue(report.accepts_shift)
            self.assertEqual(report.unambiguous, check_unambiguous(a).unambiguous)
            self.assertTrue(report.consistent, a.transitions)
            self.assertEqual(report.unambiguous, report.entropy_matches)
