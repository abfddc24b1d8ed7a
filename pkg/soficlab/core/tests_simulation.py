import itertools
from fractions import Fraction

from django.test import SimpleTestCase, override_settings

from .exceptions import AlphabetError
from .measure import make_markov_from_cover, make_periodic_point_masses, make_uniform
from .simulation import (DivergenceTracker, SampleConfig, Sampler, empirical_cylinder_frequencies, estimate_bifuture,
                         sample_sequence, wilson_interval)
from .subshift import fischer_cover
from .testing import fixture_automaton


class BaseSimulationTestCase(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.full2_unamb = fixture_automaton('full2_unamb')
        cls.golden_amb = fixture_automaton('golden_amb')
        cls.uniform = make_uniform("01")
        cls.golden_markov = make_markov_from_cover(fischer_cover(fixture_automaton('golden')))
        cls.periodic = make_periodic_point_masses([("01", Fraction(1, 2)), ("10", Fraction(1, 2))])


class SampleConfigTests(BaseSimulationTestCase):

    def test_defaults_come_from_settings(self):
        cfg = SampleConfig()
        self.assertEqual((cfg.seed, cfg.prefix_length, cfg.trials), (42, 30, 100_000))

    @override_settings(SIMULATION_SEED=7, SIMULATION_TRIALS=10)
    def test_settings_override(self):
        cfg = SampleConfig(prefix_length=5)
        self.assertEqual((cfg.seed, cfg.prefix_length, cfg.trials), (7, 5, 10))

    def test_lengths_must_be_positive(self):
        with self.assertRaises(ValueError):
            SampleConfig(prefix_length=0)
        with self.assertRaises(ValueError):
            SampleConfig(trials=0)


class SamplingTests(BaseSimulationTestCase):

    def test_same_seed_same_sample(self):
        cfg = SampleConfig(seed=123, prefix_length=50, trials=1)
        first = sample_sequence(self.uniform, cfg)
        self.assertEqual(len(first), 50)
        self.assertEqual(first, sample_sequence(self.uniform, cfg))
        self.assertNotEqual(first, sample_sequence(self.uniform, SampleConfig(seed=124, prefix_length=50, trials=1)))

    def test_trials_are_independent_of_order(self):
        sampler = Sampler(self.golden_markov)
        forward = [sampler.sample(9, t, 20) for t in range(10)]
        backward = [sampler.sample(9, t, 20) for t in reversed(range(10))]
        self.assertEqual(forward, backward[::-1])

    def test_golden_markov_samples_avoid_11(self):
        sampler = Sampler(self.golden_markov)
        for t in range(10_000):
            word = "".join(sampler.sample(42, t, 30))
            self.assertNotIn("11", word)

    def test_point_mass_samples_are_periodic(self):
        sampler = Sampler(self.periodic)
        prefixes = {"01" * 15, "10" * 15}
        for t in range(2_000):
            self.assertIn("".join(sampler.sample(42, t, 30)), prefixes)

    def test_uniform_cylinder_frequencies(self):
        frequencies = empirical_cylinder_frequencies(self.uniform, SampleConfig(seed=42, prefix_length=4, trials=20_000))
        self.assertEqual(len(frequencies), 16)
        for word in itertools.product("01", repeat=4):
            self.assertAlmostEqual(frequencies[word], 1 / 16, delta=0.01)

    def test_thresholds_are_exact(self):
        sampler = Sampler(make_uniform("012"))
        thresholds, outcomes = sampler.moves[0]
        self.assertEqual(outcomes, [("0", 0), ("1", 0), ("2", 0)])
        self.assertEqual(thresholds[-1], 1 << 64)
        self.assertEqual(thresholds[0], -(-(1 << 64) // 3))


class WilsonIntervalTests(SimpleTestCase):

    def test_interval_contains_the_estimate(self):
        lo, hi = wilson_interval(50, 100)
        self.assertLess(lo, 0.5)
        self.assertGreater(hi, 0.5)
        self.assertAlmostEqual(lo + hi, 1.0, places=12)

    def test_interval_at_the_boundaries(self):
        lo, hi = wilson_interval(0, 1000)
        self.assertAlmostEqual(lo, 0.0, places=12)
        self.assertLess(hi, 0.005)
        lo, hi = wilson_interval(1000, 1000)
        self.assertGreater(lo, 0.995)
        self.assertAlmostEqual(hi, 1.0, places=12)


class DivergenceTrackerTests(BaseSimulationTestCase):

    def test_two_runs_from_the_branching_state(self):
        tracker = DivergenceTracker(self.golden_amb, "2")
        self.assertTrue(tracker.has_two_runs(("0", "0")))
        self.assertFalse(tracker.has_two_runs(("0", "1")))
        self.assertFalse(tracker.has_two_runs(("1",)))

    def test_splits_after_the_window_are_ignored(self):
        tracker = DivergenceTracker(self.golden_amb, "2")
        self.assertFalse(tracker.has_two_runs(("0", "0"), window=0))
        self.assertTrue(tracker.has_two_runs(("0", "0", "0"), window=1))

    def test_unambiguous_splits_die_out(self):
        tracker = DivergenceTracker(self.full2_unamb, "1")
        self.assertTrue(tracker.has_two_runs(("0",)))
        self.assertFalse(tracker.has_two_runs(("0", "0"), window=1))
        self.assertTrue(tracker.has_two_runs(("0", "1", "0", "1", "0", "1"), window=1))


class EstimateTests(BaseSimulationTestCase):

    def test_null_bifuture_under_uniform_measure(self):
        result = estimate_bifuture(self.full2_unamb, "1", self.uniform, SampleConfig(seed=42, prefix_length=30, trials=100_000))
        self.assertLessEqual(result.estimate, 0.01)
        self.assertEqual(result.trials, 100_000)

    def test_half_bifuture_under_point_masses(self):
        result = estimate_bifuture(self.full2_unamb, "1", self.periodic, SampleConfig(seed=42, prefix_length=30, trials=100_000))
        self.assertGreaterEqual(result.estimate, 0.48)
        self.assertLessEqual(result.estimate, 0.52)
        lo, hi = result.wilson_interval
        self.assertLessEqual(lo, result.estimate)
        self.assertLessEqual(result.estimate, hi)

    def test_positive_bifuture_of_ambiguous_automaton(self):
        result = estimate_bifuture(self.golden_amb, "2", self.golden_markov,
                                   SampleConfig(seed=42, prefix_length=30, trials=100_000))
        self.assertEqual(result.trials, 100_000)
        self.assertGreater(result.estimate, 0.05)
        lo, hi = result.wilson_interval
        self.assertGreater(lo, 0.05)
        self.assertLess(hi - lo, 0.01)

    def test_estimates_are_reproducible(self):
        cfg = SampleConfig(seed=5, prefix_length=12, trials=3_000)
        first = estimate_bifuture(self.golden_amb, "2", self.golden_markov, cfg)
        self.assertEqual(first, estimate_bifuture(self.golden_amb, "2", self.golden_markov, cfg))

    def test_threads_give_the_sequential_result(self):
        cfg = SampleConfig(seed=5, prefix_length=12, trials=3_001)
        sequential = estimate_bifuture(self.full2_unamb, "1", self.periodic, cfg, workers=1)
        self.assertEqual(estimate_bifuture(self.full2_unamb, "1", self.periodic, cfg, workers=4), sequential)

    @override_settings(SIMULATION_WORKERS=3)
    def test_workers_read_from_settings(self):
        cfg = SampleConfig(seed=5, prefix_length=12, trials=500)
        self.assertEqual(estimate_bifuture(self.golden_amb, "2", self.golden_markov, cfg),
                         estimate_bifuture(self.golden_amb, "2", self.golden_markov, cfg, workers=1))

    def test_measure_alphabet_must_fit(self):
        with self.assertRaises(AlphabetError):
            estimate_bifuture(self.full2_unamb, "1", make_uniform("012"), SampleConfig(trials=10))
