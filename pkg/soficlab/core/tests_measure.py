from fractions import Fraction
from itertools import product

from django.test import SimpleTestCase

from .automata import step
from .exceptions import AlphabetError, HypothesisError, InvalidMeasureError, NotDeterministicError
from .measure import (cylinder_union_measure, forward_vector, is_invariant, make_bernoulli, make_markov_from_cover,
                      make_measure, make_periodic_point_masses, make_uniform, palindrome_cylinders,
                      palindrome_prefix_bound, prefix_antichain, solve_linear, stationary_vector, support_automaton,
                      support_matches_factors, transition_matrix, word_measure)
from .subshift import fischer_cover
from .testing import fixture_automaton, fixture_measure, random_automata


def forward_vectors(mu, length):
    """pi·nu(w) for every word w of length at most ``length``, each extending its prefix's vector."""
    vectors = {(): mu.pi}
    frontier = [()]
    for _ in range(length):
        frontier = [w + (symbol,) for w in frontier for symbol in mu.alphabet]
        for w in frontier:
            vectors[w] = forward_vector(mu, w[-1:], start=vectors[w[:-1]])
    return vectors


class BaseMeasureTestCase(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.uniform = make_uniform("01")
        cls.golden = fixture_automaton('golden')
        cls.golden_markov = make_markov_from_cover(fischer_cover(cls.golden))
        cls.periodic = make_periodic_point_masses([("01", Fraction(1, 2)), ("10", Fraction(1, 2))])
        cls.constructed = [
            make_bernoulli({"0": "1/3", "1": "2/3"}),
            make_uniform("012"),
            cls.golden_markov,
            make_markov_from_cover(fischer_cover(fixture_automaton('full2_unamb')), stationary=True),
            cls.periodic,
            make_periodic_point_masses([("012", Fraction(1, 3)), ("2", Fraction(1, 6)), ("10", Fraction(1, 2))]),
        ] + [make_markov_from_cover(fischer_cover(a)) for a in random_automata(5, 3, max_states=3)]


class ConstructionTests(BaseMeasureTestCase):

    def test_uniform_matches_fixture(self):
        self.assertEqual(self.uniform, fixture_measure('uniform2'))
        self.assertEqual(make_uniform("012"), fixture_measure('uniform3'))

    def test_bernoulli_accepts_strings(self):
        mu = make_bernoulli({"0": "1/3", "1": "2/3"})
        self.assertEqual(mu, fixture_measure('bernoulli'))
        self.assertEqual(word_measure(mu, "011"), Fraction(4, 27))

    def test_periodic_point_masses_match_fixture(self):
        self.assertEqual(self.periodic, fixture_measure('periodic'))
        self.assertEqual(self.periodic.states, ("1", "2", "3", "4"))

    def test_markov_measure_of_golden_cover(self):
        self.assertEqual(self.golden_markov, fixture_measure('golden_markov'))
        self.assertEqual(word_measure(self.golden_markov, "1"), Fraction(1, 4))
        self.assertEqual(word_measure(self.golden_markov, "11"), 0)
        self.assertEqual(word_measure(self.golden_markov, "0"), Fraction(3, 4))

    def test_markov_measure_needs_deterministic_cover(self):
        with self.assertRaises(NotDeterministicError):
            make_markov_from_cover(fixture_automaton('golden_revdet'))

    def test_pi_must_sum_to_one(self):
        with self.assertRaises(InvalidMeasureError):
            make_measure("01", [Fraction(1, 2)], {"0": [[Fraction(1, 2)]], "1": [[Fraction(1, 2)]]})

    def test_rows_must_be_stochastic(self):
        with self.assertRaises(InvalidMeasureError) as ctx:
            make_measure("01", [1], {"0": [[Fraction(1, 2)]], "1": [[Fraction(1, 3)]]})
        self.assertIn("row 1", str(ctx.exception))

    def test_floats_are_rejected(self):
        with self.assertRaises(InvalidMeasureError):
            make_measure("01", [1], {"0": [[0.5]], "1": [[0.5]]})

    def test_negative_entries_are_rejected(self):
        with self.assertRaises(InvalidMeasureError):
            make_measure("01", [1], {"0": [[Fraction(3, 2)]], "1": [[Fraction(-1, 2)]]})

    def test_nu_for_unknown_symbol(self):
        with self.assertRaises(AlphabetError):
            make_measure("0", [1], {"0": [[1]], "2": [[0]]})

    def test_missing_symbol_is_a_zero_matrix(self):
        mu = make_measure("01", [1], {"0": [[1]]})
        self.assertEqual(mu.matrix("1"), ((0,),))
        self.assertEqual(word_measure(mu, "01"), 0)
        with self.assertRaises(AlphabetError):
            mu.matrix("2")


class WordMeasureTests(BaseMeasureTestCase):

    def test_uniform_words(self):
        self.assertEqual(word_measure(self.uniform, ""), 1)
        self.assertEqual(word_measure(self.uniform, "0110"), Fraction(1, 16))

    def test_measure_is_additive_over_extensions(self):
        for mu in (self.uniform, self.golden_markov, self.periodic):
            for w in ("", "0", "01", "010"):
                self.assertEqual(word_measure(mu, w), word_measure(mu, w + "0") + word_measure(mu, w + "1"))

    def test_kolmogorov_consistency_for_every_constructor(self):
        for mu in self.constructed:
            vectors = forward_vectors(mu, 8)
            for w, vector in vectors.items():
                if len(w) == 8:
                    continue
                extensions = sum((sum(vectors[w + (symbol,)]) for symbol in mu.alphabet), Fraction(0))
                self.assertEqual(extensions, sum(vector), (mu, w))
                if len(w) <= 3:
                    self.assertEqual(word_measure(mu, w), sum(vector))

    def test_positive_words_label_runs_of_the_support(self):
        for mu in self.constructed:
            support = support_automaton(mu)
            reached = {(): support.initial}
            for w, vector in forward_vectors(mu, 8).items():
                if w:
                    reached[w] = step(support, reached[w[:-1]], w[-1])
                self.assertEqual(sum(vector) > 0, bool(reached[w]), (mu, w))

    def test_bernoulli_is_multiplicative(self):
        for mu in (make_bernoulli({"0": "1/3", "1": "2/3"}), make_bernoulli({"a": "1/2", "b": "1/3", "c": "1/6"})):
            words = [w for n in range(5) for w in product(mu.alphabet, repeat=n)]
            for u in words:
                for v in words:
                    self.assertEqual(word_measure(mu, u + v), word_measure(mu, u) * word_measure(mu, v))

    def test_periodic_words(self):
        self.assertEqual(word_measure(self.periodic, "0101"), Fraction(1, 2))
        self.assertEqual(word_measure(self.periodic, "00"), 0)
        self.assertEqual(forward_vector(self.periodic, "01"), (Fraction(1, 2), 0, 0, 0))

    def test_cylinder_union(self):
        self.assertEqual(cylinder_union_measure(self.uniform, ["00", "11", "0110", "1001"]), Fraction(5, 8))

    def test_prefixes_absorb_longer_words(self):
        self.assertEqual(prefix_antichain(["01", "0", "1", "0"]), [("0",), ("1",)])
        self.assertEqual(cylinder_union_measure(self.uniform, ["0", "01", "00"]), Fraction(1, 2))
        self.assertEqual(cylinder_union_measure(self.uniform, ["0", "1"]), 1)


class StationarityTests(BaseMeasureTestCase):

    def test_golden_markov_is_not_invariant(self):
        self.assertEqual(transition_matrix(self.golden_markov), ((Fraction(1, 2), Fraction(1, 2)), (1, 0)))
        self.assertFalse(is_invariant(self.golden_markov))
        self.assertEqual(stationary_vector(self.golden_markov), (Fraction(2, 3), Fraction(1, 3)))

    def test_stationary_variant(self):
        mu = make_markov_from_cover(self.golden, stationary=True)
        self.assertTrue(is_invariant(mu))
        self.assertEqual(word_measure(mu, "1"), Fraction(1, 3))

    def test_invariance_depends_on_the_initial_vector(self):
        self.assertTrue(is_invariant(self.uniform))
        # pi puts all the mass on the first state of each cycle.
        self.assertFalse(is_invariant(self.periodic))

    def test_reducible_chain_has_no_unique_stationary_vector(self):
        mu = make_measure("01", [Fraction(1, 2), Fraction(1, 2)], {"0": [[1, 0], [0, 0]], "1": [[0, 0], [0, 1]]})
        with self.assertRaises(HypothesisError):
            stationary_vector(mu)

    def test_solve_linear(self):
        solution = solve_linear([[Fraction(2), Fraction(1)], [Fraction(1), Fraction(3)]], [Fraction(3), Fraction(5)])
        self.assertEqual(solution, (Fraction(4, 5), Fraction(7, 5)))
        with self.assertRaises(ValueError):
            solve_linear([[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]], [Fraction(1), Fraction(2)])


class SupportTests(BaseMeasureTestCase):

    def test_support_automaton(self):
        support = support_automaton(self.periodic)
        self.assertEqual(support.initial, frozenset({"1", "3"}))
        self.assertEqual(len(support.transitions), 4)

    def test_uniform_support_is_not_the_golden_mean(self):
        comparison = support_matches_factors(self.uniform, self.golden)
        self.assertFalse(comparison.equal)
        self.assertEqual(comparison.counterexample, ("1", "1"))

    def test_periodic_support_is_not_the_full_shift(self):
        comparison = support_matches_factors(self.periodic, fixture_automaton('full2_unamb'))
        self.assertFalse(comparison.equal)
        self.assertEqual(comparison.counterexample, ("0", "0"))

    def test_markov_measure_support_matches(self):
        self.assertTrue(support_matches_factors(self.golden_markov, self.golden).equal)
        self.assertTrue(support_matches_factors(self.golden_markov, fixture_automaton('golden_amb')).equal)
        self.assertTrue(support_matches_factors(self.uniform, fixture_automaton('full2_unamb')).equal)

    def test_alphabets_must_agree(self):
        with self.assertRaises(AlphabetError):
            support_matches_factors(make_uniform("012"), self.golden)


class PalindromeTests(BaseMeasureTestCase):

    def test_palindrome_cylinders(self):
        self.assertEqual(palindrome_cylinders("01", 2),
                         [("0", "0", "0", "0"), ("0", "1", "1", "0"), ("1", "0", "0", "1"), ("1", "1", "1", "1")])

    def test_half_length_two_union(self):
        self.assertEqual(palindrome_prefix_bound(self.uniform, 2), Fraction(5, 8))

    def test_bound_for_larger_half_lengths(self):
        for k in range(2, 9):
            self.assertEqual(palindrome_prefix_bound(self.uniform, k), Fraction(7, 8) - Fraction(1, 2 ** k))
        self.assertLess(palindrome_prefix_bound(self.uniform, 40), 1)

    def test_bound_covers_the_union_of_palindrome_cylinders(self):
        for mu in (self.uniform, make_bernoulli({"0": "1/3", "1": "2/3"}), make_uniform("012")):
            for k in range(1, 6):
                words = [w for n in range(1, k + 1) for w in palindrome_cylinders(mu.alphabet, n)]
                union = cylinder_union_measure(mu, words)
                self.assertGreaterEqual(palindrome_prefix_bound(mu, k), union)
                if k == 2:
                    self.assertEqual(palindrome_prefix_bound(mu, k), union)
