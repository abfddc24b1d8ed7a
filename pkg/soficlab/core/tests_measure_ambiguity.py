from fractions import Fraction
from itertools import combinations, product

import numpy as np
from django.test import SimpleTestCase

from .automata import Automaton, check_unambiguous, diverged_pairs, read
from .exceptions import AlphabetError, HypothesisError
from .measure import make_markov_from_cover, make_periodic_point_masses, make_uniform, word_measure
from .measure_ambiguity import (BifutureAnalysis, alpha_residual, bifuture_is_null, bifuture_term_measure,
                                bifuture_terms, build_pair_graph, closed_set_measure, common_cylinder,
                                future_intersection_measure, positive_measure_witness, positive_vertices,
                                solve_alpha, theorem2_check, witness_sync_extension)
from .subshift import (determinize_futures, fischer_cover, in_past, intersect_futures, language_included,
                       synchronizing_word)
from .testing import fixture_automaton, random_automata


def all_words(alphabet, length):
    """Every word of length at most ``length``, the empty word first."""
    return [w for n in range(length + 1) for w in product(alphabet, repeat=n)]


class BaseMeasureAmbiguityTestCase(SimpleTestCase):
    """
    Base class for the pair-graph and bi-future tests.
    Provides the example automata, their covers and the reference measures.
    """

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.golden = fixture_automaton('golden')
        cls.full2_revdet = fixture_automaton('full2_revdet')
        cls.full2_unamb = fixture_automaton('full2_unamb')
        cls.golden_amb = fixture_automaton('golden_amb')
        cls.cover = fischer_cover(cls.golden)
        cls.uniform = make_uniform("01")
        cls.golden_markov = make_markov_from_cover(cls.cover)
        cls.periodic = make_periodic_point_masses([("01", Fraction(1, 2)), ("10", Fraction(1, 2))])

    def iterate_ones(self, g, steps=200):
        """
        M^n·1 in floating point, as a dict over the vertices of ``g``, together with
        the row sums of T^n where T is M restricted to the vertices outside the
        stochastic classes. M^n·1 - alpha = T^n·(1 - alpha) lies between 0 and T^n·1.
        """
        position = {v: i for i, v in enumerate(g.vertices)}
        matrix = np.zeros((len(position), len(position)))
        for v in g.vertices:
            for succ, weight in g.successors(v).items():
                matrix[position[v], position[succ]] = float(weight)
        limit = np.linalg.matrix_power(matrix, steps) @ np.ones(len(position))
        outside = [position[v] for v in g.vertices if not g.class_of(v).stochastic]
        tail = dict.fromkeys(g.vertices, 0.0)
        if outside:
            rest = np.linalg.matrix_power(matrix[np.ix_(outside, outside)], steps) @ np.ones(len(outside))
            tail.update({g.vertices[i]: rest[k] for k, i in enumerate(outside)})
        return {v: limit[i] for v, i in position.items()}, tail

    def pair_graph_instances(self):
        """Pair graphs of the golden covers and of every branching pair of the fixtures and random automata."""
        yield build_pair_graph(self.uniform, self.cover, "1", sources=range(self.uniform.dim))
        yield build_pair_graph(self.periodic, intersect_futures(self.full2_unamb, "1", "3"), "1|3",
                               sources=range(self.periodic.dim))
        presentations = [fixture_automaton(name) for name in ('golden_amb', 'golden_revdet', 'full2_revdet',
                                                               'full2_unamb')]
        for a in presentations + random_automata(31, 60):
            cover = fischer_cover(a)
            mu = make_markov_from_cover(cover)
            yield build_pair_graph(mu, cover, cover.states[0], sources=range(mu.dim))
            for _, s, s2 in diverged_pairs(a):
                recognizer = intersect_futures(a, s, s2)
                if recognizer is not None:
                    yield build_pair_graph(mu, recognizer, recognizer.start, sources=range(mu.dim))


class PairGraphTests(BaseMeasureAmbiguityTestCase):

    def test_uniform_against_golden_cover(self):
        g = build_pair_graph(self.uniform, self.cover, "1")
        self.assertEqual(g.vertices, (("1", "1"), ("1", "2")))
        self.assertEqual(g.successors(("1", "1")), {("1", "1"): Fraction(1, 2), ("1", "2"): Fraction(1, 2)})
        self.assertEqual(g.successors(("1", "2")), {("1", "1"): Fraction(1, 2)})
        self.assertEqual(g.row_sum(("1", "2")), Fraction(1, 2))
        self.assertEqual(len(g.classes), 1)
        self.assertTrue(g.classes[0].recurrent)
        self.assertFalse(g.classes[0].stochastic)
        self.assertEqual(solve_alpha(g), {("1", "1"): 0, ("1", "2"): 0})

    def test_golden_markov_against_golden_cover(self):
        g = build_pair_graph(self.golden_markov, self.cover, "1")
        self.assertEqual(g.initial, (("1", "1"), ("2", "1")))
        stochastic = [cls for cls in g.classes if cls.stochastic]
        self.assertEqual(len(stochastic), 1)
        self.assertEqual(set(stochastic[0].vertices), {("1", "1"), ("2", "2")})
        self.assertFalse(g.class_of(("2", "1")).recurrent)
        alpha = solve_alpha(g)
        self.assertEqual(set(alpha.values()), {1})
        self.assertEqual(alpha_residual(g, alpha), 0)
        self.assertEqual(positive_vertices(g), set(g.vertices))

    def test_labels_follow_symbols(self):
        g = build_pair_graph(self.golden_markov, self.cover, "1")
        self.assertEqual(g.labels[(("1", "1"), ("2", "2"))], "1")
        self.assertEqual(g.edge_count, 4)

    def test_alphabet_of_the_measure_must_cover_the_automaton(self):
        with self.assertRaises(AlphabetError):
            build_pair_graph(make_uniform("0"), self.cover, "1")

    def test_unknown_start_state(self):
        with self.assertRaises(HypothesisError):
            build_pair_graph(self.uniform, self.cover, "9")

    def test_alpha_is_the_limit_of_powers(self):
        converged = slow = 0
        for g in self.pair_graph_instances():
            alpha = solve_alpha(g)
            self.assertEqual(alpha_residual(g, alpha), 0)
            limit, tail = self.iterate_ones(g)
            for v in g.vertices:
                gap = limit[v] - float(alpha[v])
                self.assertGreaterEqual(gap, -1e-12)
                if tail[v] <= 1e-10:
                    self.assertLessEqual(gap, 1e-9, v)
                    converged += 1
                else:
                    # Substochastic classes with a radius close to 1 still carry mass after 200 steps.
                    self.assertLessEqual(gap, tail[v] + 1e-9, v)
                    slow += 1
            self.assertEqual(positive_vertices(g), {v for v in g.vertices if alpha[v] > 0})
        self.assertGreater(converged, 0)

    def test_stochastic_classes_converge_at_once(self):
        g = build_pair_graph(self.golden_markov, self.cover, "1")
        limit, tail = self.iterate_ones(g)
        for v in g.vertices:
            self.assertAlmostEqual(limit[v], 1.0, places=12)
        self.assertEqual(set(tail.values()), {0.0})


class ClosedSetMeasureTests(BaseMeasureAmbiguityTestCase):

    def test_golden_mean_is_null_for_the_uniform_measure(self):
        self.assertEqual(closed_set_measure(self.uniform, self.cover, "1"), 0)
        self.assertEqual(closed_set_measure(self.uniform, self.cover, "2"), 0)

    def test_futures_under_the_golden_markov_measure(self):
        self.assertEqual(closed_set_measure(self.golden_markov, self.cover, "1"), 1)
        self.assertEqual(closed_set_measure(self.golden_markov, self.cover, "2"), Fraction(3, 4))

    def test_synchronizing_prefix_gives_the_cylinder_measure(self):
        # After a synchronizing word w the closed set is w·Fut(r), so its measure is mu(w).
        z = synchronizing_word(self.cover)
        r = self.cover.walk("1", z)
        for prefix in ((), ("1",), ("0", "1")):
            w = prefix + z
            if not in_past(self.cover.underlying, w, r):
                continue
            self.assertEqual(closed_set_measure(self.golden_markov, self.cover, r, prefix=w),
                             word_measure(self.golden_markov, w))

    def test_prefix_preserves_null_sets(self):
        nulls = 0
        presentations = [fixture_automaton(name) for name in ('golden_revdet', 'full2_revdet', 'full2_unamb')]
        for a in presentations + random_automata(8, 40, max_states=4):
            mu = make_markov_from_cover(fischer_cover(a))
            words = all_words(a.alphabet, 4)
            for s, s2 in combinations(a.states, 2):
                recognizer = intersect_futures(a, s, s2)
                if recognizer is None or closed_set_measure(mu, recognizer, recognizer.start) != 0:
                    continue
                nulls += 1
                for w in words:
                    self.assertEqual(closed_set_measure(mu, recognizer, recognizer.start, prefix=w), 0,
                                     (a.transitions, s, s2, w))
        self.assertGreater(nulls, 0)

    def test_words_in_the_past_have_positive_future_measure(self):
        presentations = [fixture_automaton(name) for name in ('golden', 'golden_amb', 'golden_revdet',
                                                               'full2_revdet', 'full2_unamb')]
        for a in presentations + random_automata(4, 25, max_states=4):
            mu = make_markov_from_cover(fischer_cover(a))
            words = all_words(a.alphabet, 4)
            for q in a.states:
                futures = determinize_futures(a, {q})
                for w in words:
                    if in_past(a, w, q):
                        self.assertGreater(closed_set_measure(mu, futures, futures.start, prefix=w), 0,
                                           (a.transitions, q, w))

    def test_prefix_of_measure_zero(self):
        self.assertEqual(closed_set_measure(self.golden_markov, self.cover, "1", prefix="11"), 0)

    def test_future_intersections(self):
        self.assertEqual(future_intersection_measure(self.full2_revdet, "1", "2", self.uniform), 0)
        self.assertEqual(future_intersection_measure(self.golden_amb, "1", "2", self.golden_markov), Fraction(3, 4))
        self.assertEqual(future_intersection_measure(self.full2_unamb, "1", "3", self.uniform), 0)


class BifutureTests(BaseMeasureAmbiguityTestCase):

    def test_terms_of_the_ambiguous_presentation(self):
        terms = bifuture_terms(self.golden_amb, "2")
        self.assertEqual(len(terms), 1)
        self.assertEqual((terms[0].branch_state, terms[0].symbol, terms[0].targets), ("2", "0", ("1", "2")))
        self.assertEqual(terms[0].word, ("0",))

    def test_terms_of_the_unambiguous_presentation(self):
        terms = bifuture_terms(self.full2_unamb, "1")
        self.assertEqual([(t.prefix, t.branch_state, t.symbol, t.targets) for t in terms],
                         [((), "1", "0", ("1", "3")), (("0", "1"), "4", "1", ("1", "3"))])

    def test_term_measure_under_point_masses(self):
        self.assertEqual(bifuture_term_measure(self.full2_unamb, "1", (), "0", "1", "3", self.periodic),
                         Fraction(1, 2))
        self.assertEqual(bifuture_term_measure(self.full2_unamb, "1", (), "0", "1", "3", self.uniform), 0)

    def test_term_measure_under_golden_markov(self):
        self.assertEqual(bifuture_term_measure(self.golden_amb, "2", (), "0", "1", "2", self.golden_markov),
                         Fraction(3, 8))

    def test_term_needs_a_branching_state(self):
        with self.assertRaises(HypothesisError):
            bifuture_term_measure(self.full2_unamb, "1", (), "1", "1", "3", self.uniform)

    def test_unambiguous_presentation_under_uniform_measure(self):
        for q in self.full2_unamb.states:
            self.assertTrue(bifuture_is_null(self.full2_unamb, q, self.uniform))

    def test_unambiguous_presentation_under_point_masses(self):
        self.assertFalse(bifuture_is_null(self.full2_unamb, "1", self.periodic))
        term = BifutureAnalysis(self.full2_unamb, self.periodic).positive_term("1")
        self.assertEqual((term.prefix, term.branch_state, term.symbol, term.targets), ((), "1", "0", ("1", "3")))
        self.assertEqual(term.measure_state, "2")

    def test_ambiguous_presentation_under_uniform_measure(self):
        self.assertTrue(bifuture_is_null(self.golden_amb, "1", self.uniform))
        self.assertTrue(bifuture_is_null(self.golden_amb, "2", self.uniform))

    def test_ambiguous_presentation_under_golden_markov(self):
        self.assertFalse(bifuture_is_null(self.golden_amb, "2", self.golden_markov))
        self.assertFalse(bifuture_is_null(self.golden_amb, "1", self.golden_markov))

    def test_positivity_is_computed_once_per_pair(self):
        analysis = BifutureAnalysis(self.full2_unamb, self.uniform)
        for q in self.full2_unamb.states:
            analysis.is_null(q)
        self.assertEqual(set(analysis._positive), {("1", "3")})


class Theorem2Tests(BaseMeasureAmbiguityTestCase):

    def test_unambiguous_presentation_with_full_support(self):
        report = theorem2_check(self.full2_unamb, self.uniform)
        self.assertTrue(report.hypotheses_ok)
        self.assertTrue(report.unambiguous)
        self.assertTrue(report.all_bifutures_null)
        self.assertTrue(report.equivalence_holds)
        self.assertIsNone(report.positive_term)

    def test_point_masses_break_the_support_hypothesis(self):
        report = theorem2_check(self.full2_unamb, self.periodic)
        self.assertFalse(report.hypotheses_ok)
        self.assertIn("00", report.reasons[0])
        self.assertTrue(report.unambiguous)
        self.assertFalse(report.all_bifutures_null)
        self.assertFalse(report.equivalence_holds)

    def test_uniform_measure_breaks_the_support_hypothesis(self):
        report = theorem2_check(self.golden_amb, self.uniform)
        self.assertFalse(report.hypotheses_ok)
        self.assertFalse(report.unambiguous)
        self.assertTrue(report.all_bifutures_null)
        self.assertFalse(report.equivalence_holds)
        self.assertEqual(report.null_states, {"1": True, "2": True})

    def test_ambiguous_presentation_with_markov_measure(self):
        report = theorem2_check(self.golden_amb, self.golden_markov)
        self.assertTrue(report.hypotheses_ok)
        self.assertFalse(report.unambiguous)
        self.assertFalse(report.all_bifutures_null)
        self.assertTrue(report.equivalence_holds)
        self.assertIsNotNone(report.ambiguity_witness)
        self.assertIsNotNone(report.positive_term)

    def test_reducible_automaton_is_reported(self):
        a = Automaton.build(["1", "2"], ["0", "1"], [("1", "0", "1"), ("1", "1", "2"), ("2", "0", "2"), ("2", "1", "2")])
        report = theorem2_check(a, self.uniform)
        self.assertFalse(report.hypotheses_ok)
        self.assertIn("automaton is not strongly connected", report.reasons)

    def test_equivalence_on_random_automata(self):
        ambiguous = 0
        for a in random_automata(20240501, 500):
            mu = make_markov_from_cover(fischer_cover(a))
            report = theorem2_check(a, mu)
            self.assertTrue(report.hypotheses_ok, report.reasons)
            self.assertTrue(report.equivalence_holds, a.transitions)
            ambiguous += not report.unambiguous
        # Both sides of the equivalence are exercised.
        self.assertGreater(ambiguous, 0)
        self.assertLess(ambiguous, 500)

    def test_nullity_is_the_same_for_every_state(self):
        for a in random_automata(99, 80):
            mu = make_markov_from_cover(fischer_cover(a))
            analysis = BifutureAnalysis(a, mu)
            verdicts = {analysis.is_null(q) for q in a.states}
            if check_unambiguous(a).unambiguous:
                self.assertEqual(verdicts, {True})
            else:
                self.assertIn(False, verdicts)

    def test_branching_pairs_of_unambiguous_automata_are_null(self):
        checked = 0
        presentations = [fixture_automaton(name) for name in ('golden_revdet', 'full2_revdet', 'full2_unamb')]
        for a in presentations + random_automata(31, 120):
            if not check_unambiguous(a).unambiguous:
                continue
            mu = make_markov_from_cover(fischer_cover(a))
            for _, s, s2 in diverged_pairs(a):
                self.assertEqual(future_intersection_measure(a, s, s2, mu), 0)
                checked += 1
        self.assertGreater(checked, 0)


class WitnessTests(BaseMeasureAmbiguityTestCase):

    def test_sync_extension_of_the_golden_mean(self):
        extension = witness_sync_extension(self.golden, "1", ())
        self.assertEqual(extension.word, ("0",))
        self.assertEqual(extension.state, "1")

    def test_sync_extension_after_a_prefix(self):
        extension = witness_sync_extension(self.golden_amb, "2", ("1",))
        cover = fischer_cover(self.golden_amb)
        self.assertTrue(in_past(cover.underlying, ("1",) + extension.word, extension.state))
        self.assertEqual(len(read(cover.underlying, cover.states, extension.word)), 1)

    def test_sync_extension_needs_the_prefix_in_the_past(self):
        with self.assertRaises(HypothesisError):
            witness_sync_extension(self.golden, "2", ("0",))

    def test_sync_extensions_on_random_automata(self):
        for a in random_automata(17, 60):
            cover = fischer_cover(a)
            for q in a.states:
                extension = witness_sync_extension(a, q, (), cover=cover)
                self.assertEqual(len(read(cover.underlying, cover.states, extension.word)), 1)

    def test_positive_measure_witness(self):
        witness = positive_measure_witness(self.golden_markov, self.cover, "1", self.cover)
        self.assertEqual((witness.word, witness.state), (("0",), "1"))
        self.assertIsNone(positive_measure_witness(self.uniform, self.cover, "1", self.cover))

    def test_positive_measure_witness_for_an_intersection(self):
        recognizer = intersect_futures(self.golden_amb, "1", "2")
        x_cover = fischer_cover(self.golden_amb)
        witness = positive_measure_witness(self.golden_markov, recognizer, recognizer.start, x_cover)
        self.assertIsNotNone(witness)
        self.assertTrue(in_past(x_cover.underlying, witness.word, witness.state))
        reached = recognizer.walk(recognizer.start, witness.word)
        self.assertIsNone(language_included(x_cover.underlying, {witness.state}, recognizer.underlying, {reached}))

    def test_common_cylinder(self):
        w = common_cylinder(self.golden_amb, "1", "2", self.golden_markov)
        self.assertIsNotNone(w)
        self.assertEqual(read(self.golden_amb, {"1"}, w), read(self.golden_amb, {"2"}, w))
        self.assertIsNone(common_cylinder(self.full2_revdet, "1", "2", self.uniform))
        self.assertIsNone(common_cylinder(self.golden_amb, "1", "2", self.uniform))

    def test_common_cylinder_needs_a_shift_automaton(self):
        a = Automaton.build(["1"], ["0"], [("1", "0", "1")], initial=[])
        with self.assertRaises(HypothesisError):
            common_cylinder(a, "1", "1", make_uniform("0"))
