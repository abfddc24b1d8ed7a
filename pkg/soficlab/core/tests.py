from django.test import SimpleTestCase

from .automata import (Automaton, Transition, check, check_unambiguous, count_runs, diverged_pairs, format_word,
                       is_deterministic, is_reverse_deterministic, is_strongly_connected, parse_word, read, replay,
                       scc_decompose, trim, validate)
from .exceptions import AlphabetError, HypothesisError, InvalidAutomatonError, NotDeterministicError
from .subshift import (DeterministicCover, determinize_futures, entropy_estimate, factor_count, fischer_cover,
                       in_past, intersect_futures, is_isomorphic, language_difference, language_included,
                       shift_language_equal, synchronizing_extension, synchronizing_word)
from .testing import fixture_automaton, random_automata


class BaseAutomatonTestCase(SimpleTestCase):
    """
    Base class for automaton tests.
    Loads the shared fixtures once per class.
    """

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.golden = fixture_automaton('golden')
        cls.golden_revdet = fixture_automaton('golden_revdet')
        cls.full2_det = fixture_automaton('full2_det')
        cls.full2_revdet = fixture_automaton('full2_revdet')
        cls.full2_unamb = fixture_automaton('full2_unamb')
        cls.golden_amb = fixture_automaton('golden_amb')
        cls.full2 = fixture_automaton('full2')

    def cycle(self, n=2):
        """A single cycle reading 0: deterministic, with no synchronizing word when n > 1."""
        states = [str(i + 1) for i in range(n)]
        return Automaton.build(states, ['0'], [(states[i], '0', states[(i + 1) % n]) for i in range(n)])


class WordTests(BaseAutomatonTestCase):

    def test_empty_word_is_printed_as_epsilon(self):
        self.assertEqual(format_word(()), "ε")
        self.assertEqual(format_word(("0", "1")), "01")
        self.assertEqual(format_word(("a1", "b")), "a1 b")

    def test_parse_word_single_letter_alphabet(self):
        self.assertEqual(parse_word(("0", "1"), "0110"), ("0", "1", "1", "0"))
        self.assertEqual(parse_word(("0", "1"), "ε"), ())

    def test_parse_word_multi_letter_symbols(self):
        self.assertEqual(parse_word(("a1", "b"), "a1 b a1"), ("a1", "b", "a1"))

    def test_parse_word_rejects_unknown_symbol(self):
        with self.assertRaises(AlphabetError):
            parse_word(("0", "1"), "012")


class ValidationTests(BaseAutomatonTestCase):

    def test_fixtures_are_valid(self):
        for a in (self.golden, self.golden_revdet, self.full2_unamb, self.golden_amb):
            self.assertEqual(validate(a), [])
            self.assertTrue(a.is_shift_mode)

    def test_unknown_state_and_symbol_are_reported(self):
        a = Automaton.build(["1"], ["0"], [("1", "0", "2"), ("1", "1", "1")])
        errors = validate(a)
        self.assertEqual(len(errors), 2)
        self.assertIn("unknown state '2'", errors[0])
        self.assertIn("unknown symbol '1'", errors[1])
        with self.assertRaises(InvalidAutomatonError) as ctx:
            check(a)
        self.assertEqual(ctx.exception.errors, errors)

    def test_duplicate_transition_is_reported(self):
        a = Automaton.build(["1"], ["0"], [("1", "0", "1"), ("1", "0", "1")])
        self.assertIn("duplicate transition (1, 0, 1)", validate(a))

    def test_undeclared_initial_state(self):
        a = Automaton.build(["1"], ["0"], [("1", "0", "1")], initial=["1", "9"])
        self.assertEqual(validate(a), ["initial states not declared: 9"])


class StructureTests(BaseAutomatonTestCase):

    def test_strongly_connected_fixtures(self):
        for a in (self.golden, self.full2_unamb, self.golden_amb, self.full2):
            components = scc_decompose(a)
            self.assertEqual(len(components), 1)
            self.assertTrue(components[0].recurrent)
            self.assertTrue(is_strongly_connected(a))

    def test_components_in_topological_order(self):
        a = Automaton.build(["1", "2"], ["0", "1"], [("1", "0", "1"), ("1", "1", "2"), ("2", "0", "2")])
        components = scc_decompose(a)
        self.assertEqual([c.states for c in components], [("1",), ("2",)])
        self.assertEqual([c.recurrent for c in components], [False, True])
        self.assertFalse(is_strongly_connected(a))

    def test_determinism_of_the_golden_mean_presentations(self):
        self.assertTrue(is_deterministic(self.golden))
        self.assertFalse(is_reverse_deterministic(self.golden))
        self.assertFalse(is_deterministic(self.golden_revdet))
        self.assertTrue(is_reverse_deterministic(self.golden_revdet))

    def test_full_shift_presentations(self):
        self.assertTrue(is_deterministic(self.full2_det))
        self.assertTrue(is_reverse_deterministic(self.full2_revdet))
        self.assertFalse(is_deterministic(self.full2_unamb))
        self.assertFalse(is_reverse_deterministic(self.full2_unamb))

    def test_trim_drops_stranded_states(self):
        a = Automaton.build(["1", "2"], ["0", "1"], [("1", "0", "1"), ("1", "1", "2")])
        trimmed = trim(a)
        self.assertEqual(trimmed.states, ("1",))
        self.assertEqual(trimmed.transitions, (Transition("1", "0", "1"),))
        self.assertIs(trim(self.golden), self.golden)


class RunTests(BaseAutomatonTestCase):

    def test_count_runs_with_and_without_end_state(self):
        self.assertEqual(count_runs(self.golden_amb, "2", "00", end="1"), 2)
        self.assertEqual(count_runs(self.golden_amb, "2", "00"), 3)
        self.assertEqual(count_runs(self.full2_revdet, "1", "0"), 2)
        self.assertEqual(count_runs(self.golden, "1", "11"), 0)
        self.assertEqual(count_runs(self.golden, "1", ""), 1)

    def test_count_runs_does_not_overflow(self):
        # 2^200 runs of length 200 from the single state.
        a = Automaton.build(["1"], ["0"], [("1", "0", "1")])
        doubled = Automaton.build(["1", "2"], ["0"], [("1", "0", "1"), ("1", "0", "2"), ("2", "0", "1"), ("2", "0", "2")])
        self.assertEqual(count_runs(a, "1", "0" * 200), 1)
        self.assertEqual(count_runs(doubled, "1", "0" * 200), 2 ** 200)

    def test_count_runs_rejects_unknown_symbol(self):
        with self.assertRaises(AlphabetError):
            count_runs(self.golden, "1", "2")

    def test_read_and_past(self):
        self.assertEqual(read(self.golden_amb, {"2"}, "0"), frozenset({"1", "2"}))
        self.assertTrue(in_past(self.golden, "01", "2"))
        self.assertFalse(in_past(self.golden, "11", "2"))


class AmbiguityTests(BaseAutomatonTestCase):

    def test_unambiguous_presentations(self):
        for a in (self.golden, self.golden_revdet, self.full2_det, self.full2_revdet, self.full2_unamb,
                  fixture_automaton('full3_unamb')):
            verdict = check_unambiguous(a)
            self.assertTrue(verdict.unambiguous, a)
            self.assertIsNone(verdict.witness)

    def test_ambiguous_presentation_has_shortest_witness(self):
        verdict = check_unambiguous(self.golden_amb)
        self.assertFalse(verdict.unambiguous)
        witness = verdict.witness
        self.assertEqual(witness.label, ("0", "0"))
        self.assertEqual(witness.state_sequences, (("2", "1", "1"), ("2", "2", "1")))
        self.assertEqual((witness.start, witness.end), ("2", "1"))

    def test_witness_runs_replay(self):
        witness = check_unambiguous(self.golden_amb).witness
        self.assertNotEqual(witness.run1, witness.run2)
        self.assertTrue(replay(self.golden_amb, witness.start, witness.run1))
        self.assertTrue(replay(self.golden_amb, witness.start, witness.run2))

    def test_random_witnesses_are_genuine(self):
        for a in random_automata(11, 100):
            verdict = check_unambiguous(a)
            if verdict.unambiguous:
                continue
            w = verdict.witness
            self.assertTrue(replay(a, w.start, w.run1))
            self.assertTrue(replay(a, w.start, w.run2))
            self.assertNotEqual(w.run1, w.run2)
            self.assertEqual(w.run1[-1].target, w.run2[-1].target)
            self.assertGreaterEqual(count_runs(a, w.start, w.label, end=w.end), 2)

    def test_diverged_pairs(self):
        self.assertIn(("2", "1", "2"), diverged_pairs(self.golden_amb))
        self.assertEqual(diverged_pairs(self.golden), set())


class DeterminizationTests(BaseAutomatonTestCase):

    def test_subset_construction_names_states(self):
        det = determinize_futures(self.full2_unamb, self.full2_unamb.states)
        self.assertEqual(det.start, "{1,2,3,4}")
        self.assertEqual(set(det.states), {"{1,2,3,4}", "{1,3}", "{2,4}"})
        self.assertEqual(det.walk("{1,3}", "10"), "{1,3}")
        self.assertIsNone(DeterministicCover(underlying=self.golden).walk("1", "11"))

    def test_cover_rejects_nondeterministic_automaton(self):
        with self.assertRaises(NotDeterministicError):
            DeterministicCover(underlying=self.golden_revdet)

    def test_fischer_cover_of_golden_mean(self):
        cover = fischer_cover(self.golden)
        self.assertEqual(cover.states, ("1", "2"))
        self.assertTrue(is_isomorphic(cover, self.golden))

    def test_fischer_cover_of_ambiguous_presentation(self):
        cover = fischer_cover(self.golden_amb)
        self.assertEqual(cover.states, ("{1,2}", "2"))
        self.assertTrue(is_isomorphic(cover, self.golden))

    def test_fischer_cover_of_full_shift_presentations(self):
        for a in (self.full2_det, self.full2_revdet, self.full2_unamb):
            cover = fischer_cover(a)
            self.assertEqual(len(cover.states), 1)
            self.assertTrue(is_isomorphic(cover, self.full2))

    def test_fischer_cover_requires_irreducibility(self):
        a = Automaton.build(["1", "2"], ["0", "1"], [("1", "0", "1"), ("1", "1", "2"), ("2", "0", "2")])
        with self.assertRaises(HypothesisError):
            fischer_cover(a)

    def test_fischer_cover_is_presentation_independent(self):
        for a in random_automata(5, 60):
            cover = fischer_cover(a)
            self.assertTrue(shift_language_equal(cover.underlying, a).equal)
            self.assertTrue(is_isomorphic(cover, fischer_cover(cover.underlying)))


class SynchronizingWordTests(BaseAutomatonTestCase):

    def test_golden_mean_cover(self):
        cover = fischer_cover(self.golden)
        self.assertEqual(synchronizing_word(cover), ("0",))
        self.assertEqual(synchronizing_extension(cover, "2"), ("0",))

    def test_cycle_has_none(self):
        self.assertIsNone(synchronizing_word(self.cycle(3)))
        self.assertEqual(synchronizing_word(self.cycle(1)), ())

    def test_nondeterministic_input_rejected(self):
        with self.assertRaises(NotDeterministicError):
            synchronizing_word(self.golden_amb)

    def test_fischer_covers_synchronize(self):
        for a in random_automata(7, 60):
            cover = fischer_cover(a)
            word = synchronizing_word(cover)
            self.assertIsNotNone(word)
            self.assertEqual(len(read(cover.underlying, cover.states, word)), 1)


class LanguageTests(BaseAutomatonTestCase):

    def test_factor_counts(self):
        self.assertEqual([factor_count(self.golden, n) for n in range(1, 6)], [2, 3, 5, 8, 13])
        self.assertEqual(factor_count(self.golden_amb, 10), factor_count(self.golden, 10))
        self.assertEqual(factor_count(self.full2, 10), 1024)

    def test_proper_subshift_has_fewer_factors(self):
        for n in (5, 10, 20):
            self.assertLess(factor_count(self.golden, n), factor_count(self.full2, n))
        self.assertLess(entropy_estimate(self.golden, 20), entropy_estimate(self.full2, 20))

    def test_language_difference(self):
        self.assertEqual(language_difference(self.golden, self.golden.states, self.full2, self.full2.states),
                         ("1", "1"))
        self.assertIsNone(language_included(self.golden, self.golden.states, self.full2, self.full2.states))
        self.assertEqual(language_included(self.full2, self.full2.states, self.golden, self.golden.states),
                         ("1", "1"))

    def test_same_shift_in_different_presentations(self):
        self.assertTrue(shift_language_equal(self.golden, self.golden_revdet).equal)
        self.assertTrue(shift_language_equal(self.golden, self.golden_amb).equal)
        self.assertTrue(shift_language_equal(self.full2_revdet, self.full2_unamb).equal)
        comparison = shift_language_equal(self.golden, self.full2)
        self.assertFalse(comparison.equal)
        self.assertEqual(format_word(comparison.counterexample), "11")

    def test_future_intersections(self):
        self.assertIsNone(intersect_futures(self.full2_revdet, "1", "2"))
        recognizer = intersect_futures(self.golden_amb, "1", "2")
        self.assertEqual(recognizer.start, "1|2")
        self.assertEqual(recognizer.walk("1|2", "0"), "1|{1,2}")
        self.assertIsNone(recognizer.walk("1|2", "1"))

    def test_isomorphism_is_label_preserving(self):
        swapped = Automaton.build(["a", "b"], ["0", "1"], [("b", "0", "b"), ("b", "1", "a"), ("a", "0", "b")])
        self.assertTrue(is_isomorphic(self.golden, swapped))
        self.assertFalse(is_isomorphic(self.golden, self.full2_det))
