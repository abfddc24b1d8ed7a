from fractions import Fraction

from django.test import SimpleTestCase

from .automata import validate
from .exceptions import FileFormatError
from .fileformats import dump_automaton, dump_measure, load_automaton, parse_automaton, parse_measure
from .measure import make_markov_from_cover
from .subshift import fischer_cover
from .testing import fixture_automaton, fixture_measure, fixture_path, random_automata

HEADER = "alphabet: 0 1\nstates: 1 2\n"


class AutomatonFormatTests(SimpleTestCase):

    def assertFormatError(self, text, line=None, column=None, message=None):
        with self.assertRaises(FileFormatError) as ctx:
            parse_automaton(text, path="input.aut")
        self.assertEqual((ctx.exception.line, ctx.exception.column), (line, column))
        if message:
            self.assertIn(message, ctx.exception.message)
        return ctx.exception

    def test_fixture_is_parsed(self):
        a = load_automaton(fixture_path('golden_amb.aut'))
        self.assertEqual(a.states, ("1", "2"))
        self.assertEqual(a.alphabet, ("0", "1"))
        self.assertEqual(len(a.transitions), 4)
        self.assertTrue(a.is_shift_mode)

    def test_explicit_initial_and_final_states(self):
        a = parse_automaton(HEADER + "initial: 1\nfinal: 2\ntrans: 1 0 2\ntrans: 2 1 1\n")
        self.assertEqual(a.initial, frozenset({"1"}))
        self.assertEqual(a.final, frozenset({"2"}))
        self.assertFalse(a.is_shift_mode)

    def test_comments_and_blank_lines(self):
        a = parse_automaton("# golden mean\n\nalphabet: 0 1   # binary\nstates: 1 2\ntrans: 1 0 1\n\ntrans: 1 1 2\ntrans: 2 0 1\n")
        self.assertEqual(a, fixture_automaton('golden'))

    def test_unknown_symbol_has_a_column(self):
        error = self.assertFormatError(HEADER + "trans: 1 2 1\n", line=3, column=10, message="unknown symbol '2'")
        self.assertEqual(str(error), "input.aut:3:10: unknown symbol '2'")

    def test_unknown_state(self):
        self.assertFormatError(HEADER + "trans: 1 0 3\n", line=3, column=12, message="unknown state '3'")
        self.assertFormatError(HEADER + "initial: 1 7\ntrans: 1 0 1\n", line=3, column=12, message="unknown state '7'")

    def test_lenient_parse_keeps_undeclared_references(self):
        a = parse_automaton(HEADER + "final: 2 9\ntrans: 1 2 3\n", strict=False)
        self.assertEqual(a.transitions, (("1", "2", "3"),))
        self.assertEqual(a.final, frozenset({"2", "9"}))
        self.assertEqual(validate(a), [
            "transition (1, 2, 3) references unknown symbol '2' and unknown state '3'",
            "final states not declared: 9",
        ])

    def test_lenient_parse_still_rejects_layout_errors(self):
        with self.assertRaises(FileFormatError):
            parse_automaton(HEADER + "trans: 1 0 1\ntrans: 1 0 1\n", strict=False)

    def test_duplicate_transition(self):
        self.assertFormatError(HEADER + "trans: 1 0 1\ntrans: 1 0 1\n", line=4, column=8,
                               message="duplicate transition 1 0 1 (first on line 3)")

    def test_wrong_number_of_fields(self):
        self.assertFormatError(HEADER + "trans: 1 0\n", line=3, column=1, message="takes 3 fields")

    def test_missing_header(self):
        self.assertFormatError("states: 1\ntrans: 1 0 1\n", message="missing 'alphabet' line")

    def test_unknown_key(self):
        self.assertFormatError(HEADER + "edges: 1 0 1\n", line=3, column=1, message="unknown key 'edges'")

    def test_repeated_key(self):
        self.assertFormatError(HEADER + "states: 1\n", line=3, column=1, message="given twice")

    def test_round_trip(self):
        for a in [fixture_automaton(name) for name in ('full2_unamb', 'full3_unamb', 'golden_amb')] + random_automata(1, 30):
            self.assertEqual(parse_automaton(dump_automaton(a)), a)

    def test_round_trip_keeps_initial_states(self):
        a = parse_automaton(HEADER + "initial: 2\ntrans: 1 0 2\ntrans: 2 1 1\n")
        dumped = dump_automaton(a)
        self.assertIn("initial: 2\n", dumped)
        self.assertIn("final: *\n", dumped)
        self.assertEqual(parse_automaton(dumped), a)


class MeasureFormatTests(SimpleTestCase):

    def assertFormatError(self, text, line=None, column=None, message=None):
        with self.assertRaises(FileFormatError) as ctx:
            parse_measure(text, path="input.msr")
        self.assertEqual((ctx.exception.line, ctx.exception.column), (line, column))
        if message:
            self.assertIn(message, ctx.exception.message)

    def test_golden_markov_fixture(self):
        mu = fixture_measure('golden_markov')
        self.assertEqual(mu, make_markov_from_cover(fischer_cover(fixture_automaton('golden'))))
        self.assertEqual(mu.pi, (Fraction(1, 2), Fraction(1, 2)))

    def test_missing_block_is_zero(self):
        mu = parse_measure("dim: 1\nalphabet: 0 1\npi: 1\nnu 0:\n1\n")
        self.assertEqual(mu.matrix("1"), ((0,),))

    def test_decimals_are_rejected(self):
        self.assertFormatError("dim: 1\nalphabet: 0 1\npi: 0.5 0.5\n", line=3, column=5, message="not an exact rational")

    def test_zero_denominator(self):
        self.assertFormatError("dim: 1\nalphabet: 0\npi: 1/0\n", line=3, column=5, message="zero denominator")

    def test_row_length(self):
        self.assertFormatError("dim: 2\nalphabet: 0\npi: 1 0\nnu 0:\n1 0\n1\n", line=6, message="expected 2 entries")

    def test_missing_rows(self):
        self.assertFormatError("dim: 2\nalphabet: 0\npi: 1 0\nnu 0:\n1 0\n", line=4, message="has 1 rows, expected 2")

    def test_pi_length(self):
        self.assertFormatError("dim: 2\nalphabet: 0\npi: 1\n", line=3, message="'pi' has 1 entries")

    def test_stochasticity_violation_is_wrapped(self):
        self.assertFormatError("dim: 1\nalphabet: 0 1\npi: 1\nnu 0:\n1/2\nnu 1:\n1/3\n", message="row 1")

    def test_repeated_block(self):
        self.assertFormatError("dim: 1\nalphabet: 0\npi: 1\nnu 0:\n1\nnu 0:\n1\n", line=6, message="second 'nu 0' block")

    def test_round_trip(self):
        for name in ('uniform2', 'uniform3', 'bernoulli', 'periodic', 'golden_markov'):
            mu = fixture_measure(name)
            self.assertEqual(parse_measure(dump_measure(mu)), mu)
