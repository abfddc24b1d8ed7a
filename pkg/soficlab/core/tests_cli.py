import json
import tempfile
from io import StringIO
from pathlib import Path
from unittest.mock import patch

from django.apps import apps
from django.core.management import call_command
from django.core.management.base import CommandError
from django.db import connections
from django.test import SimpleTestCase, override_settings

from core import __version__
from .exceptions import VerificationError
from .fileformats import parse_automaton
from .subshift import fischer_cover
from .testing import fixture_automaton, fixture_path


class BaseCommandTestCase(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def sofic(self, *args):
        out = StringIO()
        call_command("sofic", *[str(arg) for arg in args], stdout=out)
        return out.getvalue()

    def sofic_fails(self, returncode, *args):
        out = StringIO()
        with self.assertRaises(CommandError) as ctx:
            call_command("sofic", *[str(arg) for arg in args], stdout=out)
        self.assertEqual(ctx.exception.returncode, returncode)
        return out.getvalue(), ctx.exception

    def sofic_json(self, *args):
        return json.loads(self.sofic(*args, "--json"))

    def write_automaton(self, text, name="input.aut"):
        path = Path(self.tmp.name) / name
        path.write_text(text, encoding="utf-8")
        return path


class AutomatonCommandTests(BaseCommandTestCase):

    def test_validate(self):
        output = self.sofic("validate", fixture_path('golden_amb.aut'))
        self.assertIn("valid: Automaton(2 states, 4 transitions over {0, 1})", output)
        self.assertIn("deterministic: no", output)
        self.assertIn("shift-space mode: yes", output)

    def test_validate_json_report(self):
        report = self.sofic_json("validate", fixture_path('golden.aut'))
        self.assertEqual(report['command'], "validate")
        self.assertEqual(report['version'], __version__)
        self.assertTrue(report['valid'])
        self.assertTrue(report['deterministic'])
        self.assertEqual(len(report['inputs'][str(fixture_path('golden.aut'))]), 64)

    def test_scc(self):
        report = self.sofic_json("scc", fixture_path('full2_unamb.aut'))
        self.assertTrue(report['strongly_connected'])
        self.assertEqual(report['components'], [{'states': ["1", "2", "3", "4"], 'recurrent': True}])

    def test_ambiguous_automaton_exits_with_one(self):
        output, error = self.sofic_fails(1, "unambiguous", fixture_path('golden_amb.aut'))
        self.assertIn("ambiguous; witness: word 00", output)
        self.assertIn("2→", output)
        self.assertIn("ambiguous", str(error))

    def test_unambiguous_json(self):
        report = self.sofic_json("unambiguous", fixture_path('full2_unamb.aut'))
        self.assertTrue(report['unambiguous'])
        self.assertIsNone(report['witness'])

    def test_ambiguity_witness_json(self):
        output, _ = self.sofic_fails(1, "unambiguous", fixture_path('golden_amb.aut'), "--json")
        witness = json.loads(output)['witness']
        self.assertEqual(witness['label'], "00")
        self.assertNotEqual(witness['run1'], witness['run2'])

    def test_fischer_cover_of_the_full_shift(self):
        output = self.sofic("fischer", fixture_path('full2_unamb.aut'))
        self.assertIn("Fischer cover: 1 states", output)

    def test_fischer_json_lists_subsets(self):
        report = self.sofic_json("fischer", fixture_path('golden_amb.aut'))
        self.assertEqual(report['cover']['states'], ["{1,2}", "2"])
        self.assertEqual(report['cover']['subsets']["2"], ["2"])

    def test_synchronizing_word(self):
        self.assertIn("synchronizing word: 0", self.sofic("syncword", fixture_path('golden.aut')))

    def test_cycle_has_no_synchronizing_word(self):
        path = self.write_automaton("alphabet: 0\nstates: 1 2\ntrans: 1 0 2\ntrans: 2 0 1\n")
        output, _ = self.sofic_fails(1, "syncword", path)
        self.assertIn("no synchronizing word", output)

    def test_entropy(self):
        self.assertEqual(self.sofic("entropy", fixture_path('golden.aut')).strip(), "0.481212")

    @patch('core.management.commands.sofic.fischer_cover', wraps=fischer_cover)
    def test_entropy_builds_the_cover_once(self, mock_cover):
        report = self.sofic_json("entropy", fixture_path('golden_amb.aut'))
        self.assertEqual(report['cover_states'], 2)
        self.assertAlmostEqual(report['entropy'], 0.4812118250596, places=9)
        mock_cover.assert_called_once()

    def test_spectral_json(self):
        report = self.sofic_json("spectral", fixture_path('full2_unamb.aut'), "--tol", "1e-10")
        self.assertEqual(report['matrix'][3][2], 2)
        self.assertAlmostEqual(report['radius'], 2.0, places=8)
        self.assertEqual(report['tolerance'], 1e-10)

    @override_settings(SPECTRAL_MAX_ITERATIONS=1)
    def test_non_convergence_is_logged_once_as_an_error(self):
        with self.assertLogs('core', 'WARNING') as logs:
            self.sofic_fails(2, "spectral", fixture_path('golden.aut'))
        self.assertEqual([record.levelname for record in logs.records], ['WARNING', 'ERROR'])
        self.assertIn("spectral failed", logs.output[1])

    def test_theorem1(self):
        output = self.sofic("theorem1", fixture_path('golden_amb.aut'), "--shift", fixture_path('golden.aut'))
        self.assertIn("(i) unambiguous: False", output)
        self.assertIn("(ii) accepts X: True", output)
        self.assertIn("consistent: True", output)

    def test_theorem1_json(self):
        report = self.sofic_json("theorem1", fixture_path('golden.aut'), "--shift", fixture_path('full2.aut'))
        self.assertEqual((report['i'], report['ii'], report['iii']), (True, False, False))
        self.assertEqual(report['counterexample'], "11")

    def test_export_round_trip(self):
        output = self.sofic("export", fixture_path('full2_unamb.aut'))
        self.assertEqual(parse_automaton(output), fixture_automaton('full2_unamb'))

    def test_export_dot(self):
        output = self.sofic("export-dot", fixture_path('golden_amb.aut'))
        self.assertTrue(output.startswith('digraph "automaton"'))
        self.assertIn('"2" -> "1" [label="0"];', output)

    def test_export_pair_graph(self):
        output = self.sofic("export-dot", fixture_path('golden.aut'), "--measure", fixture_path('golden_markov.msr'),
                            "-q", "1")
        self.assertTrue(output.startswith('digraph "pair_graph"'))

    def test_pair_graph_needs_a_state(self):
        self.sofic_fails(2, "export-dot", fixture_path('golden.aut'), "--measure", fixture_path('golden_markov.msr'))


class MeasureCommandTests(BaseCommandTestCase):

    def test_measure_word(self):
        output = self.sofic("measure-word", "--measure", fixture_path('golden_markov.msr'), "-w", "1")
        self.assertEqual(output.strip(), "mu(1) = 1/4")

    def test_measure_word_json_is_exact(self):
        report = self.sofic_json("measure-word", "--measure", fixture_path('bernoulli.msr'), "-w", "011")
        self.assertEqual(report['measure'], "4/27")

    def test_cylinders(self):
        report = self.sofic_json("cylinders", "--measure", fixture_path('uniform2.msr'),
                                 "-w", "00", "-w", "11", "-w", "0110", "-w", "1001")
        self.assertEqual(report['measure'], "5/8")
        self.assertEqual(report['antichain'], ["00", "11", "0110", "1001"])

    def test_support_check(self):
        output, _ = self.sofic_fails(1, "support-check", fixture_path('golden.aut'),
                                     "--measure", fixture_path('uniform2.msr'))
        self.assertIn("support differs from the factor language on 11", output)
        self.assertIn("support equals", self.sofic("support-check", fixture_path('golden.aut'),
                                                   "--measure", fixture_path('golden_markov.msr')))

    def test_bifuture_null(self):
        output = self.sofic("bifuture-null", fixture_path('full2_unamb.aut'), "--measure", fixture_path('uniform2.msr'),
                            "-q", "1")
        self.assertIn("mu(bifut(1)) = 0", output)

    def test_positive_bifuture_exits_with_one(self):
        output, _ = self.sofic_fails(1, "bifuture-null", fixture_path('full2_unamb.aut'),
                                     "--measure", fixture_path('periodic.msr'), "-q", "1", "--json")
        report = json.loads(output)
        self.assertFalse(report['null'])
        self.assertEqual(report['term_measure'], "1/2")

    def test_unknown_state(self):
        self.sofic_fails(2, "bifuture-null", fixture_path('full2_unamb.aut'), "--measure", fixture_path('uniform2.msr'),
                         "-q", "9")

    def test_theorem2_holds(self):
        output = self.sofic("theorem2", fixture_path('golden_amb.aut'), "--measure", fixture_path('golden_markov.msr'))
        self.assertIn("hypotheses: ok", output)
        self.assertIn("unambiguous: False", output)
        self.assertIn("equivalence holds: True", output)

    def test_theorem2_json_for_unambiguous_full_shift(self):
        report = self.sofic_json("theorem2", fixture_path('full2_unamb.aut'), "--measure", fixture_path('uniform2.msr'))
        self.assertTrue(report['hypotheses_ok'])
        self.assertTrue(report['unambiguous'])
        self.assertTrue(report['all_bifutures_null'])
        self.assertTrue(report['equivalence_holds'])
        self.assertIsNone(report['witness'])

    def test_theorem2_with_failed_hypotheses(self):
        with self.assertLogs('core', 'WARNING'):
            output, _ = self.sofic_fails(1, "theorem2", fixture_path('golden_amb.aut'),
                                         "--measure", fixture_path('uniform2.msr'))
        self.assertIn("hypotheses: FAIL", output)
        self.assertIn("support of the measure differs", output)

    @patch('core.management.commands.sofic.theorem2_check', side_effect=VerificationError("witness check failed"))
    def test_verification_errors_are_logged(self, mock_check):
        with self.assertLogs('core', 'ERROR') as logs:
            _, error = self.sofic_fails(2, "theorem2", fixture_path('golden_amb.aut'),
                                        "--measure", fixture_path('golden_markov.msr'))
        self.assertIn("witness check failed", str(error))
        self.assertIn("theorem2 failed", logs.output[0])
        mock_check.assert_called_once()

    def test_estimate_json(self):
        report = self.sofic_json("estimate", fixture_path('full2_unamb.aut'), "--measure", fixture_path('periodic.msr'),
                                 "-q", "1", "-L", "10", "-N", "400", "--seed", "3")
        self.assertEqual(report['generator'], "PCG64")
        self.assertEqual((report['trials'], report['prefix_length'], report['seed']), (400, 10, 3))
        lo, hi = report['wilson_interval']
        self.assertLessEqual(lo, report['estimate'])
        self.assertLessEqual(report['estimate'], hi)

    def test_estimate_rejects_bad_lengths(self):
        self.sofic_fails(2, "estimate", fixture_path('full2_unamb.aut'), "--measure", fixture_path('uniform2.msr'),
                         "-q", "1", "-N", "0")


class InputErrorTests(BaseCommandTestCase):

    def test_missing_file(self):
        _, error = self.sofic_fails(2, "validate", Path(self.tmp.name) / "missing.aut")
        self.assertIn("cannot read input", str(error))

    def test_format_error_carries_the_location(self):
        path = self.write_automaton("alphabet: 0 1\nstates: 1 2\ntrans: 1 2 1\n")
        _, error = self.sofic_fails(2, "scc", path)
        self.assertEqual(str(error), f"{path}:3:10: unknown symbol '2'")

    def test_layout_errors_stop_validate(self):
        path = self.write_automaton("alphabet: 0 1\nstates: 1 2\ntrans: 1 0\n")
        _, error = self.sofic_fails(2, "validate", path)
        self.assertIn(":3:1: 'trans' takes 3 fields", str(error))

    def test_validate_reports_undeclared_references(self):
        path = self.write_automaton("alphabet: 0 1\nstates: 1 2\ninitial: 1 7\ntrans: 1 2 1\ntrans: 1 0 2\n")
        output, error = self.sofic_fails(1, "validate", path, "--json")
        report = json.loads(output)
        self.assertFalse(report['valid'])
        self.assertFalse(report['deterministic'])
        self.assertEqual(report['errors'], [
            "transition (1, 2, 1) references unknown symbol '2'",
            "initial states not declared: 7",
        ])
        self.assertEqual(report['transitions'], 2)
        self.assertIn("not a valid automaton", str(error))

    def test_validate_text_lists_every_error(self):
        path = self.write_automaton("alphabet: 0\nstates: 1\ntrans: 1 0 3\n")
        output, _ = self.sofic_fails(1, "validate", path)
        self.assertIn("invalid: transition (1, 0, 3) references unknown state '3'", output)
        self.assertNotIn("valid: Automaton", output)

    def test_measure_alphabet_mismatch(self):
        self.sofic_fails(2, "support-check", fixture_path('golden.aut'), "--measure", fixture_path('uniform3.msr'))


class SettingsTests(BaseCommandTestCase):

    def test_reports_need_no_database_or_auth_app(self):
        self.assertFalse(apps.is_installed('django.contrib.auth'))
        self.assertFalse(apps.is_installed('django.contrib.contenttypes'))
        self.assertEqual(connections['default'].settings_dict['ENGINE'], 'django.db.backends.dummy')
        report = self.sofic_json("validate", fixture_path('golden.aut'))
        self.assertTrue(report['valid'])
