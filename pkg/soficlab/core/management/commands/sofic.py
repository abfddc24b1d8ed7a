"""
``python manage.py sofic <sub-command> ...``: the command-line front end.

Exit codes: 0 when the result was computed, 1 when a boolean query answers
false (the report is still written), 2 for input and hypothesis errors.
"""
import argparse
import hashlib
import logging
import math
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from rest_framework.renderers import JSONRenderer

from core import __version__
from core import serializers as report_serializers
from core.automata import check_unambiguous, format_word, is_deterministic, parse_word, scc_decompose, validate
from core.dot import automaton_to_dot, pair_graph_to_dot
from core.exceptions import ConvergenceError, SoficError, VerificationError
from core.fileformats import dump_automaton, load_automaton, load_measure
from core.measure import cylinder_union_measure, prefix_antichain, support_matches_factors, word_measure
from core.measure_ambiguity import BifutureAnalysis, bifuture_term_measure, build_pair_graph, theorem2_check
from core.simulation import SampleConfig, estimate_bifuture
from core.spectral import adjacency, entropy, spectral_radius, theorem1_check
from core.subshift import determinize_futures, fischer_cover, synchronizing_word

logger = logging.getLogger(__name__)

GENERATOR = "PCG64"


class PropertyFalse(Exception):
    """Raised by a handler after writing its report when the queried property does not hold."""


def _runs(run):
    if not run:
        return ""
    return "→".join([run[0].source] + [t.target for t in run])


def _finite(value):
    return value if math.isfinite(value) else None


def _cover_payload(cover):
    a = cover.underlying
    subsets = None
    if cover.subset_map is not None:
        subsets = {s: [str(x) for x in sorted(cover.subset_map[s], key=str)] for s in a.states}
    return {'states': list(a.states), 'transitions': list(a.transitions), 'subsets': subsets}


def _term_payload(term):
    if term is None:
        return None
    return {
        'origin': term.origin, 'word': term.word, 'branch_state': term.branch_state,
        'symbol': term.symbol, 'targets': list(term.targets), 'measure_state': term.measure_state,
    }


class Command(BaseCommand):
    help = "Decision procedures for sofic shifts: ambiguity, entropy, measures of bi-futures."

    def add_arguments(self, parser):
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument('--json', action='store_true', help="Write a machine-readable JSON report.")

        automaton = argparse.ArgumentParser(add_help=False)
        automaton.add_argument('automaton', help="Automaton file (.aut).")

        measure = argparse.ArgumentParser(add_help=False)
        measure.add_argument('--measure', required=True, help="Measure file (.msr).")

        tolerance = argparse.ArgumentParser(add_help=False)
        tolerance.add_argument('--tol', type=float, default=None, help="Tolerance for spectral computations.")

        state = argparse.ArgumentParser(add_help=False)
        state.add_argument('-q', '--state', required=True, help="State of the automaton.")

        sub = parser.add_subparsers(dest='subcommand', required=True, metavar='sub-command')
        sub.add_parser('validate', parents=[common, automaton], help="Parse and validate an automaton.")
        sub.add_parser('scc', parents=[common, automaton], help="Strongly connected components.")
        sub.add_parser('unambiguous', parents=[common, automaton], help="Pair-graph ambiguity check.")
        sub.add_parser('fischer', parents=[common, automaton], help="Fischer cover of an irreducible sofic shift.")
        sub.add_parser('syncword', parents=[common, automaton], help="Synchronizing word.")
        sub.add_parser('entropy', parents=[common, automaton], help="Entropy (natural log).")
        sub.add_parser('spectral', parents=[common, automaton, tolerance], help="Spectral radius of the adjacency matrix.")
        theorem1 = sub.add_parser('theorem1', parents=[common, automaton, tolerance],
                                  help="Unambiguity / acceptance / entropy two-of-three check.")
        theorem1.add_argument('--shift', required=True, help="Shift-space automaton presenting X.")
        word = sub.add_parser('measure-word', parents=[common, measure], help="Exact measure of a word.")
        word.add_argument('-w', '--word', required=True)
        cylinders = sub.add_parser('cylinders', parents=[common, measure], help="Exact measure of a union of cylinders.")
        cylinders.add_argument('-w', '--word', action='append', required=True, dest='words')
        sub.add_parser('support-check', parents=[common, automaton, measure], help="Compare supp(mu) with the factors.")
        sub.add_parser('bifuture-null', parents=[common, automaton, measure, state], help="Decide mu(bifut(q)) = 0.")
        sub.add_parser('theorem2', parents=[common, automaton, measure], help="Unambiguity vs. null bi-futures.")
        estimate = sub.add_parser('estimate', parents=[common, automaton, measure, state],
                                  help="Monte-Carlo estimate of mu(bifut(q)).")
        estimate.add_argument('-L', '--prefix-length', type=int, default=None)
        estimate.add_argument('-N', '--trials', type=int, default=None)
        estimate.add_argument('--seed', type=int, default=None)
        estimate.add_argument('--workers', type=int, default=None)
        dot = sub.add_parser('export-dot', parents=[automaton], help="DOT graph of the automaton or a pair graph.")
        dot.add_argument('--measure', default=None)
        dot.add_argument('-q', '--state', default=None)
        sub.add_parser('export', parents=[automaton], help="Re-emit the automaton in the .aut format.")

    def handle(self, *args, **options):
        subcommand = options['subcommand']
        self.options = options
        self.digests = {}
        handler = getattr(self, 'handle_' + subcommand.replace('-', '_'))
        try:
            handler(**options)
        except PropertyFalse as exc:
            raise CommandError(str(exc), returncode=1)
        except (VerificationError, ConvergenceError) as exc:
            logger.error(f"{subcommand} failed: {exc}", exc_info=True)
            raise CommandError(str(exc), returncode=2)
        except SoficError as exc:
            raise CommandError(str(exc), returncode=2)
        except OSError as exc:
            raise CommandError(f"cannot read input: {exc}", returncode=2)

    # --- Helpers ---

    def _digest(self, path):
        self.digests[str(path)] = hashlib.sha256(Path(path).read_bytes()).hexdigest()

    def _automaton(self, path, strict=True):
        a = load_automaton(path, strict=strict)
        self._digest(path)
        return a

    def _measure(self, path):
        mu = load_measure(path)
        self._digest(path)
        return mu

    def _emit(self, serializer_class, payload, lines):
        if self.options.get('json'):
            payload = {'command': self.options['subcommand'], 'version': __version__, 'inputs': self.digests, **payload}
            data = serializer_class(payload).data
            self.stdout.write(JSONRenderer().render(data, renderer_context={'indent': 2}).decode())
        else:
            for line in lines:
                self.stdout.write(line)

    # --- Sub-commands ---

    def handle_validate(self, automaton, **options):
        a = self._automaton(automaton, strict=False)
        errors = validate(a)
        deterministic = not errors and is_deterministic(a)
        lines = [f"valid: {a}"] if not errors else [f"invalid: {error}" for error in errors]
        lines += [f"deterministic: {'yes' if deterministic else 'no'}",
                  f"shift-space mode: {'yes' if a.is_shift_mode else 'no'}"]
        self._emit(report_serializers.ValidateReportSerializer, {
            'valid': not errors, 'errors': errors, 'states': len(a.states), 'transitions': len(a.transitions),
            'deterministic': deterministic, 'shift_mode': a.is_shift_mode,
        }, lines)
        if errors:
            raise PropertyFalse(f"{automaton} is not a valid automaton")

    def handle_scc(self, automaton, **options):
        a = self._automaton(automaton)
        components = scc_decompose(a)
        lines = [f"{'recurrent' if c.recurrent else 'transient'}: {{{', '.join(c.states)}}}" for c in components]
        self._emit(report_serializers.SccReportSerializer, {
            'strongly_connected': len(components) == 1,
            'components': [{'states': list(c.states), 'recurrent': c.recurrent} for c in components],
        }, lines)

    def handle_unambiguous(self, automaton, **options):
        a = self._automaton(automaton)
        verdict = check_unambiguous(a)
        if verdict.unambiguous:
            lines = ["unambiguous"]
        else:
            w = verdict.witness
            lines = [f"ambiguous; witness: word {format_word(w.label)}, runs {_runs(w.run1)} and {_runs(w.run2)}"]
        self._emit(report_serializers.AmbiguityReportSerializer,
                   {'unambiguous': verdict.unambiguous, 'witness': verdict.witness}, lines)
        if not verdict.unambiguous:
            raise PropertyFalse("the automaton is ambiguous")

    def handle_fischer(self, automaton, **options):
        a = self._automaton(automaton)
        cover = fischer_cover(a)
        lines = [f"Fischer cover: {len(cover.states)} states"]
        lines.extend(f"  {p} -{symbol}-> {q}" for p, symbol, q in cover.underlying.transitions)
        self._emit(report_serializers.FischerReportSerializer, {'cover': _cover_payload(cover)}, lines)

    def handle_syncword(self, automaton, **options):
        a = self._automaton(automaton)
        word = synchronizing_word(a if is_deterministic(a) else fischer_cover(a))
        lines = ["no synchronizing word"] if word is None else [f"synchronizing word: {format_word(word)}"]
        self._emit(report_serializers.SyncWordReportSerializer,
                   {'synchronizing': word is not None, 'word': word}, lines)
        if word is None:
            raise PropertyFalse("no synchronizing word exists")

    def handle_entropy(self, automaton, **options):
        a = self._automaton(automaton)
        cover = fischer_cover(a)
        h = entropy(a, cover=cover)
        self._emit(report_serializers.EntropyReportSerializer,
                   {'entropy': _finite(h), 'cover_states': len(cover.states)}, [f"{h:.6f}"])

    def handle_spectral(self, automaton, tol=None, **options):
        a = self._automaton(automaton)
        m = adjacency(a)
        tol = tol if tol is not None else getattr(settings, 'SPECTRAL_TOLERANCE', 1e-12)
        report = spectral_radius(m, tol=tol)
        self._emit(report_serializers.SpectralReportSerializer, {
            'matrix': [list(row) for row in m.entries], 'radius': report.radius,
            'log_radius': _finite(report.log_radius),
            'iterations': report.iterations, 'residual': report.residual, 'tolerance': tol,
        }, [f"spectral radius: {report.radius:.10f}", f"log radius: {report.log_radius:.10f}",
            f"iterations: {report.iterations}, residual: {report.residual:.3e}"])

    def handle_theorem1(self, automaton, shift, tol=None, **options):
        a = self._automaton(automaton)
        x = self._automaton(shift)
        report = theorem1_check(a, x, tol=tol)
        lines = [
            f"(i) unambiguous: {report.unambiguous}",
            f"(ii) accepts X: {report.accepts_shift}",
            f"(iii) log spectral radius {report.log_radius:.10f} = entropy {report.entropy:.10f}: {report.entropy_matches}",
            f"consistent: {report.consistent}",
        ]
        payload = dict(vars(report), log_radius=_finite(report.log_radius), entropy=_finite(report.entropy))
        self._emit(report_serializers.Theorem1ReportSerializer, payload, lines)
        if not report.consistent:
            raise PropertyFalse("exactly two of the three conditions hold")

    def handle_measure_word(self, measure, word, **options):
        mu = self._measure(measure)
        w = parse_word(mu.alphabet, word)
        value = word_measure(mu, w)
        self._emit(report_serializers.MeasureWordReportSerializer, {'word': w, 'measure': value},
                   [f"mu({format_word(w)}) = {value}"])

    def handle_cylinders(self, measure, words, **options):
        mu = self._measure(measure)
        parsed = [parse_word(mu.alphabet, w) for w in words]
        value = cylinder_union_measure(mu, parsed)
        self._emit(report_serializers.CylindersReportSerializer,
                   {'words': parsed, 'antichain': prefix_antichain(parsed), 'measure': value},
                   [f"mu(union of {len(parsed)} cylinders) = {value}"])

    def handle_support_check(self, automaton, measure, **options):
        a = self._automaton(automaton)
        mu = self._measure(measure)
        comparison = support_matches_factors(mu, a)
        lines = ["support equals the factor language"] if comparison.equal else [
            f"support differs from the factor language on {format_word(comparison.counterexample)}"]
        self._emit(report_serializers.SupportCheckReportSerializer,
                   {'equal': comparison.equal, 'counterexample': comparison.counterexample}, lines)
        if not comparison.equal:
            raise PropertyFalse("the support of the measure is not the factor language")

    def handle_bifuture_null(self, automaton, measure, state, **options):
        a = self._automaton(automaton)
        mu = self._measure(measure)
        if state not in a.index:
            raise CommandError(f"unknown state {state!r}", returncode=2)
        term = BifutureAnalysis(a, mu).positive_term(state)
        term_measure = None
        if term is None:
            lines = [f"mu(bifut({state})) = 0"]
        else:
            term_measure = bifuture_term_measure(a, state, term.prefix, term.symbol, *term.targets, mu)
            lines = [f"mu(bifut({state})) > 0; term {format_word(term.word)}(Fut({term.targets[0]}) ∩ "
                     f"Fut({term.targets[1]})) has measure {term_measure}"]
        self._emit(report_serializers.BifutureReportSerializer, {
            'state': state, 'null': term is None, 'term': _term_payload(term), 'term_measure': term_measure,
        }, lines)
        if term is not None:
            raise PropertyFalse(f"mu(bifut({state})) is positive")

    def handle_theorem2(self, automaton, measure, **options):
        a = self._automaton(automaton)
        mu = self._measure(measure)
        report = theorem2_check(a, mu)
        lines = [f"hypotheses: {'ok' if report.hypotheses_ok else 'FAIL'}"]
        lines.extend(f"  {reason}" for reason in report.reasons)
        lines += [
            f"unambiguous: {report.unambiguous}",
            f"all bi-futures null: {report.all_bifutures_null}",
            f"equivalence holds: {report.equivalence_holds}",
        ]
        payload = dict(vars(report), positive_term=_term_payload(report.positive_term))
        self._emit(report_serializers.Theorem2ReportSerializer, payload, lines)
        if not report.equivalence_holds:
            raise PropertyFalse("unambiguity and bi-future nullity disagree")

    def handle_estimate(self, automaton, measure, state, prefix_length=None, trials=None, seed=None,
                        workers=None, **options):
        a = self._automaton(automaton)
        mu = self._measure(measure)
        if state not in a.index:
            raise CommandError(f"unknown state {state!r}", returncode=2)
        try:
            cfg = SampleConfig(seed=seed, prefix_length=prefix_length, trials=trials)
        except ValueError as exc:
            raise CommandError(str(exc), returncode=2)
        result = estimate_bifuture(a, state, mu, cfg, workers=workers)
        lo, hi = result.wilson_interval
        self._emit(report_serializers.EstimateReportSerializer, dict(vars(result), state=state, generator=GENERATOR), [
            f"estimate of mu(bifut({state})): {result.estimate:.6f}  95% interval [{lo:.6f}, {hi:.6f}]",
            f"L = {result.prefix_length}, N = {result.trials}, seed = {result.seed} ({GENERATOR})",
        ])

    def handle_export_dot(self, automaton, measure=None, state=None, **options):
        a = self._automaton(automaton)
        if measure is None:
            self.stdout.write(automaton_to_dot(a), ending="")
            return
        if state is None:
            raise CommandError("--measure needs -q to choose the future set", returncode=2)
        if state not in a.index:
            raise CommandError(f"unknown state {state!r}", returncode=2)
        mu = self._measure(measure)
        det = determinize_futures(a, {state})
        self.stdout.write(pair_graph_to_dot(build_pair_graph(mu, det, det.start)), ending="")

    def handle_export(self, automaton, **options):
        self.stdout.write(dump_automaton(self._automaton(automaton)), ending="")
