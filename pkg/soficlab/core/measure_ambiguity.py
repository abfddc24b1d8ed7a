"""
Measures of closed regular sets of sequences and the measure-theoretic
ambiguity criterion.

The central object is the weighted pair graph of a rational measure against a
deterministic all-final automaton: vertex (p, q) carries the measure of Fut(q)
for the measure started in state p, and those values are the exact solution of
alpha = M·alpha once recurrent classes are classified.
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .automata import (as_word, check_symbols, check_unambiguous, condense, format_word,
                       is_strongly_connected, read, trim)
from .exceptions import AlphabetError, HypothesisError, VerificationError
from .measure import ONE, ZERO, forward_vector, solve_linear, support_automaton, support_matches_factors
from .subshift import (DeterministicCover, class_representatives, component_cover, determinize_futures,
                       fischer_cover, in_past, intersect_futures, language_difference, language_included, quotient,
                       shift_language_equal, subset_key, synchronizing_extension)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PairClass:
    vertices: tuple
    recurrent: bool
    stochastic: bool = False


@dataclass(frozen=True)
class WeightedPairGraph:
    vertices: tuple
    initial: tuple
    classes: tuple
    weights: dict = field(compare=False, hash=False)
    labels: dict = field(compare=False, hash=False)

    def successors(self, vertex):
        return self.weights.get(vertex, {})

    def row_sum(self, vertex):
        return sum(self.successors(vertex).values(), ZERO)

    @property
    def edge_count(self):
        return sum(len(row) for row in self.weights.values())

    def class_of(self, vertex):
        for cls in self.classes:
            if vertex in cls.vertices:
                return cls
        raise KeyError(vertex)


@dataclass(frozen=True)
class SyncExtension:
    word: tuple
    state: str


@dataclass(frozen=True)
class BifutureTerm:
    """The union term w·a·(Fut(s) ∩ Fut(s')) of a bi-future, seen from ``origin``."""
    origin: str
    prefix: tuple
    branch_state: str
    symbol: str
    targets: tuple
    measure_state: Optional[str] = None

    @property
    def word(self):
        return self.prefix + (self.symbol,)


@dataclass(frozen=True)
class Theorem2Report:
    hypotheses_ok: bool
    reasons: tuple
    unambiguous: bool
    all_bifutures_null: bool
    equivalence_holds: bool
    null_states: dict = field(compare=False, hash=False)
    ambiguity_witness: Optional[object] = None
    positive_term: Optional[BifutureTerm] = None


def _automaton_of(d):
    return d.underlying if isinstance(d, DeterministicCover) else d


def _check_alphabet(mu, a):
    missing = [symbol for symbol in a.alphabet if symbol not in mu.symbol_index]
    if missing:
        raise AlphabetError(f"symbol {missing[0]!r} of {a} is not in the alphabet of {mu}")


# --- Pair graph ---

def build_pair_graph(mu, d, start, sources=None):
    """
    Weighted graph on (measure state, state of d) with
    w[(p, q), (p', q')] = sum of nu(a)[p][p'] over transitions q -a-> q'.
    Only vertices reachable from {(p, start) : p in sources} by positive weights
    are kept; ``sources`` defaults to the support of pi.
    """
    a = _automaton_of(d)
    _check_alphabet(mu, a)
    if start not in a.index:
        raise HypothesisError(f"{start!r} is not a state of {a}")
    names = mu.states
    position = {name: i for i, name in enumerate(names)}
    if sources is None:
        sources = [p for p in range(mu.dim) if mu.pi[p] > 0]
    initial = tuple((names[p], start) for p in sources)

    weights = {}
    labels = {}
    order = list(initial)
    seen = set(initial)
    queue = deque(initial)
    while queue:
        vertex = queue.popleft()
        p, q = vertex
        row = weights.setdefault(vertex, {})
        for symbol in a.alphabet:
            targets = a.targets(q, symbol)
            if not targets:
                continue
            matrix = mu.matrix(symbol)[position[p]]
            for p2 in range(mu.dim):
                if not matrix[p2]:
                    continue
                succ = (names[p2], targets[0])
                row[succ] = row.get(succ, ZERO) + matrix[p2]
                labels.setdefault((vertex, succ), symbol)
                if succ not in seen:
                    seen.add(succ)
                    order.append(succ)
                    queue.append(succ)

    classes = []
    for component in condense(order, lambda v: weights[v].keys()):
        stochastic = component.recurrent and all(
            sum(weights[v].values(), ZERO) == ONE for v in component.states
        )
        classes.append(PairClass(vertices=component.states, recurrent=component.recurrent, stochastic=stochastic))
        if component.recurrent:
            logger.debug(f"recurrent pair class of {len(component.states)} vertices, "
                         f"{'stochastic' if stochastic else 'strictly substochastic'}")
    graph = WeightedPairGraph(vertices=tuple(order), initial=initial, classes=tuple(classes),
                              weights=weights, labels=labels)
    logger.debug(f"pair graph of {mu} against {a} from {start}: {len(order)} vertices, {graph.edge_count} edges")
    return graph


def solve_alpha(g):
    """
    Exact alpha with alpha = M·alpha: 1 on stochastic recurrent classes, 0 on the
    other recurrent classes, and the transient part from (I - M1)·a1 = M3·a2.
    """
    alpha = {}
    transient = []
    for cls in g.classes:
        if cls.recurrent:
            for v in cls.vertices:
                alpha[v] = ONE if cls.stochastic else ZERO
        else:
            transient.extend(cls.vertices)
    if not transient:
        return alpha

    position = {v: i for i, v in enumerate(transient)}
    size = len(transient)
    matrix = [[ZERO] * size for _ in range(size)]
    rhs = [ZERO] * size
    for v in transient:
        i = position[v]
        matrix[i][i] += ONE
        for succ, weight in g.successors(v).items():
            if succ in position:
                matrix[i][position[succ]] -= weight
            else:
                rhs[i] += weight * alpha[succ]
    try:
        solution = solve_linear(matrix, rhs)
    except ValueError as exc:
        raise VerificationError(f"I - M is singular on the {size} transient vertices") from exc
    alpha.update(zip(transient, solution))
    return alpha


def positive_vertices(g):
    """Vertices from which a stochastic recurrent class is reachable; exactly those with alpha > 0."""
    reverse = {}
    for v in g.vertices:
        for succ in g.successors(v):
            reverse.setdefault(succ, []).append(v)
    positive = {v for cls in g.classes if cls.stochastic for v in cls.vertices}
    queue = deque(positive)
    while queue:
        v = queue.popleft()
        for pred in reverse.get(v, ()):
            if pred not in positive:
                positive.add(pred)
                queue.append(pred)
    return positive


def alpha_residual(g, alpha):
    """max |alpha - M·alpha| over the vertices; zero for an exact solution."""
    return max(
        (abs(alpha[v] - sum((w * alpha[s] for s, w in g.successors(v).items()), ZERO)) for v in g.vertices),
        default=ZERO,
    )


# --- Measures of closed sets ---

def closed_set_measure(mu, d, start, prefix=()):
    """mu(prefix·Fut(start)) = sum over p of (pi·nu(prefix))_p · alpha[p, start]."""
    prefix = as_word(prefix)
    vector = forward_vector(mu, prefix)
    sources = [p for p in range(mu.dim) if vector[p] > 0]
    if not sources:
        return ZERO
    g = build_pair_graph(mu, d, start, sources=sources)
    alpha = solve_alpha(g)
    names = mu.states
    return sum((vector[p] * alpha[(names[p], start)] for p in sources), ZERO)


def future_intersection_measure(a, q, q2, mu):
    recognizer = intersect_futures(a, q, q2)
    if recognizer is None:
        return ZERO
    return closed_set_measure(mu, recognizer, recognizer.start)


# --- Bi-futures ---

def bifuture_terms(a, q):
    """
    The branching configurations (p', a, s, s') with s before s' reachable from
    ``q``, each with a shortest word leading from q to p'.
    """
    paths = {q: ()}
    queue = deque([q])
    while queue:
        p = queue.popleft()
        for symbol in a.alphabet:
            for succ in a.targets(p, symbol):
                if succ not in paths:
                    paths[succ] = paths[p] + (symbol,)
                    queue.append(succ)
    terms = []
    for p in a.sort_states(paths):
        for symbol in a.alphabet:
            targets = a.targets(p, symbol)
            for i, s in enumerate(targets):
                for s2 in targets[i + 1:]:
                    terms.append(BifutureTerm(origin=q, prefix=paths[p], branch_state=p,
                                              symbol=symbol, targets=(s, s2)))
    return terms


def bifuture_term_measure(a, q, w, symbol, s, s2, mu):
    """Exact mu(w·symbol·(Fut(s) ∩ Fut(s2))); w must lead from q to a state branching to s and s2."""
    w = as_word(w)
    check_symbols(a, w + (symbol,))
    if not any(s in a.targets(p, symbol) and s2 in a.targets(p, symbol) for p in read(a, {q}, w)):
        raise HypothesisError(f"no run from {q} labelled {format_word(w)} ends in a state "
                              f"with {symbol}-transitions to both {s} and {s2}")
    recognizer = intersect_futures(a, s, s2)
    if recognizer is None:
        return ZERO
    return closed_set_measure(mu, recognizer, recognizer.start, prefix=w + (symbol,))


class BifutureAnalysis:
    """
    Decides mu(bifut(q)) = 0 for the states of ``a``. The positivity of each
    future intersection Fut(s) ∩ Fut(s') is computed once and shared by all queries.
    """

    def __init__(self, a, mu):
        _check_alphabet(mu, a)
        self.a = a
        self.mu = mu
        self.support = support_automaton(mu)
        self._positive = {}

    def positive_from(self, s, s2):
        """Measure states p for which mu_p(Fut(s) ∩ Fut(s')) > 0."""
        key = (s, s2)
        if key not in self._positive:
            recognizer = intersect_futures(self.a, s, s2)
            if recognizer is None:
                self._positive[key] = frozenset()
            else:
                g = build_pair_graph(self.mu, recognizer, recognizer.start, sources=range(self.mu.dim))
                positive = positive_vertices(g)
                self._positive[key] = frozenset(p for p, r in positive if r == recognizer.start)
        return self._positive[key]

    def positive_term(self, q):
        """
        A union term of bifut(q) with positive measure, found by a breadth-first
        search in the product of ``a`` read from q with the support automaton;
        None when every term is null.
        """
        a, mu, support = self.a, self.mu, self.support
        roots = [(q, p) for p in support.sort_states(support.initial)]
        paths = {root: () for root in roots}
        queue = deque(roots)
        while queue:
            vertex = queue.popleft()
            r, pm = vertex
            for symbol in a.alphabet:
                measure_targets = support.targets(pm, symbol)
                if not measure_targets:
                    continue
                targets = a.targets(r, symbol)
                for i, s in enumerate(targets):
                    for s2 in targets[i + 1:]:
                        positive = self.positive_from(s, s2)
                        hit = next((pm2 for pm2 in measure_targets if pm2 in positive), None)
                        if hit is not None:
                            term = BifutureTerm(origin=q, prefix=paths[vertex], branch_state=r,
                                                symbol=symbol, targets=(s, s2), measure_state=hit)
                            logger.info(f"bifut({q}) has positive measure: term {format_word(term.word)}"
                                        f"(Fut({s}) ∩ Fut({s2}))")
                            return term
                for succ in ((s, pm2) for s in targets for pm2 in measure_targets):
                    if succ not in paths:
                        paths[succ] = paths[vertex] + (symbol,)
                        queue.append(succ)
        logger.info(f"bifut({q}) is null ({len(paths)} product vertices explored)")
        return None

    def is_null(self, q):
        return self.positive_term(q) is None


def bifuture_is_null(a, q, mu):
    return BifutureAnalysis(a, mu).is_null(q)


def theorem2_check(a, mu):
    """
    Compare unambiguity of ``a`` with the nullity of every bi-future under ``mu``.
    Failed hypotheses are reported with reasons, and both sides are still evaluated.
    """
    reasons = []
    if not is_strongly_connected(a):
        reasons.append("automaton is not strongly connected")
    if not a.is_shift_mode:
        reasons.append("automaton is not in shift-space mode")
    try:
        support = support_matches_factors(mu, a)
    except (AlphabetError, HypothesisError) as exc:
        reasons.append(str(exc))
    else:
        if not support.equal:
            reasons.append(f"support of the measure differs from the factors on {format_word(support.counterexample)}")
    if reasons:
        logger.warning(f"hypotheses fail for {a} under {mu}: {'; '.join(reasons)}")

    verdict = check_unambiguous(a)
    analysis = BifutureAnalysis(a, mu)
    null_states = {}
    positive_term = None
    for q in a.states:
        term = analysis.positive_term(q)
        null_states[q] = term is None
        if positive_term is None:
            positive_term = term
    all_null = all(null_states.values())
    report = Theorem2Report(
        hypotheses_ok=not reasons,
        reasons=tuple(reasons),
        unambiguous=verdict.unambiguous,
        all_bifutures_null=all_null,
        equivalence_holds=verdict.unambiguous == all_null,
        null_states=null_states,
        ambiguity_witness=verdict.witness,
        positive_term=positive_term,
    )
    if report.hypotheses_ok and not report.equivalence_holds:
        logger.error(f"unambiguity and bi-future nullity disagree on {a} under {mu}")
    return report


# --- Witnesses ---

def _first_recurrent_state(det):
    """Shortest word from the start of a subset automaton into a recurrent component, and that component."""
    components = condense(det.states, lambda s: det.underlying.neighbours.get(s, ()))
    recurrent = {s: c for c in components if c.recurrent for s in c.states}
    paths = {det.start: ()}
    queue = deque([det.start])
    while queue:
        state = queue.popleft()
        if state in recurrent:
            return paths[state], state, recurrent[state]
        for symbol in det.alphabet:
            succ = det.next_state(state, symbol)
            if succ is not None and succ not in paths:
                paths[succ] = paths[state] + (symbol,)
                queue.append(succ)
    raise VerificationError("a finite subset automaton always reaches a recurrent component")


def witness_sync_extension(a, q, u, cover=None):
    """
    Find a word v and a state r of ``cover`` (the Fischer cover of the shift
    accepted by ``a`` unless given) with uv in past(r) and Fut(q) ∩ vA^N = v·Fut(r).
    v drives {q} into a recurrent component of the subset automaton and ends with
    a synchronizing word of that component's quotient.
    """
    u = as_word(u)
    check_symbols(a, u)
    if not in_past(a, u, q):
        raise HypothesisError(f"{format_word(u)} does not label a run of {a} ending in {q}")
    if cover is None:
        cover = fischer_cover(a)

    det = determinize_futures(a, {q})
    head, entry, component = _first_recurrent_state(det)
    ordered = sorted(component.states, key=lambda s: subset_key(a, det.subset_map[s]))
    restricted = component_cover(det, ordered)
    representative = class_representatives(restricted.underlying)
    minimal = quotient(restricted)
    comparison = shift_language_equal(minimal.underlying, cover.underlying)
    if not comparison.equal:
        raise HypothesisError(f"the sequences accepted from {q} form a proper subshift "
                              f"(they differ from the cover on {format_word(comparison.counterexample)})")

    v = head + synchronizing_extension(minimal, representative[entry])
    reached = read(cover.underlying, cover.states, v)
    if len(reached) != 1:
        raise VerificationError(f"{format_word(v)} does not synchronize the cover")
    (r,) = reached
    if not in_past(cover.underlying, u + v, r):
        raise VerificationError(f"{format_word(u + v)} is not in the past of {r}")
    if language_difference(a, read(a, {q}, v), cover.underlying, {r}) is not None:
        raise VerificationError(f"Fut({q}) ∩ {format_word(v)}A^N differs from {format_word(v)}·Fut({r})")
    return SyncExtension(word=v, state=r)


def _positive_path(g):
    """Shortest positive-weight path from an initial vertex into a stochastic recurrent class."""
    stochastic = {v for cls in g.classes if cls.stochastic for v in cls.vertices}
    paths = {v: () for v in g.initial}
    queue = deque(g.initial)
    while queue:
        vertex = queue.popleft()
        if vertex in stochastic:
            return paths[vertex], vertex
        for succ in g.successors(vertex):
            if succ not in paths:
                paths[succ] = paths[vertex] + (g.labels[(vertex, succ)],)
                queue.append(succ)
    return None


def positive_measure_witness(mu, d, start, x_cover):
    """
    None when mu(Fut(start)) = 0; otherwise a word w and a state r of ``x_cover``
    with w in past(r) and w·Fut(r) contained in Fut(start).
    """
    a = _automaton_of(d)
    g = build_pair_graph(mu, d, start)
    found = _positive_path(g)
    if found is None:
        logger.info(f"no positive-measure witness: the closed set from {start} is null")
        return None
    u, (p, q) = found

    support = trim(support_automaton(mu))
    extension = witness_sync_extension(support, p, u, cover=x_cover)
    w = u + extension.word
    r = extension.state

    essential = trim(a)
    reached = DeterministicCover(underlying=essential).walk(start, w) if start in essential.index else None
    if reached is None:
        raise VerificationError(f"{format_word(w)} cannot be read from {start}")
    if not in_past(x_cover.underlying, w, r):
        raise VerificationError(f"{format_word(w)} is not in the past of {r}")
    if language_included(x_cover.underlying, {r}, essential, {reached}) is not None:
        raise VerificationError(f"{format_word(w)}·Fut({r}) is not contained in Fut({start})")
    logger.info(f"positive-measure witness: {format_word(w)}·Fut({r}) ⊆ Fut({start})")
    return SyncExtension(word=w, state=r)


def common_cylinder(a, q, q2, mu, x_cover=None):
    """
    A word w with Fut(q) ∩ wA^N = Fut(q2) ∩ wA^N = w·Fut(r), or None when
    Fut(q) ∩ Fut(q2) is null.
    """
    if not a.is_shift_mode or not is_strongly_connected(a):
        raise HypothesisError(f"{a} must be a strongly connected shift-space automaton")
    recognizer = intersect_futures(a, q, q2)
    if recognizer is None:
        return None
    if x_cover is None:
        x_cover = fischer_cover(a)
    witness = positive_measure_witness(mu, recognizer, recognizer.start, x_cover)
    if witness is None:
        return None
    w = witness.word + synchronizing_extension(x_cover, witness.state)
    r = x_cover.walk(witness.state, w[len(witness.word):])

    left, right = read(a, {q}, w), read(a, {q2}, w)
    if not left or not right:
        raise VerificationError(f"{format_word(w)} cannot be read from both {q} and {q2}")
    if language_difference(a, left, a, right) is not None:
        raise VerificationError(f"Fut({q}) and Fut({q2}) still differ inside {format_word(w)}A^N")
    if language_difference(a, left, x_cover.underlying, {r}) is not None:
        raise VerificationError(f"Fut({q}) ∩ {format_word(w)}A^N differs from {format_word(w)}·Fut({r})")
    logger.info(f"common cylinder of {q} and {q2}: {format_word(w)}")
    return w
