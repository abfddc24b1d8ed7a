"""
Finite automata over finite alphabets.

An automaton is an immutable value: states, alphabet and transitions keep the
order they were declared in, and that order is the canonical order used for
matrices, tie-breaks and witnesses. Words are tuples of symbols; any iterable
of symbols is accepted (a plain ``str`` reads as one symbol per character).
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional

import networkx as nx

from .exceptions import AlphabetError, InvalidAutomatonError

logger = logging.getLogger(__name__)


class Transition(NamedTuple):
    source: str
    symbol: str
    target: str


@dataclass(frozen=True)
class Automaton:
    states: tuple
    alphabet: tuple
    transitions: tuple
    initial: frozenset
    final: frozenset

    @classmethod
    def build(cls, states, alphabet, transitions, initial=None, final=None):
        """Build an automaton; ``initial``/``final`` default to every state (shift-space mode)."""
        states = tuple(str(s) for s in states)
        return cls(
            states=states,
            alphabet=tuple(str(a) for a in alphabet),
            transitions=tuple(Transition(str(p), str(a), str(q)) for p, a, q in transitions),
            initial=frozenset(states if initial is None else (str(s) for s in initial)),
            final=frozenset(states if final is None else (str(s) for s in final)),
        )

    def __str__(self):
        return f"Automaton({len(self.states)} states, {len(self.transitions)} transitions over {{{', '.join(self.alphabet)}}})"

    @cached_property
    def index(self):
        return {state: i for i, state in enumerate(self.states)}

    @cached_property
    def symbol_index(self):
        return {symbol: i for i, symbol in enumerate(self.alphabet)}

    @cached_property
    def successors(self):
        """Maps (state, symbol) to the targets of that state under that symbol, in state order."""
        table = {}
        for p, a, q in self.transitions:
            table.setdefault((p, a), set()).add(q)
        return {key: tuple(sorted(targets, key=self.index.__getitem__)) for key, targets in table.items()}

    @cached_property
    def neighbours(self):
        """Maps each state to the set of states it has a transition to."""
        table = {state: set() for state in self.states}
        for p, _, q in self.transitions:
            table.setdefault(p, set()).add(q)
        return table

    @property
    def is_shift_mode(self):
        everything = frozenset(self.states)
        return self.initial == everything and self.final == everything

    def targets(self, state, symbol):
        return self.successors.get((state, symbol), ())

    def out_symbols(self, state):
        return tuple(a for a in self.alphabet if (state, a) in self.successors)

    def sort_states(self, states):
        return tuple(sorted(states, key=self.index.__getitem__))


@dataclass(frozen=True)
class RunWitness:
    start: str
    end: str
    label: tuple
    run1: tuple
    run2: tuple

    @property
    def state_sequences(self):
        return (
            (self.start,) + tuple(t.target for t in self.run1),
            (self.start,) + tuple(t.target for t in self.run2),
        )


@dataclass(frozen=True)
class AmbiguityVerdict:
    unambiguous: bool
    witness: Optional[RunWitness] = None

    def __post_init__(self):
        if self.unambiguous == (self.witness is not None):
            raise ValueError("a witness is carried exactly when the automaton is ambiguous")


@dataclass(frozen=True)
class Component:
    states: tuple
    recurrent: bool = field(default=False)


def as_word(word):
    return tuple(word)


def format_word(word):
    word = tuple(word)
    if not word:
        return "ε"
    if all(len(symbol) == 1 for symbol in word):
        return "".join(word)
    return " ".join(word)


def parse_word(alphabet, text):
    """Split ``text`` into symbols: per character for one-letter alphabets, on whitespace otherwise."""
    text = text.strip()
    if text in ("", "ε", "-"):
        return ()
    if all(len(symbol) == 1 for symbol in alphabet):
        word = tuple(ch for ch in text if not ch.isspace())
    else:
        word = tuple(text.replace(",", " ").split())
    unknown = [symbol for symbol in word if symbol not in alphabet]
    if unknown:
        raise AlphabetError(f"symbol {unknown[0]!r} is not in the alphabet {{{', '.join(alphabet)}}}")
    return word


def check_symbols(a, word):
    for symbol in word:
        if symbol not in a.symbol_index:
            raise AlphabetError(f"symbol {symbol!r} is not in the alphabet {{{', '.join(a.alphabet)}}}")


# --- Validation ---

def validate(a):
    """Return every invariant violation of ``a``; an empty list means the automaton is valid."""
    errors = []
    if not a.states:
        errors.append("no states")
    if len(set(a.states)) != len(a.states):
        errors.append("duplicate state identifiers")
    if len(set(a.alphabet)) != len(a.alphabet):
        errors.append("duplicate alphabet symbols")

    known_states = set(a.states)
    known_symbols = set(a.alphabet)
    seen = set()
    for t in a.transitions:
        problems = []
        if t.source not in known_states:
            problems.append(f"unknown state {t.source!r}")
        if t.symbol not in known_symbols:
            problems.append(f"unknown symbol {t.symbol!r}")
        if t.target not in known_states:
            problems.append(f"unknown state {t.target!r}")
        if problems:
            errors.append(f"transition ({t.source}, {t.symbol}, {t.target}) references {' and '.join(problems)}")
        if t in seen:
            errors.append(f"duplicate transition ({t.source}, {t.symbol}, {t.target})")
        seen.add(t)

    for label, subset in (("initial", a.initial), ("final", a.final)):
        stray = sorted(subset - known_states)
        if stray:
            errors.append(f"{label} states not declared: {', '.join(stray)}")
    return errors


def check(a):
    errors = validate(a)
    if errors:
        raise InvalidAutomatonError(errors)
    return a


# --- Strongly connected components ---

def condense(nodes, successors):
    """
    Strongly connected components of the graph given by ``nodes`` (in canonical
    order) and ``successors(node) -> iterable``. Returns ``Component`` records in a
    topological order of the condensation; ties are broken by the canonical
    position of each component's first node.
    """
    nodes = list(nodes)
    position = {node: i for i, node in enumerate(nodes)}
    graph = nx.DiGraph()
    graph.add_nodes_from(nodes)
    for node in nodes:
        graph.add_edges_from((node, succ) for succ in successors(node))
    dag = nx.condensation(graph)
    members = {c: sorted(dag.nodes[c]["members"], key=position.__getitem__) for c in dag.nodes}
    order = nx.lexicographical_topological_sort(dag, key=lambda c: position[members[c][0]])
    return [Component(states=tuple(members[c]), recurrent=dag.out_degree(c) == 0) for c in order]


def scc_decompose(a):
    components = condense(a.states, lambda p: a.neighbours.get(p, ()))
    logger.debug(f"{a}: {len(components)} strongly connected components, "
                 f"{sum(c.recurrent for c in components)} recurrent")
    return components


def is_strongly_connected(a):
    return len(a.states) > 0 and len(scc_decompose(a)) == 1


# --- Transition structure ---

def is_deterministic(a):
    """At most one transition per (state, symbol). Initial states are not constrained."""
    return all(len(targets) <= 1 for targets in a.successors.values())


def reverse(a):
    return Automaton(
        states=a.states,
        alphabet=a.alphabet,
        transitions=tuple(Transition(q, s, p) for p, s, q in a.transitions),
        initial=a.final,
        final=a.initial,
    )


def is_reverse_deterministic(a):
    return is_deterministic(reverse(a))


def step(a, subset, symbol):
    """The subset P·a as a frozenset."""
    return frozenset(q for p in subset for q in a.targets(p, symbol))


def read(a, subset, word):
    current = frozenset(subset)
    for symbol in word:
        if not current:
            break
        current = step(a, current, symbol)
    return current


def trim(a):
    """
    Drop states from which no infinite run starts. The result accepts the same
    sequences, and every finite word labelling a run in it extends to a sequence.
    """
    alive = set(a.states)
    changed = True
    while changed:
        changed = False
        for p in list(alive):
            if not any(q in alive for q in a.neighbours.get(p, ())):
                alive.discard(p)
                changed = True
    if len(alive) == len(a.states):
        return a
    logger.debug(f"trim removed {len(a.states) - len(alive)} stranded states from {a}")
    return Automaton(
        states=tuple(s for s in a.states if s in alive),
        alphabet=a.alphabet,
        transitions=tuple(t for t in a.transitions if t.source in alive and t.target in alive),
        initial=a.initial & alive,
        final=a.final & alive,
    )


# --- Runs ---

def symbol_matrix(a, symbol):
    """0/1 matrix of the transitions labelled ``symbol``, rows and columns in state order."""
    n = len(a.states)
    rows = [[0] * n for _ in range(n)]
    for p, s, q in a.transitions:
        if s == symbol:
            rows[a.index[p]][a.index[q]] = 1
    return rows


def count_runs(a, q, w, end=None):
    """
    Number of runs starting in ``q`` labelled ``w``, summed over end states, or
    only those ending in ``end`` when given. Counts are Python ints and never overflow.
    """
    word = as_word(w)
    check_symbols(a, word)
    if q not in a.index:
        raise InvalidAutomatonError([f"unknown state {q!r}"])
    matrices = {}
    vector = [0] * len(a.states)
    vector[a.index[q]] = 1
    for symbol in word:
        if symbol not in matrices:
            matrices[symbol] = symbol_matrix(a, symbol)
        matrix = matrices[symbol]
        vector = [sum(vector[i] * matrix[i][j] for i in range(len(vector)) if vector[i]) for j in range(len(vector))]
    if end is not None:
        return vector[a.index[end]]
    return sum(vector)


def replay(a, start, transitions):
    """True iff ``transitions`` is a consecutive run of ``a`` starting in ``start``."""
    current = start
    known = set(a.transitions)
    for t in transitions:
        if t.source != current or t not in known:
            return False
        current = t.target
    return True


def pair_moves(a, r, r2, symbol):
    for s in a.targets(r, symbol):
        for s2 in a.targets(r2, symbol):
            yield s, s2


def check_unambiguous(a):
    """
    Breadth-first search on the flagged pair graph. Vertices are (r, r', diverged);
    the automaton is ambiguous iff some (q, q, 1) is reachable from a start (p, p, 0).
    The witness returned is a shortest one.
    """
    roots = [(p, p, False) for p in a.states]
    parents = {root: None for root in roots}
    queue = deque(roots)
    found = None
    while queue and found is None:
        vertex = queue.popleft()
        r, r2, diverged = vertex
        for symbol in a.alphabet:
            for s, s2 in pair_moves(a, r, r2, symbol):
                succ = (s, s2, diverged or s != s2)
                if succ in parents:
                    continue
                parents[succ] = (vertex, symbol)
                if succ[2] and s == s2:
                    found = succ
                    break
                queue.append(succ)
            if found is not None:
                break

    if found is None:
        logger.info(f"{a} is unambiguous ({len(parents)} pair-graph vertices explored)")
        return AmbiguityVerdict(unambiguous=True)

    path = [found]
    label = []
    while parents[path[-1]] is not None:
        previous, symbol = parents[path[-1]]
        label.append(symbol)
        path.append(previous)
    path.reverse()
    label.reverse()
    first = tuple(v[0] for v in path)
    second = tuple(v[1] for v in path)
    if tuple(map(a.index.__getitem__, second)) < tuple(map(a.index.__getitem__, first)):
        first, second = second, first
    as_transitions = lambda seq: tuple(Transition(seq[i], label[i], seq[i + 1]) for i in range(len(label)))
    witness = RunWitness(
        start=first[0], end=first[-1], label=tuple(label),
        run1=as_transitions(first), run2=as_transitions(second),
    )
    logger.info(f"{a} is ambiguous: word {format_word(witness.label)} labels two runs "
                f"from {witness.start} to {witness.end}")
    return AmbiguityVerdict(unambiguous=False, witness=witness)


def diverged_pairs(a):
    """
    Every (p, q, q') with q != q' such that some word labels runs p -> q and p -> q'.
    These are the branching pairs whose future intersections are null on
    unambiguous automata.
    """
    pairs = set()
    for p in a.states:
        seen = {(p, p)}
        queue = deque(seen)
        while queue:
            r, r2 = queue.popleft()
            for symbol in a.alphabet:
                for succ in pair_moves(a, r, r2, symbol):
                    if succ not in seen:
                        seen.add(succ)
                        queue.append(succ)
        pairs.update((p, q, q2) for q, q2 in seen if q != q2)
    return pairs
