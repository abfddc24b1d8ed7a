"""
Sofic shift algorithms: future-set determinization, Fischer covers,
synchronizing words, factor counts and language comparisons.

Every comparison of shift spaces goes through prefix languages of subsets:
a word w belongs to the language of (a, S) iff S·w is non-empty. On trimmed
automata this language is exactly the set of prefixes of the closed set of
sequences accepted from S, so equal prefix languages mean equal closed sets.
"""
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .automata import (Automaton, condense, is_deterministic, is_strongly_connected,
                       read, step, trim)
from .exceptions import HypothesisError, NotDeterministicError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DeterministicCover:
    underlying: Automaton
    subset_map: Optional[dict] = field(default=None, compare=False, hash=False)
    start: Optional[str] = None

    def __post_init__(self):
        if not is_deterministic(self.underlying):
            raise NotDeterministicError(f"{self.underlying} has two transitions with the same source and label")

    @property
    def states(self):
        return self.underlying.states

    @property
    def alphabet(self):
        return self.underlying.alphabet

    def next_state(self, state, symbol):
        targets = self.underlying.targets(state, symbol)
        return targets[0] if targets else None

    def walk(self, state, word):
        """The state reached from ``state`` by ``word``, or None when the run dies."""
        for symbol in word:
            if state is None:
                return None
            state = self.next_state(state, symbol)
        return state


class LanguageComparison(NamedTuple):
    equal: bool
    counterexample: Optional[tuple]


def subset_key(a, subset):
    return tuple(sorted(a.index[s] for s in subset))


def subset_name(a, subset):
    ordered = a.sort_states(subset)
    if len(ordered) == 1:
        return ordered[0]
    return "{" + ",".join(ordered) + "}"


def _cover_from_table(alphabet, order, table, names, start=None, subset_map=None):
    underlying = Automaton.build(
        states=[names[node] for node in order],
        alphabet=alphabet,
        transitions=[(names[node], symbol, names[succ]) for node in order
                     for symbol, succ in table[node]],
    )
    mapping = {names[node]: subset_map[node] for node in order} if subset_map is not None else None
    return DeterministicCover(underlying=underlying, subset_map=mapping,
                              start=names[start] if start is not None else None)


def determinize_futures(a, start):
    """
    Subset construction restricted to the non-empty subsets start·w. The result
    recognizes the union of the futures of ``start`` from its ``start`` state.
    """
    origin = frozenset(start)
    if not origin:
        raise HypothesisError("the start subset must be non-empty")
    order = [origin]
    table = {}
    queue = deque(order)
    seen = {origin}
    while queue:
        subset = queue.popleft()
        table[subset] = []
        for symbol in a.alphabet:
            succ = step(a, subset, symbol)
            if not succ:
                continue
            table[subset].append((symbol, succ))
            if succ not in seen:
                seen.add(succ)
                order.append(succ)
                queue.append(succ)
    names = {subset: subset_name(a, subset) for subset in order}
    logger.debug(f"determinized {a} from {names[origin]}: {len(order)} subsets")
    return _cover_from_table(a.alphabet, order, table, names, start=origin,
                             subset_map={subset: subset for subset in order})


def future_classes(a):
    """
    Moore partition refinement of a deterministic all-final automaton: two states
    end in the same class iff their future languages agree. The first partition
    groups states by their set of defined outgoing symbols.
    """
    block = {}
    initial_keys = {}
    for s in a.states:
        block[s] = initial_keys.setdefault(a.out_symbols(s), len(initial_keys))
    rounds = 0
    while True:
        rounds += 1
        keys = {}
        refined = {}
        for s in a.states:
            signature = (block[s],) + tuple(
                block[a.targets(s, symbol)[0]] if a.targets(s, symbol) else -1 for symbol in a.alphabet
            )
            refined[s] = keys.setdefault(signature, len(keys))
        if len(keys) == len(set(block.values())):
            logger.debug(f"future classes of {a}: {len(keys)} classes after {rounds} rounds")
            return refined
        block = refined


def _restrict(a, states):
    keep = set(states)
    return Automaton(
        states=tuple(s for s in a.states if s in keep),
        alphabet=a.alphabet,
        transitions=tuple(t for t in a.transitions if t.source in keep and t.target in keep),
        initial=a.initial & keep,
        final=a.final & keep,
    )


def class_representatives(a):
    """Map each state of a deterministic automaton to the first state with the same future."""
    classes = future_classes(a)
    first = {}
    for s in a.states:
        first.setdefault(classes[s], s)
    return {s: first[classes[s]] for s in a.states}


def quotient(cover, states=None):
    """
    Merge future-equivalent states of a deterministic cover (restricted to
    ``states`` when given). Each class is named after its canonical representative.
    """
    a = cover.underlying if states is None else _restrict(cover.underlying, states)
    representative = class_representatives(a)
    order = [s for s in a.states if representative[s] == s]
    table = {
        s: [(symbol, representative[a.targets(s, symbol)[0]])
            for symbol in a.alphabet if a.targets(s, symbol)]
        for s in order
    }
    names = {s: s for s in order}
    subset_map = None
    if cover.subset_map is not None:
        subset_map = {s: cover.subset_map[s] for s in order}
    start = representative.get(cover.start)
    return _cover_from_table(a.alphabet, order, table, names, start=start, subset_map=subset_map)


def recurrent_subset_component(a, det):
    """
    The recurrent component of a subset automaton containing the subset with the
    smallest canonical (sorted) representation among all recurrent components.
    """
    components = [c for c in condense(det.states, lambda s: det.underlying.neighbours.get(s, ())) if c.recurrent]

    def component_key(component):
        return min(subset_key(a, det.subset_map[s]) for s in component.states)

    chosen = min(components, key=component_key)
    # Canonical order inside the component: by subset representation.
    return tuple(sorted(chosen.states, key=lambda s: subset_key(a, det.subset_map[s])))


def component_cover(det, component):
    """
    The subset automaton restricted to a recurrent component, states in the
    given order. No transition leaves a recurrent component, so nothing is cut.
    """
    members = frozenset(component)
    restricted = Automaton(
        states=tuple(component),
        alphabet=det.alphabet,
        transitions=tuple(t for t in det.underlying.transitions if t.source in members),
        initial=members,
        final=members,
    )
    return DeterministicCover(underlying=restricted, subset_map=det.subset_map, start=component[0])


def fischer_cover(a):
    """Minimal deterministic cover of the irreducible sofic shift accepted by ``a``."""
    if not a.is_shift_mode:
        raise HypothesisError(f"{a} is not in shift-space mode (every state must be initial and final)")
    if not is_strongly_connected(a):
        raise HypothesisError(f"{a} is not strongly connected")
    det = determinize_futures(a, a.states)
    component = recurrent_subset_component(a, det)
    cover = quotient(component_cover(det, component))
    logger.info(f"Fischer cover of {a}: {len(det.states)} subsets, recurrent component of "
                f"{len(component)}, {len(cover.states)} states after merging")
    return cover


def synchronizing_word(c):
    """
    Shortest (then alphabet-lexicographic) word w such that exactly one state is
    reached by w from some state; None when no such word exists.
    """
    if isinstance(c, DeterministicCover):
        a = c.underlying
    else:
        a = c
        if not is_deterministic(a):
            raise NotDeterministicError(f"{a} is not deterministic")
    origin = frozenset(a.states)
    if len(origin) == 1:
        return ()
    seen = {origin: ()}
    queue = deque([origin])
    while queue:
        subset = queue.popleft()
        for symbol in a.alphabet:
            succ = step(a, subset, symbol)
            if not succ or succ in seen:
                continue
            seen[succ] = seen[subset] + (symbol,)
            if len(succ) == 1:
                return seen[succ]
            queue.append(succ)
    return None


def synchronizing_extension(c, state):
    """
    A synchronizing word readable from ``state``: a shortest connecting word t
    followed by the cover's synchronizing word z, so that state·tz is defined.
    """
    z = synchronizing_word(c)
    if z is None:
        raise HypothesisError(f"{c.underlying} has no synchronizing word")
    seen = {state: ()}
    queue = deque([state])
    while queue:
        current = queue.popleft()
        if c.walk(current, z) is not None:
            return seen[current] + z
        for symbol in c.alphabet:
            succ = c.next_state(current, symbol)
            if succ is not None and succ not in seen:
                seen[succ] = seen[current] + (symbol,)
                queue.append(succ)
    raise HypothesisError(f"no synchronizing word can be read from {state}")


def factor_count(a, n):
    """Number of distinct words of length ``n`` labelling at least one run of ``a``."""
    counts = {frozenset(a.states): 1}
    for _ in range(n):
        following = {}
        for subset, count in counts.items():
            for symbol in a.alphabet:
                succ = step(a, subset, symbol)
                if succ:
                    following[succ] = following.get(succ, 0) + count
        counts = following
    return sum(counts.values())


def entropy_estimate(a, n):
    count = factor_count(a, n)
    return math.log(count) / n if count else float("-inf")


def _merged_alphabet(a, b):
    return a.alphabet + tuple(s for s in b.alphabet if s not in a.symbol_index)


def _search_pairs(a, sa, b, sb, stop):
    origin = (frozenset(sa), frozenset(sb))
    if stop(*origin):
        return ()
    alphabet = _merged_alphabet(a, b)
    seen = {origin: ()}
    queue = deque([origin])
    while queue:
        left, right = queue.popleft()
        for symbol in alphabet:
            succ = (step(a, left, symbol), step(b, right, symbol))
            if not succ[0] and not succ[1]:
                continue
            if succ in seen:
                continue
            seen[succ] = seen[(left, right)] + (symbol,)
            if stop(*succ):
                return seen[succ]
            queue.append(succ)
    return None


def language_difference(a, sa, b, sb):
    """Shortest word in exactly one of the prefix languages of (a, sa) and (b, sb), or None."""
    return _search_pairs(a, sa, b, sb, lambda left, right: bool(left) != bool(right))


def language_included(a, sa, b, sb):
    """Shortest word in the language of (a, sa) but not of (b, sb), or None when included."""
    return _search_pairs(a, sa, b, sb, lambda left, right: bool(left) and not right)


def shift_language_equal(a, b):
    """Compare the factor languages of two shift-space automata."""
    word = language_difference(a, a.states, b, b.states)
    return LanguageComparison(equal=word is None, counterexample=word)


def intersect_futures(a, q, q2):
    """
    Deterministic all-final recognizer of Fut(q) ∩ Fut(q2), trimmed to pairs of
    subsets from which some sequence continues. None when the intersection is empty.
    """
    origin = (frozenset([q]), frozenset([q2]))
    order = [origin]
    table = {}
    seen = {origin}
    queue = deque(order)
    while queue:
        pair = queue.popleft()
        table[pair] = []
        for symbol in a.alphabet:
            succ = (step(a, pair[0], symbol), step(a, pair[1], symbol))
            if not succ[0] or not succ[1]:
                continue
            table[pair].append((symbol, succ))
            if succ not in seen:
                seen.add(succ)
                order.append(succ)
                queue.append(succ)
    names = {pair: f"{subset_name(a, pair[0])}|{subset_name(a, pair[1])}" for pair in order}
    raw = _cover_from_table(a.alphabet, order, table, names, start=origin,
                            subset_map={pair: pair for pair in order})
    trimmed = trim(raw.underlying)
    if raw.start not in trimmed.index:
        logger.debug(f"Fut({q}) ∩ Fut({q2}) is empty in {a}")
        return None
    subset_map = {s: raw.subset_map[s] for s in trimmed.states}
    return DeterministicCover(underlying=trimmed, subset_map=subset_map, start=raw.start)


def is_isomorphic(c, d):
    """Label-preserving bijection between two deterministic automata."""
    a, b = (c.underlying if isinstance(c, DeterministicCover) else c,
            d.underlying if isinstance(d, DeterministicCover) else d)
    if len(a.states) != len(b.states) or set(a.alphabet) != set(b.alphabet):
        return False
    if len(a.transitions) != len(b.transitions):
        return False

    def propagate(mapping, used, s, t):
        mapping, used = dict(mapping), set(used)
        pending = [(s, t)]
        while pending:
            x, y = pending.pop()
            if x in mapping:
                if mapping[x] != y:
                    return None
                continue
            if y in used:
                return None
            mapping[x] = y
            used.add(y)
            if a.out_symbols(x) != tuple(sym for sym in a.alphabet if b.targets(y, sym)):
                return None
            for symbol in a.out_symbols(x):
                pending.append((a.targets(x, symbol)[0], b.targets(y, symbol)[0]))
        return mapping, used

    def extend(mapping, used):
        free = [s for s in a.states if s not in mapping]
        if not free:
            return True
        for t in b.states:
            if t in used:
                continue
            result = propagate(mapping, used, free[0], t)
            if result is not None and extend(*result):
                return True
        return False

    return extend({}, set())


def in_past(a, word, state):
    """True iff ``word`` labels a run of ``a`` ending in ``state``."""
    return state in read(a, a.states, word)
