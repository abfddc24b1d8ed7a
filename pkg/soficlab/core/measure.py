"""
Rational probability measures on words, given by a stochastic representation
(pi, nu, 1): pi is a stochastic row vector and nu maps each symbol to a
non-negative matrix, the matrices summing to a stochastic matrix.

Every value in this module is a ``fractions.Fraction``. Nothing is rounded.
"""
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .automata import Automaton, as_word, is_deterministic, is_strongly_connected, trim
from .exceptions import AlphabetError, HypothesisError, InvalidMeasureError, NotDeterministicError
from .subshift import DeterministicCover, LanguageComparison, language_difference

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class RationalMeasure:
    alphabet: tuple
    pi: tuple
    nu: tuple  # one dim x dim matrix per symbol, in alphabet order

    @property
    def dim(self):
        return len(self.pi)

    @property
    def states(self):
        """Measure states are named 1..m."""
        return tuple(str(i + 1) for i in range(self.dim))

    @cached_property
    def symbol_index(self):
        return {symbol: i for i, symbol in enumerate(self.alphabet)}

    def matrix(self, symbol):
        try:
            return self.nu[self.symbol_index[symbol]]
        except KeyError:
            raise AlphabetError(f"symbol {symbol!r} is not in the alphabet {{{', '.join(self.alphabet)}}}") from None

    def weight(self, p, symbol, p2):
        """nu(symbol)[p][p2] for measure states given by index."""
        return self.matrix(symbol)[p][p2]

    def __str__(self):
        return f"RationalMeasure(dim {self.dim} over {{{', '.join(self.alphabet)}}})"


def as_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool) or isinstance(value, float):
        raise InvalidMeasureError(f"{value!r} is not an exact rational")
    try:
        return Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise InvalidMeasureError(f"{value!r} is not a rational number") from exc


def make_measure(alphabet, pi, nu):
    """
    Validating constructor. ``nu`` maps each symbol to a list of rows; entries
    may be ints, Fractions or strings such as ``"1/3"`` (floats are rejected).
    """
    alphabet = tuple(str(a) for a in alphabet)
    pi = tuple(as_fraction(x) for x in pi)
    dim = len(pi)
    if dim == 0:
        raise InvalidMeasureError("the representation has dimension 0")
    if len(set(alphabet)) != len(alphabet):
        raise InvalidMeasureError("duplicate alphabet symbols")
    nu = {str(k): v for k, v in dict(nu).items()}
    stray = [symbol for symbol in nu if symbol not in alphabet]
    if stray:
        raise AlphabetError(f"nu is given for {stray[0]!r}, which is not in the alphabet")

    matrices = []
    for symbol in alphabet:
        rows = nu.get(symbol)
        if rows is None:
            matrices.append(tuple((ZERO,) * dim for _ in range(dim)))
            continue
        rows = tuple(tuple(as_fraction(x) for x in row) for row in rows)
        if len(rows) != dim or any(len(row) != dim for row in rows):
            raise InvalidMeasureError(f"nu({symbol}) is not a {dim}x{dim} matrix")
        matrices.append(rows)

    if any(x < 0 for x in pi):
        raise InvalidMeasureError("pi has a negative entry")
    if sum(pi) != ONE:
        raise InvalidMeasureError(f"pi sums to {sum(pi)}, not 1")
    for symbol, rows in zip(alphabet, matrices):
        if any(x < 0 for row in rows for x in row):
            raise InvalidMeasureError(f"nu({symbol}) has a negative entry")
    for p in range(dim):
        total = sum(rows[p][q] for rows in matrices for q in range(dim))
        if total != ONE:
            raise InvalidMeasureError(f"row {p + 1} of the sum of the nu matrices sums to {total}, not 1")
    return RationalMeasure(alphabet=alphabet, pi=pi, nu=tuple(matrices))


def _vector_times(vector, matrix):
    size = len(vector)
    return tuple(sum((vector[i] * matrix[i][j] for i in range(size) if vector[i]), ZERO) for j in range(size))


def forward_vector(mu, w, start=None):
    """The row vector start·nu(w), with ``start`` defaulting to pi."""
    vector = mu.pi if start is None else tuple(start)
    for symbol in as_word(w):
        vector = _vector_times(vector, mu.matrix(symbol))
    return vector


def word_measure(mu, w):
    return sum(forward_vector(mu, w), ZERO)


def prefix_antichain(words):
    """Drop every word having another listed word as a prefix (duplicates collapse)."""
    kept = []
    for word in sorted({as_word(w) for w in words}, key=lambda w: (len(w), w)):
        if not any(word[:len(prefix)] == prefix for prefix in kept):
            kept.append(word)
    return kept


def cylinder_union_measure(mu, ws):
    """
    Measure of the union of the cylinders wA^N. After prefix absorption no word
    is a prefix of another, so the cylinders are pairwise disjoint and their
    measures add up.
    """
    return sum((word_measure(mu, w) for w in prefix_antichain(ws)), ZERO)


def transition_matrix(mu):
    """The stochastic matrix sum over a of nu(a)."""
    dim = mu.dim
    return tuple(tuple(sum(m[p][q] for m in mu.nu) for q in range(dim)) for p in range(dim))


def is_invariant(mu):
    return _vector_times(mu.pi, transition_matrix(mu)) == mu.pi


def solve_linear(matrix, rhs):
    """
    Solve matrix·x = rhs exactly by Gaussian elimination with the first non-zero
    pivot. Raises ValueError when the system is singular.
    """
    size = len(rhs)
    rows = [list(matrix[i]) + [rhs[i]] for i in range(size)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if rows[r][col] != 0), None)
        if pivot is None:
            raise ValueError(f"singular system (no pivot in column {col})")
        rows[col], rows[pivot] = rows[pivot], rows[col]
        head = rows[col][col]
        rows[col] = [x / head for x in rows[col]]
        for r in range(size):
            if r != col and rows[r][col] != 0:
                factor = rows[r][col]
                rows[r] = [x - factor * y for x, y in zip(rows[r], rows[col])]
    return tuple(rows[i][size] for i in range(size))


def stationary_vector(mu):
    """The unique pi with pi·P = pi and sum 1, P the transition matrix of ``mu``."""
    matrix = transition_matrix(mu)
    dim = mu.dim
    system = [[matrix[j][i] - (ONE if i == j else ZERO) for j in range(dim)] for i in range(dim - 1)]
    system.append([ONE] * dim)
    rhs = [ZERO] * (dim - 1) + [ONE]
    try:
        return solve_linear(system, rhs)
    except ValueError as exc:
        raise HypothesisError(f"{mu} has no unique stationary vector") from exc


# --- Constructors ---

def make_bernoulli(weights):
    """One-state representation; ``weights`` maps symbols to their probabilities, in alphabet order."""
    weights = {str(k): as_fraction(v) for k, v in dict(weights).items()}
    if not weights:
        raise InvalidMeasureError("a Bernoulli measure needs at least one symbol")
    if sum(weights.values()) != ONE:
        raise InvalidMeasureError(f"Bernoulli weights sum to {sum(weights.values())}, not 1")
    return make_measure(weights.keys(), [ONE], {symbol: [[w]] for symbol, w in weights.items()})


def make_uniform(alphabet):
    alphabet = tuple(alphabet)
    return make_bernoulli({symbol: Fraction(1, len(alphabet)) for symbol in alphabet})


def make_markov_from_cover(c, stationary=False):
    """
    Markov measure whose support is the factor language of the cover: each
    state spreads its mass uniformly over its outgoing transitions, and pi is
    uniform over the states (or stationary when asked).
    """
    a = c.underlying if isinstance(c, DeterministicCover) else c
    if not is_deterministic(a):
        raise NotDeterministicError(f"{a} is not deterministic")
    if not is_strongly_connected(a):
        raise HypothesisError(f"{a} is not strongly connected")
    dim = len(a.states)
    nu = {symbol: [[ZERO] * dim for _ in range(dim)] for symbol in a.alphabet}
    for p in a.states:
        symbols = a.out_symbols(p)
        for symbol in symbols:
            nu[symbol][a.index[p]][a.index[a.targets(p, symbol)[0]]] = Fraction(1, len(symbols))
    mu = make_measure(a.alphabet, [Fraction(1, dim)] * dim, nu)
    if stationary:
        mu = RationalMeasure(alphabet=mu.alphabet, pi=stationary_vector(mu), nu=mu.nu)
    logger.debug(f"Markov measure of dimension {dim} built from {a}")
    return mu


def make_periodic_point_masses(points, alphabet=None):
    """
    Convex combination of the point masses on the periodic sequences u^N, given
    as (u, weight) pairs. Each period is a cycle of counter states reading u.
    """
    points = [(as_word(u), as_fraction(weight)) for u, weight in points]
    if any(not u for u, _ in points):
        raise InvalidMeasureError("period words must be non-empty")
    if any(weight < 0 for _, weight in points):
        raise InvalidMeasureError("point-mass weights must be non-negative")
    if sum(weight for _, weight in points) != ONE:
        raise InvalidMeasureError(f"point-mass weights sum to {sum(w for _, w in points)}, not 1")
    used = sorted({symbol for u, _ in points for symbol in u})
    alphabet = tuple(alphabet) if alphabet is not None else tuple(used)
    missing = [symbol for symbol in used if symbol not in alphabet]
    if missing:
        raise AlphabetError(f"symbol {missing[0]!r} is not in the alphabet {{{', '.join(alphabet)}}}")

    dim = sum(len(u) for u, _ in points)
    pi = [ZERO] * dim
    nu = {symbol: [[ZERO] * dim for _ in range(dim)] for symbol in alphabet}
    offset = 0
    for u, weight in points:
        pi[offset] = weight
        for k, symbol in enumerate(u):
            nu[symbol][offset + k][offset + (k + 1) % len(u)] = ONE
        offset += len(u)
    return make_measure(alphabet, pi, nu)


# --- Support ---

def support_automaton(mu):
    """p -a-> p' whenever nu(a)[p][p'] > 0; initial states carry positive pi; all states final."""
    states = mu.states
    transitions = [
        (states[p], symbol, states[q])
        for p in range(mu.dim)
        for symbol, matrix in zip(mu.alphabet, mu.nu)
        for q in range(mu.dim)
        if matrix[p][q] > 0
    ]
    return Automaton.build(
        states=states,
        alphabet=mu.alphabet,
        transitions=transitions,
        initial=[states[p] for p in range(mu.dim) if mu.pi[p] > 0],
    )


def support_matches_factors(mu, a):
    """Compare supp(mu) with the factor language of the shift-space automaton ``a``."""
    if set(mu.alphabet) != set(a.alphabet):
        raise AlphabetError(f"{mu} and {a} are over different alphabets")
    if not a.is_shift_mode:
        raise HypothesisError(f"{a} is not in shift-space mode")
    support = trim(support_automaton(mu))
    factors = trim(a)
    word = language_difference(support, support.initial, factors, factors.states)
    if word is not None:
        logger.info(f"support of {mu} differs from the factors of {a} on {''.join(word) or 'ε'}")
    return LanguageComparison(equal=word is None, counterexample=word)


# --- Even palindromes ---

def palindrome_cylinders(alphabet, n):
    """The words w·reverse(w) for every w of length ``n``."""
    return [word + word[::-1] for word in itertools.product(tuple(alphabet), repeat=n)]


def palindrome_prefix_bound(mu, k):
    """
    Upper bound on the measure of the union of the even palindrome cylinders of
    half-length at most ``k``, that is of the sequences having such a palindrome
    as a prefix: the exact measure of the union for half-lengths 1 and 2, plus
    the measure of each larger layer. One minus the bound is a lower bound for
    the sequences with no such prefix.
    """
    head = cylinder_union_measure(mu, palindrome_cylinders(mu.alphabet, 1) + palindrome_cylinders(mu.alphabet, 2))
    tail = sum((cylinder_union_measure(mu, palindrome_cylinders(mu.alphabet, n)) for n in range(3, k + 1)), ZERO)
    return head + tail
