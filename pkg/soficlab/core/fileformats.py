"""
Text formats for automata (``.aut``) and stochastic representations (``.msr``).

Both are UTF-8, line oriented, with ``#`` starting a comment. Automaton files::

    alphabet: 0 1
    states: 1 2
    initial: *            # optional, defaults to *
    final: *              # optional, defaults to *
    trans: 1 0 1          # one transition per line

Measure files::

    dim: 2
    alphabet: 0 1
    pi: 1/2 1/2
    nu 0:
    1/2 0
    1 0
    nu 1:
    0 1/2
    0 0

Rationals are integers or ``p/q``; decimal literals are rejected. Missing
``nu`` blocks stand for zero matrices.
"""
import re
from fractions import Fraction
from pathlib import Path

from .automata import Automaton, Transition, validate
from .exceptions import FileFormatError, SoficError
from .measure import make_measure

TOKEN = re.compile(r"\S+")
RATIONAL = re.compile(r"^-?\d+(/\d+)?$")
NU_HEADER = re.compile(r"^nu\s+(\S+)\s*:$")


def _lines(text):
    """(line number, stripped content, tokens with 1-based columns) for every non-blank line."""
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].rstrip()
        if not content.strip():
            continue
        tokens = [(m.group(), m.start() + 1) for m in TOKEN.finditer(content)]
        yield number, content.strip(), tokens


def _split_key(content, tokens, number, path):
    key, sep, _ = content.partition(":")
    if not sep:
        raise FileFormatError(f"expected 'key: values', got {content!r}", line=number, column=tokens[0][1], path=path)
    key = key.strip()
    # Tokens after the one holding the colon are the values.
    values = []
    seen_colon = False
    for token, column in tokens:
        if seen_colon:
            values.append((token, column))
        elif ":" in token:
            seen_colon = True
            rest = token.split(":", 1)[1]
            if rest:
                values.append((rest, column + token.index(":") + 1))
    return key, values


def parse_automaton(text, path=None, strict=True):
    """
    Parse an automaton. Layout errors always raise; with ``strict=False`` references to undeclared
    states or symbols are kept so that :func:`~core.automata.validate` can report them.
    """
    alphabet = states = initial = final = None
    transitions = []
    positions = {}
    header_lines = {}
    for number, content, tokens in _lines(text):
        key, values = _split_key(content, tokens, number, path)
        if key in ("alphabet", "states", "initial", "final"):
            if key in header_lines:
                raise FileFormatError(f"'{key}' given twice (first on line {header_lines[key]})",
                                      line=number, column=tokens[0][1], path=path)
            header_lines[key] = number
            names = [token for token, _ in values]
            if len(set(names)) != len(names):
                raise FileFormatError(f"duplicate entry in '{key}'", line=number, path=path)
            if key == "alphabet":
                alphabet = names
            elif key == "states":
                states = names
            elif key == "initial":
                initial = (names, number, values)
            else:
                final = (names, number, values)
        elif key == "trans":
            if len(values) != 3:
                raise FileFormatError(f"'trans' takes 3 fields (source, symbol, target), got {len(values)}",
                                      line=number, column=tokens[0][1], path=path)
            transition = Transition(*(token for token, _ in values))
            if transition in positions:
                raise FileFormatError(f"duplicate transition {' '.join(transition)} "
                                      f"(first on line {positions[transition][0]})",
                                      line=number, column=values[0][1], path=path)
            positions[transition] = (number, values)
            transitions.append(transition)
        else:
            raise FileFormatError(f"unknown key {key!r}", line=number, column=tokens[0][1], path=path)

    if alphabet is None:
        raise FileFormatError("missing 'alphabet' line", path=path)
    if states is None:
        raise FileFormatError("missing 'states' line", path=path)
    known_states, known_symbols = set(states), set(alphabet)
    for transition, (number, values) in positions.items():
        for (token, column), kind in zip(values, ("state", "symbol", "state")):
            known = known_symbols if kind == "symbol" else known_states
            if strict and token not in known:
                raise FileFormatError(f"unknown {kind} {token!r}", line=number, column=column, path=path)

    def expand(spec):
        if spec is None:
            return None
        names, number, values = spec
        if names == ["*"]:
            return None
        for token, column in values:
            if strict and token not in known_states:
                raise FileFormatError(f"unknown state {token!r}", line=number, column=column, path=path)
        return names

    a = Automaton.build(states, alphabet, transitions, initial=expand(initial), final=expand(final))
    errors = validate(a) if strict else []
    if errors:
        raise FileFormatError("; ".join(errors), path=path)
    return a


def _rational(token, column, number, path):
    if not RATIONAL.match(token):
        raise FileFormatError(f"{token!r} is not an exact rational (write integers or p/q)",
                              line=number, column=column, path=path)
    try:
        return Fraction(token)
    except ZeroDivisionError:
        raise FileFormatError(f"{token!r} has a zero denominator", line=number, column=column, path=path) from None


def parse_measure(text, path=None):
    dim = alphabet = pi = None
    nu = {}
    block = None  # (symbol, header line, rows so far)
    for number, content, tokens in _lines(text):
        header = NU_HEADER.match(content)
        if block is not None and not header and ":" not in content:
            if dim is None:
                raise FileFormatError("'dim' must precede the nu blocks", line=number, path=path)
            row = [_rational(token, column, number, path) for token, column in tokens]
            if len(row) != dim:
                raise FileFormatError(f"expected {dim} entries, got {len(row)}", line=number, path=path)
            block[2].append(row)
            continue
        if block is not None:
            _close_block(block, dim, nu, path)
            block = None
        if header:
            symbol = header.group(1)
            if symbol in nu:
                raise FileFormatError(f"second 'nu {symbol}' block", line=number, path=path)
            block = (symbol, number, [])
            continue
        key, values = _split_key(content, tokens, number, path)
        if key == "dim":
            if len(values) != 1 or not values[0][0].isdigit() or int(values[0][0]) < 1:
                raise FileFormatError("'dim' takes one positive integer", line=number, column=tokens[0][1], path=path)
            dim = int(values[0][0])
        elif key == "alphabet":
            alphabet = [token for token, _ in values]
        elif key == "pi":
            pi = [_rational(token, column, number, path) for token, column in values]
            pi_line = number
        else:
            raise FileFormatError(f"unknown key {key!r}", line=number, column=tokens[0][1], path=path)
    if block is not None:
        _close_block(block, dim, nu, path)

    for name, value in (("dim", dim), ("alphabet", alphabet), ("pi", pi)):
        if value is None:
            raise FileFormatError(f"missing '{name}' line", path=path)
    if len(pi) != dim:
        raise FileFormatError(f"'pi' has {len(pi)} entries, expected {dim}", line=pi_line, path=path)
    try:
        return make_measure(alphabet, pi, nu)
    except SoficError as exc:
        raise FileFormatError(str(exc), path=path) from exc


def _close_block(block, dim, nu, path):
    symbol, number, rows = block
    if len(rows) != dim:
        raise FileFormatError(f"'nu {symbol}' has {len(rows)} rows, expected {dim}", line=number, path=path)
    nu[symbol] = rows


def load_automaton(path, strict=True):
    path = Path(path)
    return parse_automaton(path.read_text(encoding="utf-8"), path=str(path), strict=strict)


def load_measure(path):
    path = Path(path)
    return parse_measure(path.read_text(encoding="utf-8"), path=str(path))


def dump_automaton(a):
    everything = frozenset(a.states)

    def subset(states):
        return "*" if states == everything else " ".join(a.sort_states(states))

    lines = [
        f"alphabet: {' '.join(a.alphabet)}",
        f"states: {' '.join(a.states)}",
        f"initial: {subset(a.initial)}",
        f"final: {subset(a.final)}",
    ]
    lines.extend(f"trans: {p} {symbol} {q}" for p, symbol, q in a.transitions)
    return "\n".join(lines) + "\n"


def dump_measure(mu):
    lines = [
        f"dim: {mu.dim}",
        f"alphabet: {' '.join(mu.alphabet)}",
        f"pi: {' '.join(str(x) for x in mu.pi)}",
    ]
    for symbol, matrix in zip(mu.alphabet, mu.nu):
        if not any(any(row) for row in matrix):
            continue
        lines.append(f"nu {symbol}:")
        lines.extend(" ".join(str(x) for x in row) for row in matrix)
    return "\n".join(lines) + "\n"
