"""Fixture access and random automata shared by the test modules."""
import random
from pathlib import Path

from django.conf import settings

from .automata import Automaton
from .fileformats import load_automaton, load_measure


def fixture_path(name):
    return Path(getattr(settings, 'FIXTURE_DIR', Path(__file__).resolve().parent / 'fixtures')) / name


def fixture_automaton(name):
    return load_automaton(fixture_path(f"{name}.aut"))


def fixture_measure(name):
    return load_measure(fixture_path(f"{name}.msr"))


def random_strongly_connected(rng, max_states=6, max_symbols=3):
    """
    A random strongly connected shift-space automaton: a Hamiltonian cycle
    through the states in shuffled order plus a random number of extra
    transitions. ``rng`` is a ``random.Random``, so a seed fixes the result.
    """
    n = rng.randint(1, max_states)
    k = rng.randint(1, max_symbols)
    states = [str(i + 1) for i in range(n)]
    alphabet = [str(i) for i in range(k)]
    order = states[:]
    rng.shuffle(order)
    transitions = {(p, rng.choice(alphabet), order[(i + 1) % n]) for i, p in enumerate(order)}
    for _ in range(rng.randint(0, 2 * n)):
        transitions.add((rng.choice(states), rng.choice(alphabet), rng.choice(states)))
    ordered = sorted(transitions, key=lambda t: (int(t[0]), t[1], int(t[2])))
    return Automaton.build(states, alphabet, ordered)


def random_automata(seed, count, **kwargs):
    rng = random.Random(seed)
    return [random_strongly_connected(rng, **kwargs) for _ in range(count)]
