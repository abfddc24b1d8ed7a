"""
Seeded Monte-Carlo sampling from stochastic representations.

Generator: numpy's PCG64. Trial ``t`` of a run seeded with ``s`` draws from
``default_rng(SeedSequence(s, spawn_key=(t,)))``, so a trial's sample depends
only on (s, t) and trials can run in any order or in parallel.
"""
import bisect
import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from django.conf import settings

from .automata import pair_moves
from .exceptions import AlphabetError

logger = logging.getLogger(__name__)

SCALE = 1 << 64


@dataclass(frozen=True)
class SampleConfig:
    seed: int = None
    prefix_length: int = None
    trials: int = None

    def __post_init__(self):
        # Unset fields fall back to settings.
        defaults = (
            ('seed', 'SIMULATION_SEED', 42),
            ('prefix_length', 'SIMULATION_PREFIX_LENGTH', 30),
            ('trials', 'SIMULATION_TRIALS', 100_000),
        )
        for name, setting, default in defaults:
            if getattr(self, name) is None:
                object.__setattr__(self, name, getattr(settings, setting, default))
        if self.prefix_length < 1:
            raise ValueError("prefix_length must be at least 1")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")


@dataclass(frozen=True)
class BifutureEstimate:
    estimate: float
    wilson_interval: tuple
    hits: int
    prefix_length: int
    trials: int
    seed: int


def _ceil_scaled(value):
    """ceil(value · 2^64) for a non-negative Fraction."""
    return -((-value.numerator * SCALE) // value.denominator)


class Sampler:
    """
    Exact-threshold sampler for one measure: every choice compares a uniform
    64-bit draw with ceil(c · 2^64), c a rational cumulative probability.
    """

    def __init__(self, mu):
        self.mu = mu

    @staticmethod
    def _table(pairs):
        thresholds, outcomes, total = [], [], 0
        for outcome, weight in pairs:
            if weight > 0:
                total += weight
                thresholds.append(_ceil_scaled(total))
                outcomes.append(outcome)
        return thresholds, outcomes

    @cached_property
    def initial(self):
        return self._table(enumerate(self.mu.pi))

    @cached_property
    def moves(self):
        mu = self.mu
        return [
            self._table(((symbol, q), matrix[p][q]) for symbol, matrix in zip(mu.alphabet, mu.nu) for q in range(mu.dim))
            for p in range(mu.dim)
        ]

    @staticmethod
    def _pick(table, draw):
        thresholds, outcomes = table
        return outcomes[bisect.bisect_right(thresholds, draw)]

    def sample(self, seed, trial, length):
        bits = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,))).bit_generator
        draws = bits.random_raw(length + 1).tolist()
        state = self._pick(self.initial, draws[0])
        word = []
        for draw in draws[1:]:
            symbol, state = self._pick(self.moves[state], draw)
            word.append(symbol)
        return tuple(word)


def sample_sequence(mu, cfg, trial=0):
    """A word of length ``cfg.prefix_length`` drawn from ``mu``; trial ``trial`` of the seeded run."""
    return Sampler(mu).sample(cfg.seed, trial, cfg.prefix_length)


def empirical_cylinder_frequencies(mu, cfg):
    """Relative frequency of every sampled word of length ``cfg.prefix_length`` over ``cfg.trials`` trials."""
    sampler = Sampler(mu)
    counts = Counter(sampler.sample(cfg.seed, t, cfg.prefix_length) for t in range(cfg.trials))
    return {word: count / cfg.trials for word, count in counts.items()}


def wilson_interval(hits, trials, z=None):
    if z is None:
        z = getattr(settings, 'WILSON_Z', 1.959963984540054)
    phat = hits / trials
    denominator = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denominator
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denominator
    return max(0.0, centre - half), min(1.0, centre + half)


class DivergenceTracker:
    """
    Follows the set of flagged pairs (r, r', diverged) reachable from (q, q, False).
    A pair is flagged when its two runs split while the window is still open;
    a word is counted when a flagged pair survives all of it.
    Transitions are memoized per (pair set, symbol, window open).
    """

    def __init__(self, a, q):
        self.a = a
        self.origin = frozenset([(q, q, False)])
        self._cache = {}

    def step(self, pairs, symbol, marking=True):
        key = (pairs, symbol, marking)
        succ = self._cache.get(key)
        if succ is None:
            succ = frozenset(
                (s, s2, diverged or (marking and s != s2))
                for r, r2, diverged in pairs
                for s, s2 in pair_moves(self.a, r, r2, symbol)
            )
            self._cache[key] = succ
        return succ

    def has_two_runs(self, word, window=None):
        """Two distinct runs from q over ``word`` that split within its first ``window`` symbols."""
        if window is None:
            window = len(word)
        pairs = self.origin
        for position, symbol in enumerate(word):
            pairs = self.step(pairs, symbol, position < window)
            if not pairs:
                return False
        return any(diverged for _, _, diverged in pairs)


def estimate_bifuture(a, q, mu, cfg, workers=None):
    """
    Fraction of sampled length-L prefixes carrying two runs from q that split
    within the first ceil(L/2) symbols and both survive to L. Splits that die
    out within L/2 symbols are not counted, so the estimate converges to
    mu(bifut(q)) as L grows.
    """
    if set(mu.alphabet) - set(a.alphabet):
        raise AlphabetError(f"{mu} emits symbols outside the alphabet of {a}")
    if workers is None:
        workers = getattr(settings, 'SIMULATION_WORKERS', 1)
    sampler = Sampler(mu)
    tracker = DivergenceTracker(a, q)
    window = (cfg.prefix_length + 1) // 2

    def count(trials):
        return sum(tracker.has_two_runs(sampler.sample(cfg.seed, t, cfg.prefix_length), window) for t in trials)

    if workers > 1:
        chunks = [range(start, cfg.trials, workers) for start in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(count, chunks))
    else:
        hits = count(range(cfg.trials))

    estimate = BifutureEstimate(
        estimate=hits / cfg.trials,
        wilson_interval=wilson_interval(hits, cfg.trials),
        hits=hits,
        prefix_length=cfg.prefix_length,
        trials=cfg.trials,
        seed=cfg.seed,
    )
    logger.info(f"bifut({q}) estimate {estimate.estimate:.6f} from {cfg.trials} prefixes of length "
                f"{cfg.prefix_length} (seed {cfg.seed})")
    return estimate
