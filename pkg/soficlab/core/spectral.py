"""
Adjacency matrices, Perron-Frobenius spectral radius and entropy.

Logarithms are natural logarithms everywhere.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from django.conf import settings

from .automata import check_unambiguous, format_word
from .exceptions import ConvergenceError, HypothesisError
from .subshift import fischer_cover, language_included, shift_language_equal

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AdjacencyMatrix:
    states: tuple
    entries: tuple

    @property
    def dimension(self):
        return len(self.states)

    def as_array(self):
        return np.array(self.entries, dtype=float).reshape(self.dimension, self.dimension)

    def power(self, n):
        """Exact integer matrix power."""
        size = self.dimension
        result = [[int(i == j) for j in range(size)] for i in range(size)]
        base = [list(row) for row in self.entries]
        while n:
            if n & 1:
                result = _multiply(result, base)
            base = _multiply(base, base)
            n >>= 1
        return result


@dataclass(frozen=True)
class SpectralReport:
    radius: float
    log_radius: float
    iterations: int
    residual: float


@dataclass(frozen=True)
class Theorem1Report:
    unambiguous: bool
    accepts_shift: bool
    entropy_matches: bool
    consistent: bool
    log_radius: float
    entropy: float
    tolerance: float
    witness: Optional[object] = None
    counterexample: Optional[tuple] = None

    @property
    def conditions(self):
        return {'i': self.unambiguous, 'ii': self.accepts_shift, 'iii': self.entropy_matches}


def _multiply(x, y):
    size = len(x)
    return [[sum(x[i][k] * y[k][j] for k in range(size) if x[i][k]) for j in range(size)] for i in range(size)]


def adjacency(a):
    """M[p][q] = number of symbols labelling a transition from p to q."""
    size = len(a.states)
    rows = [[0] * size for _ in range(size)]
    for p, _, q in a.transitions:
        rows[a.index[p]][a.index[q]] += 1
    return AdjacencyMatrix(states=a.states, entries=tuple(tuple(row) for row in rows))


def spectral_radius(m, tol=None, max_iterations=None):
    """
    Dominant eigenvalue of a non-negative matrix by power iteration on M + I.
    Adding the identity makes the matrix aperiodic without moving the Perron root
    by anything but 1, so the result is rho(M + I) - 1.
    """
    if tol is None:
        tol = getattr(settings, 'SPECTRAL_TOLERANCE', 1e-12)
    if max_iterations is None:
        max_iterations = getattr(settings, 'SPECTRAL_MAX_ITERATIONS', 1_000_000)
    matrix = m.as_array() if isinstance(m, AdjacencyMatrix) else np.asarray(m, dtype=float)
    size = matrix.shape[0]
    if size == 0:
        return SpectralReport(radius=0.0, log_radius=float("-inf"), iterations=0, residual=0.0)
    if (matrix < 0).any():
        raise ValueError("spectral_radius expects a non-negative matrix")

    shifted = matrix + np.eye(size)
    vector = np.ones(size)
    previous = None
    estimate = residual = float("nan")
    for iteration in range(1, max_iterations + 1):
        image = shifted @ vector
        estimate = float(vector @ image) / float(vector @ vector)
        residual = float(np.max(np.abs(image - estimate * vector)))
        if previous is not None and abs(estimate - previous) <= tol and residual <= tol * max(1.0, estimate):
            radius = max(estimate - 1.0, 0.0)
            logger.debug(f"power iteration converged after {iteration} iterations: radius {radius!r}, residual {residual:.3e}")
            return SpectralReport(
                radius=radius,
                log_radius=math.log(radius) if radius > 0 else float("-inf"),
                iterations=iteration,
                residual=residual,
            )
        previous = estimate
        vector = image / np.max(np.abs(image))
    logger.warning(f"power iteration did not converge after {max_iterations} iterations (residual {residual:.3e})")
    raise ConvergenceError("power iteration did not converge", last_estimate=estimate - 1.0, iterations=max_iterations)


def run_growth_rate(m, n):
    """log(sum of the entries of M^n) / n, computed on exact integer powers."""
    total = sum(sum(row) for row in m.power(n))
    return math.log(total) / n if total else float("-inf")


def entropy(a, cover=None):
    """Entropy of the shift accepted by ``a``, read off its Fischer cover (computed unless given)."""
    if cover is None:
        cover = fischer_cover(a)
    report = spectral_radius(adjacency(cover.underlying))
    logger.info(f"entropy of {a}: {report.log_radius!r} (cover of {len(cover.states)} states)")
    return report.log_radius


def theorem1_check(a, x, tol=None):
    """
    Evaluate unambiguity (i), acceptance of X (ii) and the entropy equality (iii)
    for ``a`` against the shift presented by ``x``. ``consistent`` is False only
    when exactly two of the three conditions hold.
    """
    if tol is None:
        tol = getattr(settings, 'ENTROPY_TOLERANCE', 1e-9)
    for label, automaton in (("automaton", a), ("shift presentation", x)):
        if not automaton.is_shift_mode:
            raise HypothesisError(f"the {label} {automaton} is not in shift-space mode")
    outside = language_included(a, a.states, x, x.states)
    if outside is not None:
        raise HypothesisError(f"{a} accepts the word {format_word(outside)} which is not a factor of the shift")

    verdict = check_unambiguous(a)
    comparison = shift_language_equal(a, x)
    log_radius = spectral_radius(adjacency(a)).log_radius
    h = entropy(x)
    matches = abs(log_radius - h) <= tol if math.isfinite(log_radius) and math.isfinite(h) else log_radius == h
    held = sum((verdict.unambiguous, comparison.equal, matches))
    report = Theorem1Report(
        unambiguous=verdict.unambiguous,
        accepts_shift=comparison.equal,
        entropy_matches=matches,
        consistent=held != 2,
        log_radius=log_radius,
        entropy=h,
        tolerance=tol,
        witness=verdict.witness,
        counterexample=comparison.counterexample,
    )
    if not report.consistent:
        logger.error(f"two-of-three check failed on {a}: {report.conditions}")
    else:
        logger.info(f"two-of-three check on {a}: {report.conditions}")
    return report
