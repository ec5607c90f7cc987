"""Random ``r``-regular bipartite multigraphs and random doubly stochastic matrices.

Multigraphs come from the configuration model: each side has ``r`` labelled
half-edges per vertex and a uniform perfect matching joins left half-edges
to right half-edges.  ``A[i][j]`` counts the pairs joining vertex ``i`` to
vertex ``j``, so every row and column of ``A`` sums to ``r``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .capacity import ConvergenceError, sinkhorn_scale
from .core import BudgetExceeded, RationalMatrix
from .exact import perm_m

PAIRING_BUDGET = math.factorial(8)
ROUNDING_BITS = 40


@dataclass(frozen=True)
class ConfigurationSample:
    a: RationalMatrix
    seed: object = None


def _pairing_matrix(n: int, r: int, pairing) -> list[list[int]]:
    counts = [[0] * n for _ in range(n)]
    for left, right in enumerate(pairing):
        counts[left // r][right // r] += 1
    return counts


def sample_configuration(n: int, r: int, rng: np.random.Generator | int | None = None) -> ConfigurationSample:
    """Draw one ``A`` from the configuration model on ``Delta(n, r)``.

    ``rng`` may be a numpy ``Generator`` or a seed for one.
    """
    if n < 1 or r < 1:
        raise ValueError("n and r must be positive")
    seed = rng if not isinstance(rng, np.random.Generator) else None
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    pairing = gen.permutation(n * r)
    return ConfigurationSample(RationalMatrix.from_rows(_pairing_matrix(n, r, pairing)), seed)


def _canonical(counts: list[list[int]]) -> tuple[tuple[int, ...], ...]:
    # perm_m is invariant under row and column permutations; sorting rows
    # then columns gives a cheap (not complete) canonical key
    rows = sorted(tuple(r) for r in counts)
    cols = sorted(zip(*rows))
    return tuple(sorted(zip(*cols)))


@lru_cache(maxsize=None)
def _perm_m_cached(key: tuple[tuple[int, ...], ...], m: int) -> Fraction:
    return perm_m(RationalMatrix.from_rows(key), m)


def exact_expectation_small(n: int, r: int, m: int) -> Fraction:
    """Average of ``perm_m A`` over all ``(rn)!`` half-edge pairings."""
    if n < 1 or r < 1 or not 0 <= m <= n:
        raise ValueError("need n, r >= 1 and 0 <= m <= n")
    total_pairings = math.factorial(r * n)
    if total_pairings > PAIRING_BUDGET:
        raise BudgetExceeded(f"(rn)! = {total_pairings} pairings exceeds {PAIRING_BUDGET}")
    if m == 0:
        return Fraction(1)
    total = sum(count * _perm_m_cached(key, m) for key, count in _pairing_tally(n, r).items())
    return Fraction(total, total_pairings)


@lru_cache(maxsize=None)
def _pairing_tally(n: int, r: int) -> dict[tuple, int]:
    tally: dict[tuple, int] = {}
    for pairing in itertools.permutations(range(r * n)):
        key = _canonical(_pairing_matrix(n, r, pairing))
        tally[key] = tally.get(key, 0) + 1
    return tally


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    trials: int


def monte_carlo_expectation(n: int, r: int, m: int, trials: int, seed: int = 0) -> MonteCarloEstimate:
    """Sample mean and standard error of ``perm_m`` over configuration-model draws.

    Trial ``i`` uses the generator seeded by ``(seed, i)``, so the estimate
    does not depend on how trials are scheduled.
    """
    if trials < 100:
        raise ValueError("at least 100 trials are required")
    if not 0 <= m <= n:
        raise ValueError(f"m must lie in [0, {n}], got {m}")
    values = np.empty(trials)
    for i in range(trials):
        sample = sample_configuration(n, r, np.random.default_rng((seed, i)))
        key = _canonical([[int(x) for x in row] for row in sample.a.to_rows()])
        values[i] = float(_perm_m_cached(key, m)) if m else 1.0
    stderr = float(values.std(ddof=1) / math.sqrt(trials))
    return MonteCarloEstimate(float(values.mean()), stderr, trials)


def _round_to_grid(x: float) -> Fraction:
    return Fraction(round(x * 2 ** ROUNDING_BITS), 2 ** ROUNDING_BITS)


def sample_random_doubly_stochastic(n: int, rng: np.random.Generator | int | None = None) -> RationalMatrix:
    """Sinkhorn-balanced uniform random matrix, exactly doubly stochastic.

    Entries are rounded to multiples of ``2^-40``; the last row and column
    then absorb the rounding so that every line sums to exactly 1.
    """
    if n < 1:
        raise ValueError("n must be positive")
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    raw = 1.0 - gen.random((n, n))  # in (0, 1], so strictly positive
    res = sinkhorn_scale(raw, tol=1e-14)
    if res.residual > 1e-12:
        raise ConvergenceError(f"Sinkhorn residual {res.residual:.3g}")
    rows = [[_round_to_grid(x) for x in row] for row in res.scaled]
    for i in range(n - 1):
        rows[i][n - 1] = 1 - sum(rows[i][:n - 1])
    for j in range(n):
        rows[n - 1][j] = 1 - sum(rows[i][j] for i in range(n - 1))
    return RationalMatrix.from_rows(rows)
