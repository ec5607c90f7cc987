import itertools
import math
from collections import Counter
from fractions import Fraction as F

import numpy as np
import pytest

from permatch.bounds import expected_perm_m, ft_lower_bound
from permatch.core import BudgetExceeded, is_doubly_stochastic
from permatch.exact import perm_m
from permatch.random_regular import (exact_expectation_small, monte_carlo_expectation,
                                     sample_configuration, sample_random_doubly_stochastic)


def all_configurations(n, r):
    """Every half-edge pairing, as a tuple-of-tuples matrix (independent of the package)."""
    for pairing in itertools.permutations(range(n * r)):
        a = [[0] * n for _ in range(n)]
        for left, right in enumerate(pairing):
            a[left // r][right // r] += 1
        yield tuple(map(tuple, a))


def permuted(a, p, q):
    n = len(a)
    return tuple(tuple(a[p[i]][q[j]] for j in range(n)) for i in range(n))


class TestSampler:
    def test_margins(self):
        gen = np.random.default_rng(0)
        for _ in range(200):
            n, r = int(gen.integers(1, 8)), int(gen.integers(1, 6))
            a = sample_configuration(n, r, gen).a
            assert a.row_sums() == [r] * n and a.col_sums() == [r] * n
            assert all(x.denominator == 1 for x in a.entries)

    def test_single_vertex(self):
        assert sample_configuration(1, 3, 5).a.to_rows() == [[3]]

    def test_seed_reproducible(self):
        assert sample_configuration(5, 3, 42).a == sample_configuration(5, 3, 42).a
        assert sample_configuration(5, 3, 42).seed == 42

    def test_invalid(self):
        with pytest.raises(ValueError):
            sample_configuration(0, 2)

    def test_two_by_two_exhaustive(self):
        counts = Counter(all_configurations(2, 2))
        assert sum(counts.values()) == 24
        assert F(counts[((1, 1), (1, 1))], 24) == F(2, 3)

    def test_two_by_two_empirical(self):
        trials = 6000
        hits = sum(sample_configuration(2, 2, np.random.default_rng((9, i))).a.to_rows() == [[1, 1], [1, 1]]
                   for i in range(trials))
        sd = math.sqrt(trials * (2 / 3) * (1 / 3))
        assert abs(hits - trials * 2 / 3) <= 4 * sd

    @pytest.mark.parametrize("n,r", [(2, 2), (3, 2), (2, 3)])
    def test_permutation_invariance(self, n, r):
        base = Counter(all_configurations(n, r))
        gen = np.random.default_rng(n * 10 + r)
        for _ in range(3):
            p, q = gen.permutation(n), gen.permutation(n)
            moved = Counter({permuted(a, p, q): c for a, c in base.items()})
            assert moved == base


class TestExactExpectation:
    def test_examples(self):
        assert exact_expectation_small(2, 2, 2) == F(8, 3) == expected_perm_m(2, 2, 2)
        assert exact_expectation_small(2, 1, 1) == 2
        assert exact_expectation_small(2, 2, 1) == 4

    @pytest.mark.parametrize("n,r", [(n, r) for n in range(1, 9) for r in range(1, 9) if n * r <= 8])
    def test_matches_formula(self, n, r):
        for m in range(n + 1):
            assert exact_expectation_small(n, r, m) == expected_perm_m(n, r, m)

    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            exact_expectation_small(3, 3, 1)


class TestMonteCarlo:
    def test_within_three_stderr(self):
        est = monte_carlo_expectation(4, 3, 2, 10_000, seed=1)
        assert abs(est.mean - float(expected_perm_m(4, 3, 2))) <= 3 * est.stderr

    def test_order_zero(self):
        est = monte_carlo_expectation(5, 2, 0, 100, seed=3)
        assert est.mean == 1.0 and est.stderr == 0.0

    def test_deterministic(self):
        assert monte_carlo_expectation(4, 2, 3, 300, seed=5) == monte_carlo_expectation(4, 2, 3, 300, seed=5)

    def test_seed_matters(self):
        assert monte_carlo_expectation(4, 2, 3, 300, seed=5) != monte_carlo_expectation(4, 2, 3, 300, seed=6)

    def test_too_few_trials(self):
        with pytest.raises(ValueError):
            monte_carlo_expectation(4, 2, 3, 99)


class TestRandomStochastic:
    def test_margins(self):
        gen = np.random.default_rng(4)
        for n in range(1, 9):
            b = sample_random_doubly_stochastic(n, gen)
            assert is_doubly_stochastic(b)
            assert all(x > 0 for x in b.entries)

    def test_single(self):
        assert sample_random_doubly_stochastic(1, 0).to_rows() == [[1]]

    def test_ft_domination(self):
        gen = np.random.default_rng(12)
        for _ in range(20):
            n = int(gen.integers(1, 7))
            b = sample_random_doubly_stochastic(n, gen)
            for m in range(1, n + 1):
                assert perm_m(b, m) >= ft_lower_bound(n, m)

    def test_invalid(self):
        with pytest.raises(ValueError):
            sample_random_doubly_stochastic(0)
