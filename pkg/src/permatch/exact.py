"""Exact sums of subpermanents and subhafnians.

The workhorse is :func:`multilinear_sum`, which recovers

    sum over i_1 < ... < i_m of  d^m p / dx_{i_1} ... dx_{i_m} (0)

for a degree-m polynomial ``p`` from its values on 0/1 vectors of weight
below ``m`` plus ``p(1, ..., 1)``.  If ``c_j`` denotes the total coefficient
of monomials using exactly ``j`` distinct variables, then the weight-``i``
sum ``s_i = sum_{|b| = i} p(b)`` satisfies ``s_i = sum_j C(n-j, i-j) c_j``,
and an integer vector ``d`` with ``d A = (-1, ..., -1)`` cancels every
``c_j`` with ``j < m`` from ``p(1)``.

Feeding ``p(x) = S_m(Ax)`` gives ``perm_m A``; feeding
``(x^T B x)^m / (2^m m!)`` gives ``haf_m B``.  Both are evaluated on integer
scalings of the input so the inner loops run on Python ints.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations
from typing import Callable, Sequence

from .core import (
    BudgetExceeded,
    RationalMatrix,
    SimpleGraph,
    SymmetricMatrix,
    binomial,
    graph_to_adjacency,
    subsets,
)

BRUTE_FORCE_BUDGET = 10**8


@dataclass(frozen=True)
class RyserCoefficients:
    n: int
    m: int
    d: tuple[int, ...]


def ryser_coefficients(n: int, m: int) -> RyserCoefficients:
    """Solve ``d A = (-1, ..., -1)`` with ``a_ij = C(n-j, i-j)`` (1-based, i >= j).

    ``A`` is (m-1) x (m-1) unit lower triangular, so back-substitution from the
    last column is exact over the integers.
    """
    if m > n:
        raise ValueError(f"degree m={m} exceeds variable count n={n}")
    size = max(m - 1, 0)
    d = [0] * (size + 1)  # 1-based
    for j in range(size, 0, -1):
        acc = -1
        for i in range(j + 1, size + 1):
            acc -= d[i] * math.comb(n - j, i - j)
        d[j] = acc
    return RyserCoefficients(n, m, tuple(d[1:]))


@dataclass
class PolynomialOracle:
    """Black-box homogeneous polynomial of degree ``degree`` in ``n`` variables.

    ``evaluate`` maps a point (sequence of numbers) to a value.  The optional
    ``on_subset`` evaluates at the 0/1 indicator of a sorted index tuple and is
    used by the weight sums when present.  ``log_exp_grad``, if given, maps a
    float vector ``y`` to ``(log p(e^y), gradient)`` for the capacity solver.
    ``calls`` counts exact evaluations.
    """

    n: int
    degree: int
    evaluate: Callable[[Sequence], object]
    on_subset: Callable[[tuple[int, ...]], object] | None = None
    log_exp_grad: Callable | None = field(default=None, compare=False)
    calls: int = field(default=0, compare=False)

    def __call__(self, x: Sequence):
        if len(x) != self.n:
            raise ValueError(f"expected {self.n} coordinates, got {len(x)}")
        self.calls += 1
        return self.evaluate(x)

    def at_subset(self, idx: tuple[int, ...]):
        self.calls += 1
        if self.on_subset is not None:
            return self.on_subset(idx)
        x = [0] * self.n
        for i in idx:
            x[i] = 1
        return self.evaluate(x)

    def reset_calls(self) -> None:
        self.calls = 0


def weight_sums(p: PolynomialOracle, max_weight: int) -> list:
    """``[s_1, ..., s_max_weight]`` with ``s_i`` the sum of ``p`` over weight-i 0/1 vectors."""
    if max_weight > p.n:
        raise ValueError("max_weight exceeds the number of variables")
    out = []
    for i in range(1, max_weight + 1):
        total = 0
        for idx in subsets(p.n, i):
            total += p.at_subset(idx)
        out.append(total)
    return out


def multilinear_sum(p: PolynomialOracle):
    """Sum of the coefficients of all multilinear degree-m monomials of ``p``.

    Uses exactly ``1 + sum_{j=1}^{m-1} C(n, j)`` oracle calls.
    """
    n, m = p.n, p.degree
    if m > n:
        raise ValueError(f"degree {m} exceeds variable count {n}")
    if m < 1:
        raise ValueError("degree must be at least 1")
    total = p.at_subset(tuple(range(n)))
    if m == 1:
        return total
    coeffs = ryser_coefficients(n, m).d
    for s, d in zip(weight_sums(p, m - 1), coeffs):
        total += s * d
    return total


def elementary_symmetric(values: Sequence, m: int):
    """``S_m(values)`` by the prefix recurrence ``e_j <- e_j + v e_{j-1}``."""
    if m < 0:
        return 0
    if m == 0:
        return 1
    if m > len(values):
        return 0
    e = [1] + [0] * m
    for count, v in enumerate(values, start=1):
        for j in range(min(count, m), 0, -1):
            e[j] += v * e[j - 1]
    return e[m]


# ---------------------------------------------------------------------------
# subpermanents


def _perm_oracle_int(rows: list[list[int]], m: int) -> PolynomialOracle:
    n = len(rows)
    cols = [[rows[i][j] for i in range(n)] for j in range(n)]

    def evaluate(x):
        z = [sum(a * xi for a, xi in zip(r, x)) for r in rows]
        return elementary_symmetric(z, m)

    def on_subset(idx):
        z = [0] * n
        for j in idx:
            cj = cols[j]
            for i in range(n):
                z[i] += cj[i]
        return elementary_symmetric(z, m)

    return PolynomialOracle(n, m, evaluate, on_subset)


def _check_square(a: RationalMatrix) -> None:
    if not a.is_square:
        raise ValueError(f"expected a square matrix, got {a.rows}x{a.cols}")


def perm_m(a: RationalMatrix, m: int) -> Fraction:
    """Sum of all m x m subpermanents of the square matrix ``a``."""
    _check_square(a)
    n = a.rows
    if m == 0:
        return Fraction(1)
    if not 1 <= m <= n:
        raise ValueError(f"m must lie in [1, {n}], got {m}")
    rows, scale = a.integer_rows()
    value = multilinear_sum(_perm_oracle_int(rows, m))
    return Fraction(value, scale**m)


def _permanent_expand(block: list[list], perms: list[tuple[int, ...]]):
    total = 0
    for sigma in perms:
        prod = 1
        for r, c in enumerate(sigma):
            prod *= block[r][c]
            if not prod:
                break
        total += prod
    return total


def perm_m_cover(a: RationalMatrix, cols: Sequence[int]) -> Fraction:
    """Sum of ``perm A[I|J]`` over all row sets ``I`` with ``|I| = |J|``.

    For a bipartite graph this counts the matchings covering exactly the
    column vertices ``J``.
    """
    _check_square(a)
    cols = sorted(set(cols))
    k = len(cols)
    if k == 0 or k > a.cols or any(not 0 <= j < a.cols for j in cols):
        raise ValueError("column subset must be nonempty and within range")
    rows, scale = a.integer_rows()
    perms = list(permutations(range(k)))
    total = 0
    for rset in combinations(range(a.rows), k):
        block = [[rows[i][j] for j in cols] for i in rset]
        total += _permanent_expand(block, perms)
    return Fraction(total, scale**k)


def brute_force_perm_m(a: RationalMatrix, m: int, budget: int = BRUTE_FORCE_BUDGET) -> Fraction:
    """``perm_m`` by direct enumeration of row sets, column sets and bijections."""
    _check_square(a)
    n = a.rows
    if m == 0:
        return Fraction(1)
    if not 1 <= m <= n:
        raise ValueError(f"m must lie in [1, {n}], got {m}")
    terms = binomial(n, m) ** 2 * math.factorial(m)
    if terms > budget:
        raise BudgetExceeded(f"{terms} terms exceed budget {budget}")
    rows, scale = a.integer_rows()
    perms = list(permutations(range(m)))
    col_sets = list(combinations(range(n), m))
    total = 0
    for rset in combinations(range(n), m):
        sub = [rows[i] for i in rset]
        for cset in col_sets:
            block = [[r[j] for j in cset] for r in sub]
            total += _permanent_expand(block, perms)
    return Fraction(total, scale**m)


# ---------------------------------------------------------------------------
# subhafnians


def _haf_oracle_int(b: list[list[int]], m: int) -> PolynomialOracle:
    """Oracle for ``(x^T B x)^m`` (the 2^m m! normalisation is applied later)."""
    n = len(b)

    def evaluate(x):
        q = 0
        for i in range(n):
            if x[i]:
                q += x[i] * sum(b[i][j] * x[j] for j in range(n))
        return q**m

    def on_subset(idx):
        q = 0
        for i in idx:
            bi = b[i]
            for j in idx:
                q += bi[j]
        return q**m

    return PolynomialOracle(n, 2 * m, evaluate, on_subset)


def haf_m(b: SymmetricMatrix, m: int) -> Fraction:
    """Sum over all m-matchings of K_N of the products of the matched entries.

    The diagonal of ``b`` is ignored.
    """
    n = b.dim
    if m == 0:
        return Fraction(1)
    if m < 1 or 2 * m > n:
        raise ValueError(f"need 1 <= 2m <= N, got m={m}, N={n}")
    rows, scale = b.zero_diagonal().as_rational().integer_rows()
    value = multilinear_sum(_haf_oracle_int(rows, m))
    return Fraction(value, 2**m * math.factorial(m) * scale**m)


def _perfect_matchings(vertices: tuple[int, ...]):
    if not vertices:
        yield ()
        return
    first, rest = vertices[0], vertices[1:]
    for k, partner in enumerate(rest):
        remaining = rest[:k] + rest[k + 1:]
        for tail in _perfect_matchings(remaining):
            yield ((first, partner),) + tail


def _double_factorial_odd(k: int) -> int:
    out = 1
    for v in range(k, 0, -2):
        out *= v
    return out


def brute_force_haf_m(b: SymmetricMatrix, m: int, budget: int = BRUTE_FORCE_BUDGET) -> Fraction:
    """``haf_m`` by listing every m-matching of the complete graph on N vertices."""
    n = b.dim
    if m == 0:
        return Fraction(1)
    if m < 1 or 2 * m > n:
        raise ValueError(f"need 1 <= 2m <= N, got m={m}, N={n}")
    count = binomial(n, 2 * m) * _double_factorial_odd(2 * m - 1)
    if count > budget:
        raise BudgetExceeded(f"{count} matchings exceed budget {budget}")
    rows, scale = b.as_rational().integer_rows()
    total = 0
    for vs in combinations(range(n), 2 * m):
        for matching in _perfect_matchings(vs):
            prod = 1
            for u, v in matching:
                prod *= rows[u][v]
                if not prod:
                    break
            total += prod
    return Fraction(total, scale**m)


# ---------------------------------------------------------------------------
# matching polynomials


@dataclass(frozen=True)
class MatchingPolynomial:
    """Coefficients ``c_k`` of ``sum_k phi(k) x^k`` (ascending powers)."""

    coefficients: tuple[Fraction, ...]

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def __getitem__(self, k: int) -> Fraction:
        return self.coefficients[k]

    def __len__(self) -> int:
        return len(self.coefficients)

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc


def matching_sequence(g) -> MatchingPolynomial:
    """Matching counts ``phi(0), phi(1), ...``.

    ``g`` is either a square :class:`RationalMatrix` (biadjacency of a bipartite
    multigraph, ``phi(k) = perm_k``) or a :class:`SimpleGraph`
    (``phi(k) = haf_k`` of its adjacency matrix).
    """
    if isinstance(g, RationalMatrix):
        _check_square(g)
        return MatchingPolynomial(tuple(perm_m(g, k) for k in range(g.rows + 1)))
    if isinstance(g, SimpleGraph):
        b = graph_to_adjacency(g)
        return MatchingPolynomial(tuple(haf_m(b, k) for k in range(g.n // 2 + 1)))
    if isinstance(g, SymmetricMatrix):
        return MatchingPolynomial(tuple(haf_m(g, k) for k in range(g.dim // 2 + 1)))
    raise TypeError(f"unsupported input type {type(g).__name__}")


def signed_matching_polynomial(b: RationalMatrix) -> list[Fraction]:
    """Ascending coefficients of ``sum_m (-1)^m perm_m(B) x^(n-m)``."""
    _check_square(b)
    n = b.rows
    coeffs = [Fraction(0)] * (n + 1)
    for m in range(n + 1):
        coeffs[n - m] = (-1) ** m * perm_m(b, m)
    return coeffs


# ---------------------------------------------------------------------------
# Sturm sequences


def _trim(p: list[Fraction]) -> list[Fraction]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _derivative(p: list[Fraction]) -> list[Fraction]:
    return [k * c for k, c in enumerate(p)][1:]


def _divmod(num: list[Fraction], den: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    num = list(num)
    q = [Fraction(0)] * max(len(num) - len(den) + 1, 0)
    lead = den[-1]
    while len(num) >= len(den) and num:
        shift = len(num) - len(den)
        c = num[-1] / lead
        q[shift] = c
        for k, dc in enumerate(den):
            num[shift + k] -= c * dc
        num.pop()
        _trim(num)
    return q, num


def _gcd(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    while b:
        a, b = b, _divmod(a, b)[1]
    return [c / a[-1] for c in a]


def _sign_changes(values) -> int:
    signs = [v > 0 for v in values if v != 0]
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def sturm_sequence(p: Sequence) -> list[list[Fraction]]:
    p = _trim([Fraction(c) for c in p])
    seq = [p, _derivative(p)]
    while seq[-1]:
        rem = _divmod(seq[-2], seq[-1])[1]
        seq.append([-c for c in rem])
    return [s for s in seq if s]


def count_distinct_real_roots(p: Sequence) -> int:
    seq = sturm_sequence(p)
    at_neg = [s[-1] * (-1) ** (len(s) - 1) for s in seq]
    at_pos = [s[-1] for s in seq]
    return _sign_changes(at_neg) - _sign_changes(at_pos)


def check_real_rooted(coefficients: Sequence) -> bool:
    """True iff every complex root of the polynomial is real.

    ``coefficients`` are ascending (``c_0 + c_1 x + ...``).  Repeated roots are
    handled by counting the real roots of the square-free part exactly.
    """
    p = _trim([Fraction(c) for c in coefficients])
    if not p:
        raise ValueError("the zero polynomial has no well-defined roots")
    if len(p) == 1:
        return True
    g = _gcd(p, _derivative(p))
    squarefree = _divmod(p, g)[0]
    return count_distinct_real_roots(squarefree) == len(squarefree) - 1
