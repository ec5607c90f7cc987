"""Exact-arithmetic matrices, graphs and subset enumeration.

Everything here is immutable once built.  Entries are stored as
:class:`fractions.Fraction` so that counting code never sees rounding.

Text formats
------------
Matrix::

    rows cols
    a11 a12 ...
    ...

where each entry is a decimal literal (``0.25``) or a rational ``p/q``.

Graph::

    N
    u v
    ...

with 0-based vertex indices, one edge per line.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Iterator, Sequence


class FormatError(ValueError):
    """Raised when a matrix or graph text file cannot be parsed."""


class BudgetExceeded(ValueError):
    """Raised when a brute-force enumeration would exceed its term budget."""


def binomial(n: int, k: int) -> int:
    """Exact binomial coefficient, 0 outside ``0 <= k <= n``."""
    if n < 0:
        raise ValueError(f"binomial requires n >= 0, got {n}")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def _to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite entry {value!r}")
        return Fraction(value)
    return Fraction(value)


@dataclass(frozen=True)
class RationalMatrix:
    """Dense nonnegative matrix with exact rational entries (row-major)."""

    rows: int
    cols: int
    entries: tuple[Fraction, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("matrix dimensions must be nonnegative")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"expected {self.rows * self.cols} entries, got {len(self.entries)}"
            )
        if any(e < 0 for e in self.entries):
            raise ValueError("matrix entries must be nonnegative")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "RationalMatrix":
        rows = [list(r) for r in rows]
        ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        flat = tuple(_to_fraction(x) for r in rows for x in r)
        return cls(len(rows), ncols, flat)

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls.from_rows([[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def ones(cls, n: int, m: int | None = None) -> "RationalMatrix":
        m = n if m is None else m
        return cls(n, m, (Fraction(1),) * (n * m))

    @classmethod
    def flat(cls, n: int) -> "RationalMatrix":
        """The matrix J_n with every entry equal to 1/n."""
        return cls(n, n, (Fraction(1, n),) * (n * n))

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_rows(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix.from_rows(
            [[self[i, j] for i in range(self.rows)] for j in range(self.cols)]
        )

    def scale(self, c) -> "RationalMatrix":
        c = _to_fraction(c)
        return RationalMatrix(self.rows, self.cols, tuple(c * e for e in self.entries))

    def row_sums(self) -> list[Fraction]:
        return [sum(self.row(i), Fraction(0)) for i in range(self.rows)]

    def col_sums(self) -> list[Fraction]:
        return [
            sum((self[i, j] for i in range(self.rows)), Fraction(0))
            for j in range(self.cols)
        ]

    def column_support(self) -> list[int]:
        """Number of nonzero entries in each column."""
        return [sum(1 for i in range(self.rows) if self[i, j] != 0) for j in range(self.cols)]

    def common_denominator(self) -> int:
        return reduce(math.lcm, (e.denominator for e in self.entries), 1)

    def integer_rows(self) -> tuple[list[list[int]], int]:
        """Return ``(L * A as int rows, L)`` with ``L`` the lcm of denominators."""
        lcm = self.common_denominator()
        flat = [int(e * lcm) for e in self.entries]
        c = self.cols
        return [flat[i * c:(i + 1) * c] for i in range(self.rows)], lcm

    def to_float_rows(self) -> list[list[float]]:
        return [[float(x) for x in self.row(i)] for i in range(self.rows)]


@dataclass(frozen=True)
class SymmetricMatrix:
    """N x N symmetric nonnegative matrix with exact entries."""

    dim: int
    entries: tuple[Fraction, ...]

    def __post_init__(self):
        n = self.dim
        if len(self.entries) != n * n:
            raise ValueError(f"expected {n * n} entries, got {len(self.entries)}")
        for i in range(n):
            for j in range(i + 1, n):
                if self.entries[i * n + j] != self.entries[j * n + i]:
                    raise ValueError(f"matrix not symmetric at ({i},{j})")
        if any(e < 0 for e in self.entries):
            raise ValueError("matrix entries must be nonnegative")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "SymmetricMatrix":
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("symmetric matrix must be square")
        return cls(n, tuple(_to_fraction(x) for r in rows for x in r))

    @classmethod
    def from_rational(cls, m: RationalMatrix) -> "SymmetricMatrix":
        if not m.is_square:
            raise ValueError("symmetric matrix must be square")
        return cls(m.rows, m.entries)

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i * self.dim + j]

    def to_rows(self) -> list[list[Fraction]]:
        n = self.dim
        return [list(self.entries[i * n:(i + 1) * n]) for i in range(n)]

    def zero_diagonal(self) -> "SymmetricMatrix":
        n = self.dim
        return SymmetricMatrix(
            n, tuple(Fraction(0) if k // n == k % n else e for k, e in enumerate(self.entries))
        )

    def add_diagonal(self, diag: Sequence) -> "SymmetricMatrix":
        rows = self.to_rows()
        for i, d in enumerate(diag):
            rows[i][i] += _to_fraction(d)
        return SymmetricMatrix.from_rows(rows)

    def as_rational(self) -> RationalMatrix:
        return RationalMatrix(self.dim, self.dim, self.entries)

    def support_graph(self) -> "SimpleGraph":
        """Graph with an edge (i, j), i != j, wherever the entry is positive."""
        n = self.dim
        return SimpleGraph(
            n,
            frozenset(
                (i, j) for i in range(n) for j in range(i + 1, n) if self[i, j] > 0
            ),
        )

    def to_float_rows(self) -> list[list[float]]:
        return [[float(x) for x in r] for r in self.to_rows()]


@dataclass(frozen=True)
class SimpleGraph:
    """Undirected graph on vertices ``0..n-1`` without loops or multi-edges."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        for u, v in self.edges:
            if not (0 <= u < v < self.n):
                raise ValueError(f"bad edge ({u}, {v}) for {self.n} vertices")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "SimpleGraph":
        canon = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            e = (min(u, v), max(u, v))
            if e in canon:
                raise ValueError(f"duplicate edge {e}")
            canon.add(e)
        return cls(n, frozenset(canon))

    @classmethod
    def complete(cls, n: int) -> "SimpleGraph":
        return cls(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)))

    @classmethod
    def cycle(cls, n: int) -> "SimpleGraph":
        return cls.from_edges(n, [(i, (i + 1) % n) for i in range(n)])

    @classmethod
    def path(cls, n: int) -> "SimpleGraph":
        return cls.from_edges(n, [(i, i + 1) for i in range(n - 1)])

    @classmethod
    def complete_multipartite(cls, sizes: Sequence[int]) -> "SimpleGraph":
        label = [c for c, s in enumerate(sizes) for _ in range(s)]
        n = len(label)
        return cls(
            n,
            frozenset(
                (i, j) for i in range(n) for j in range(i + 1, n) if label[i] != label[j]
            ),
        )

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def neighbours(self) -> list[set[int]]:
        nb: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in self.edges:
            nb[u].add(v)
            nb[v].add(u)
        return nb

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def subsets(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """Yield the k-subsets of ``range(n)`` in colexicographic order.

    Colex order on k-subsets coincides with increasing order of their bitmask
    encodings, so Gosper's hack walks it directly.
    """
    if k < 0 or k > n:
        return
    if k == 0:
        yield ()
        return
    mask = (1 << k) - 1
    limit = 1 << n
    while mask < limit:
        yield tuple(i for i in range(n) if mask >> i & 1)
        low = mask & -mask
        ripple = mask + low
        mask = (((ripple ^ mask) >> 2) // low) | ripple


class SubsetIterator:
    """Re-iterable colex enumeration of the ``k``-subsets of ``range(n)``."""

    def __init__(self, n: int, k: int):
        if n < 0:
            raise ValueError("universe size must be nonnegative")
        self.n = n
        self.k = k

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return subsets(self.n, self.k)

    def __len__(self) -> int:
        return binomial(self.n, self.k)


def is_doubly_stochastic(m: RationalMatrix, tol=0) -> bool:
    """True iff every row and column sums to 1.

    With the default ``tol=0`` the test is exact; a positive tolerance allows
    float-derived matrices that were rounded onto a rational grid.
    """
    if not m.is_square:
        raise ValueError("doubly stochastic test needs a square matrix")
    tol = _to_fraction(tol)
    return all(abs(s - 1) <= tol for s in m.row_sums()) and all(
        abs(s - 1) <= tol for s in m.col_sums()
    )


def bipartite_to_symmetric(a: RationalMatrix) -> SymmetricMatrix:
    """Block matrix ``[[0, A], [A^T, 0]]`` of the bipartite graph with biadjacency A."""
    if not a.is_square:
        raise ValueError("bipartite block construction needs a square matrix")
    n = a.rows
    zero = Fraction(0)
    rows = [[zero] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        for j in range(n):
            rows[i][n + j] = a[i, j]
            rows[n + j][i] = a[i, j]
    return SymmetricMatrix.from_rows(rows)


def graph_to_adjacency(g: SimpleGraph) -> SymmetricMatrix:
    n = g.n
    rows = [[0] * n for _ in range(n)]
    for u, v in g.edges:
        rows[u][v] = rows[v][u] = 1
    return SymmetricMatrix.from_rows(rows)


def complete_bipartite(r: int) -> RationalMatrix:
    """Biadjacency matrix of K_{r,r}."""
    return RationalMatrix.ones(r)


# ---------------------------------------------------------------------------
# text formats


def format_number(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _parse_entry(token: str) -> Fraction:
    try:
        if "/" in token:
            p, q = token.split("/")
            return Fraction(int(p), int(q))
        return Fraction(token)
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"bad matrix entry {token!r}") from exc


def parse_matrix(text: str) -> RationalMatrix:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty matrix file")
    header = lines[0].split()
    if len(header) != 2:
        raise FormatError("matrix header must be 'rows cols'")
    try:
        rows, cols = int(header[0]), int(header[1])
    except ValueError as exc:
        raise FormatError("matrix header must be two integers") from exc
    tokens = [t for ln in lines[1:] for t in ln.split()]
    if len(tokens) != rows * cols:
        raise FormatError(f"expected {rows * cols} entries, found {len(tokens)}")
    entries = tuple(_parse_entry(t) for t in tokens)
    if any(e < 0 for e in entries):
        raise FormatError("matrix entries must be nonnegative")
    return RationalMatrix(rows, cols, entries)


def format_matrix(m: RationalMatrix) -> str:
    out = [f"{m.rows} {m.cols}"]
    for i in range(m.rows):
        out.append(" ".join(format_number(x) for x in m.row(i)))
    return "\n".join(out) + "\n"


def parse_graph(text: str) -> SimpleGraph:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty graph file")
    try:
        n = int(lines[0])
        edges = []
        for ln in lines[1:]:
            parts = ln.split()
            if len(parts) != 2:
                raise FormatError(f"edge line must be 'u v': {ln!r}")
            edges.append((int(parts[0]), int(parts[1])))
    except ValueError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(str(exc)) from exc
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise FormatError(f"vertex index out of range in edge ({u}, {v})")
    try:
        return SimpleGraph.from_edges(n, edges)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def format_graph(g: SimpleGraph) -> str:
    return "\n".join([str(g.n)] + [f"{u} {v}" for u, v in g.sorted_edges()]) + "\n"
