"""Positive hyperbolicity of quadratic forms and complete multipartite graphs.

``x^T B x`` with symmetric ``B`` is positive hyperbolic exactly when ``B`` is
nonzero, entrywise nonnegative and has at most one positive eigenvalue.  For
0/1 adjacency matrices this happens exactly for a complete multipartite graph
plus isolated vertices; both routes live here so they can be checked against
each other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core import SimpleGraph, SymmetricMatrix, graph_to_adjacency

LAMBDA2_TOL = 1e-9


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: tuple[float, ...]  # descending

    def __getitem__(self, k: int) -> float:
        return self.eigenvalues[k]

    def __len__(self) -> int:
        return len(self.eigenvalues)


def jacobi_eigenvalues(a: Sequence[Sequence[float]], rel_tol: float = 1e-12,
                       max_sweeps: int = 100) -> list[float]:
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi sweeps.

    Stops once the off-diagonal Frobenius norm falls below
    ``rel_tol * ||a||_F``.
    """
    n = len(a)
    a = [list(map(float, row)) for row in a]
    if n == 0:
        return []
    total = math.sqrt(sum(x * x for row in a for x in row))
    if total == 0.0:
        return [0.0] * n
    threshold = rel_tol * total
    for _ in range(max_sweeps):
        off = math.sqrt(sum(a[i][j] ** 2 for i in range(n) for j in range(n) if i != j))
        if off <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if apq == 0.0:
                    continue
                theta = (a[q][q] - a[p][p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp, akq = a[k][p], a[k][q]
                    a[k][p] = c * akp - s * akq
                    a[k][q] = s * akp + c * akq
                for k in range(n):
                    apk, aqk = a[p][k], a[q][k]
                    a[p][k] = c * apk - s * aqk
                    a[q][k] = s * apk + c * aqk
    return [a[i][i] for i in range(n)]


def symmetric_eigenvalues(b: SymmetricMatrix | Sequence[Sequence[float]]) -> Spectrum:
    rows = b.to_float_rows() if isinstance(b, SymmetricMatrix) else b
    return Spectrum(tuple(sorted(jacobi_eigenvalues(rows), reverse=True)))


def _second_eigenvalue_normalized(rows: list[list[float]]) -> float:
    norm = max(sum(abs(x) for x in r) for r in rows)
    scaled = [[x / norm for x in r] for r in rows]
    return symmetric_eigenvalues(scaled)[1]


def is_quadratic_hyperbolic(b: SymmetricMatrix | Sequence[Sequence[float]],
                            tol: float = LAMBDA2_TOL) -> bool:
    """Decide whether ``x^T B x`` is positive hyperbolic.

    ``b`` may be a :class:`SymmetricMatrix` or plain float rows (the latter so
    that matrices with negative entries can be rejected rather than refused
    at construction).  The eigenvalue test runs on ``B / ||B||_inf``.
    """
    rows = b.to_float_rows() if isinstance(b, SymmetricMatrix) else [list(map(float, r)) for r in b]
    n = len(rows)
    for i in range(n):
        for j in range(i + 1, n):
            if rows[i][j] != rows[j][i]:
                raise ValueError("matrix is not symmetric")
    if any(x < 0 for r in rows for x in r):
        return False
    if all(x == 0 for r in rows for x in r):
        return False
    if n == 1:
        return True
    return _second_eigenvalue_normalized(rows) <= tol


@dataclass(frozen=True)
class MultipartiteClassification:
    is_complete_multipartite: bool
    classes: tuple[tuple[int, ...], ...]
    isolated: tuple[int, ...]


def classify_complete_multipartite(g: SimpleGraph) -> MultipartiteClassification:
    """Test whether ``g`` minus its isolated vertices is complete multipartite.

    On the non-isolated vertices, non-adjacency must be an equivalence
    relation; its classes are the parts.
    """
    nb = g.neighbours()
    isolated = tuple(v for v in range(g.n) if not nb[v])
    active = [v for v in range(g.n) if nb[v]]
    if not active:
        return MultipartiteClassification(False, (), isolated)
    active_set = frozenset(active)
    classes: list[tuple[int, ...]] = []
    seen: set[int] = set()
    for v in active:
        if v in seen:
            continue
        cls = active_set - nb[v]  # contains v itself
        for u in cls:
            if active_set - nb[u] != cls:
                return MultipartiteClassification(False, (), isolated)
        seen |= cls
        classes.append(tuple(sorted(cls)))
    return MultipartiteClassification(True, tuple(classes), isolated)


def spectral_hyperbolic(g: SimpleGraph, tol: float = LAMBDA2_TOL) -> bool:
    """Spectral route: at least one edge and ``lambda_2(A(G)) <= tol``."""
    if not g.edges:
        return False
    return is_quadratic_hyperbolic(graph_to_adjacency(g), tol)


def hyperbolicity_cross_check(g: SimpleGraph) -> bool:
    """True iff the spectral and combinatorial verdicts coincide for ``g``."""
    return spectral_hyperbolic(g) == classify_complete_multipartite(g).is_complete_multipartite


def all_graphs(n: int):
    """Every labelled simple graph on ``n`` vertices (2^C(n,2) of them)."""
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for mask in range(1 << len(pairs)):
        yield SimpleGraph(n, frozenset(p for k, p in enumerate(pairs) if mask >> k & 1))
