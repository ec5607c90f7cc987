"""Closed-form lower bounds, expectation formulas and matching entropies.

Lower bounds for ``perm_m`` of doubly stochastic matrices (and, through
capacity, for mixed derivatives of positive hyperbolic polynomials), the
exact mean of ``perm_m`` over random ``r``-regular bipartite multigraphs, and
the one-parameter entropy curves ``fh_r``, ``gh_r`` and ``h_K(r)`` indexed by
the dimer density ``p``.  Real-valued bounds are assembled in the log domain.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.special import logsumexp

from .core import RationalMatrix, binomial

BISECTION_BRACKET = (-60.0, 60.0)
BISECTION_TOL = 1e-12
CSV_HEADER = ("p", "fh", "gh", "hK")


def _xlogx(x: float) -> float:
    """``x log x`` with ``0 log 0 = 0``."""
    return 0.0 if x == 0 else x * math.log(x)


def _xlog1p_neg(x: float, y: float) -> float:
    """``x log(1 - y)`` with ``0 log 0 = 0``."""
    if x == 0:
        return 0.0
    return x * math.log1p(-y)


def _check_m(n: int, m: int) -> None:
    if not 1 <= m <= n:
        raise ValueError(f"m must lie in [1, {n}], got {m}")


# ---------------------------------------------------------------------------
# bounds for perm_m


def ft_lower_bound(n: int, m: int) -> Fraction:
    """``C(n, m)^2 m! / n^m``, the least value of ``perm_m`` on doubly stochastic matrices."""
    _check_m(n, m)
    return Fraction(binomial(n, m) ** 2 * math.factorial(m), n ** m)


def matching_lower_bound(n: int, m: int, r: int) -> Fraction:
    """Lower bound on the number of ``m``-matchings of an ``r``-regular bipartite graph."""
    if r < 1:
        raise ValueError("r must be positive")
    return ft_lower_bound(n, m) * r ** m


def log_gurvits_schrijver_bound(n: int, r: int) -> float:
    if not 1 <= r <= n:
        raise ValueError(f"r must lie in [1, {n}], got {r}")
    if r == 1:
        return 0.0
    return (math.lgamma(r + 1) - r * math.log(r)
            + (r - 1) * (n - r) * math.log((r - 1) / r))


def gurvits_schrijver_bound(n: int, r: int) -> float:
    """``r!/r^r ((r-1)/r)^((r-1)(n-r))``: a lower bound on ``perm A``.

    Valid for doubly stochastic ``A`` with at most ``r`` nonzero entries per
    column.  ``r = 1`` gives 1 (permutation matrices).
    """
    return math.exp(log_gurvits_schrijver_bound(n, r))


@dataclass(frozen=True)
class RegularityProfile:
    """Per-variable degree caps ``r_1..r_n`` for a degree ``m`` polynomial."""

    n: int
    m: int
    r_list: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "r_list", tuple(int(r) for r in self.r_list))
        if len(self.r_list) != self.n:
            raise ValueError(f"expected {self.n} degree caps, got {len(self.r_list)}")
        _check_m(self.n, self.m)
        bad = [r for r in self.r_list if not 1 <= r <= self.m]
        if bad:
            raise ValueError(f"degree caps must lie in [1, {self.m}], got {bad[0]}")

    @classmethod
    def uniform(cls, n: int, m: int, r: int) -> "RegularityProfile":
        return cls(n, m, (r,) * n)

    @classmethod
    def from_matrix(cls, a: RationalMatrix, m: int) -> "RegularityProfile":
        """Caps for ``S_m(Ax)``: column support sizes, clipped to ``[1, m]``."""
        return cls(a.cols, m, tuple(max(1, min(c, m)) for c in a.column_support()))

    @property
    def sorted_caps(self) -> tuple[int, ...]:
        return tuple(sorted(self.r_list))

    def threshold(self, s: int | None = None) -> int:
        """The 1-based index ``k`` at which the product of correction factors stops.

        Without ``s``: least ``k`` with ``r*_k > m - k``.  With ``s``: least
        ``k`` with ``r*_k + s > n - k``.
        """
        caps = self.sorted_caps
        for k in range(1, self.n + 1):
            r = caps[k - 1]
            if (r > self.m - k) if s is None else (r + s > self.n - k):
                return k
        raise AssertionError("unreachable: the last index always qualifies")


def log_generalized_ft_bound(profile: RegularityProfile, log_cap: float,
                             s: int | None = None) -> float:
    n, m = profile.n, profile.m
    if log_cap == -math.inf:
        return -math.inf
    k = profile.threshold(s)
    caps = profile.sorted_caps
    shift = n - m if s is None else s
    if s is None:
        front = (n - m) * math.log(n) - math.lgamma(n - m + 1)
    else:
        if s < 1:
            raise ValueError("s must be a positive integer")
        if m >= n:
            raise ValueError("the s-variant needs m < n")
        front = (math.lgamma(s * n + 1) - (n - m) * math.log(s)
                 - math.lgamma(n - m + 1) - math.lgamma((s - 1) * n + m + 1))
    tail = n - k + 1
    total = front + math.lgamma(tail + 1) - tail * math.log(tail)
    for r in caps[:k - 1]:
        e = r + shift - 1
        if e > 0:
            total += e * math.log(e / (e + 1))
    return total + log_cap


def generalized_ft_bound(profile: RegularityProfile, cap: float, s: int | None = None) -> float:
    """Lower bound on the sum of all order-``m`` square-free mixed derivatives at 0.

    Parameters
    ----------
    profile
        Degree caps of a positive hyperbolic polynomial ``p`` of degree ``m``.
    cap
        ``Cap p`` (or any lower bound for it).
    s
        ``None`` pads ``p`` by a power of the mean of the variables; a
        positive integer instead averages over random ``s``-regular
        companions, changing both the leading factor and the threshold index.
    """
    if cap < 0:
        raise ValueError("capacity must be nonnegative")
    log_cap = -math.inf if cap == 0 else math.log(cap)
    return math.exp(log_generalized_ft_bound(profile, log_cap, s))


def log_frtverv3_bound(n: int, m: int, r: int, s: int) -> float:
    if s < 1:
        raise ValueError("s must be a positive integer")
    if r < 1:
        raise ValueError("r must be a positive integer")
    if n - r - s + 1 < 1:
        raise ValueError(f"need r + s <= n, got r={r}, s={s}, n={n}")
    if not 1 <= m < n:
        raise ValueError(f"m must lie in [1, {n - 1}], got {m}")
    q = r + s
    return (math.lgamma(s * n + 1) + math.log(binomial(n, m)) - (n - m) * math.log(s)
            - math.lgamma(n - m + 1) - math.lgamma((s - 1) * n + m + 1)
            + math.lgamma(q + 1) - q * math.log(q)
            + (q - 1) * (n - q) * math.log((q - 1) / q))


def frtverv3_bound(n: int, m: int, r: int, s: int) -> float:
    """Lower bound on ``perm_m B`` for doubly stochastic ``B`` with at most ``r`` nonzeros per column.

    ``s`` is a free positive integer with ``r + s <= n``.  For large ``n`` the
    value leaves the double range; use :func:`log_frtverv3_bound` there.
    """
    return math.exp(log_frtverv3_bound(n, m, r, s))


def newton_amgm_bound(perm_total: float, n: int, m: int) -> float:
    """``C(n, m) (perm B)^(m/n)``, a lower bound on ``perm_m B``."""
    if perm_total < 0:
        raise ValueError("perm_total must be nonnegative")
    _check_m(n, m)
    return binomial(n, m) * float(perm_total) ** (m / n)


# ---------------------------------------------------------------------------
# expectations over random r-regular bipartite multigraphs


def expected_perm_m(n: int, r: int, m: int) -> Fraction:
    """Mean of ``perm_m A`` over the configuration model on ``Delta(n, r)``."""
    if not 0 <= m <= n or r < 1:
        raise ValueError("need 0 <= m <= n and r >= 1")
    return binomial(n, m) * expected_perm_m_fixed_J(n, r, m)


def expected_perm_m_fixed_J(n: int, r: int, m: int) -> Fraction:
    """Mean number of ``m``-matchings covering a fixed set of ``m`` columns."""
    if not 0 <= m <= n or r < 1:
        raise ValueError("need 0 <= m <= n and r >= 1")
    return Fraction(binomial(n, m) * r ** (2 * m) * math.factorial(m) * math.factorial(r * n - m),
                    math.factorial(r * n))


# ---------------------------------------------------------------------------
# entropy curves


def _check_p(p: float) -> None:
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")


def fh(r: int, p: float) -> float:
    """``(-p log p - 2(1-p) log(1-p) + p log r - p) / 2``."""
    _check_p(p)
    return 0.5 * (-_xlogx(p) - 2 * _xlogx(1 - p) + p * math.log(r) - p)


def gh(r: int, p: float) -> float:
    """``(p log r - p log p - 2(1-p) log(1-p) + (r-p) log(1-p/r)) / 2``."""
    _check_p(p)
    return 0.5 * (p * math.log(r) - _xlogx(p) - 2 * _xlogx(1 - p)
                  + _xlog1p_neg(r - p, p / r))


def argmax_fh(r: int) -> float:
    """Stationary point of ``fh_r``: the root in (0, 1) of ``r (1-p)^2 = p``."""
    return ((2 * r + 1) - math.sqrt(4 * r + 1)) / (2 * r)


def max_fh(r: int) -> float:
    return fh(r, argmax_fh(r))


def _krr_log_weights(r: int) -> np.ndarray:
    return np.array([2 * math.log(binomial(r, k)) + math.lgamma(k + 1) for k in range(r + 1)])


def pressure_K(r: int, t: float) -> float:
    """Pressure of a disjoint union of copies of ``K_{r,r}`` at activity ``e^(2t)``."""
    if r < 1:
        raise ValueError("r must be positive")
    k = np.arange(r + 1)
    return float(logsumexp(_krr_log_weights(r) + 2 * k * t)) / (2 * r)


def dimer_density(r: int, t: float) -> float:
    """Derivative of :func:`pressure_K` in ``t``: the mean matched fraction."""
    if r < 1:
        raise ValueError("r must be positive")
    k = np.arange(r + 1)
    logits = _krr_log_weights(r) + 2 * k * t
    weights = np.exp(logits - logsumexp(logits))
    return float(weights @ k) / r


def h_K(r: int, p: float) -> float:
    """Matching entropy of the ``K_{r,r}`` union at density ``p``.

    ``t`` with ``dimer_density(r, t) = p`` is found by bisection on
    ``[-60, 60]``; the endpoints take their limiting values.
    """
    _check_p(p)
    if p == 0:
        return 0.0
    if p == 1:
        return math.lgamma(r + 1) / (2 * r)
    lo, hi = BISECTION_BRACKET
    t = 0.5 * (lo + hi)
    for _ in range(200):
        t = 0.5 * (lo + hi)
        q = dimer_density(r, t)
        if abs(q - p) <= BISECTION_TOL:
            break
        if q < p:
            lo = t
        else:
            hi = t
    return pressure_K(r, t) - t * dimer_density(r, t)


def palrpc_bound(r: int, s: int, p: float) -> float:
    """Asymptotic lower bound for ``log perm_{pn} B_n / (2n)`` from the ``s``-padded inequality."""
    if r < 3 or s < 1:
        raise ValueError("need r >= 3 and s >= 1")
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    q = r + s
    return 0.5 * (-_xlogx(p) - 2 * _xlogx(1 - p)) + 0.5 * (
        (q - 1) * math.log1p(-1 / q) - (s - 1 + p) * math.log1p(-(1 - p) / s))


@dataclass(frozen=True)
class EntropyCurveRow:
    p: float
    fh: float
    gh: float
    h_K: float


def entropy_curve(r: int, grid_step: float = 0.01,
                  include_p: Iterable[float] = ()) -> list[EntropyCurveRow]:
    """Rows for ``p = grid_step, 2 grid_step, ...`` strictly below 1.

    Extra densities in ``include_p`` are merged into the grid.
    """
    if not 0 < grid_step <= 0.1:
        raise ValueError("grid_step must lie in (0, 0.1]")
    count = math.floor((1 - 1e-12) / grid_step)
    points = {round(j * grid_step, 12) for j in range(1, count + 1)}
    for p in include_p:
        if not 0 < p < 1:
            raise ValueError(f"included densities must lie in (0, 1), got {p}")
        points.add(float(p))
    return [EntropyCurveRow(p, fh(r, p), gh(r, p), h_K(r, p)) for p in sorted(points)]


def format_entropy_csv(rows: Sequence[EntropyCurveRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([f"{v:.12g}" for v in (row.p, row.fh, row.gh, row.h_K)])
    return buf.getvalue()
