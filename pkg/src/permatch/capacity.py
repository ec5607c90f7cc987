"""Polynomial capacity and the capacity sandwich for ``perm_m``.

For a polynomial ``p`` with nonnegative coefficients in ``n`` variables,

    Cap p = inf { p(x) : x > 0, x_1 ... x_n = 1 },

and ``g(y) = log p(e^y)`` is convex, so ``log Cap p`` is the minimum of ``g``
on the hyperplane ``sum(y) = 0``.  Everything here runs in double precision
on log-scale quantities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import mpmath
import numpy as np
from scipy.linalg import null_space
from scipy.optimize import minimize
from scipy.special import logsumexp

from .core import RationalMatrix
from .exact import PolynomialOracle, elementary_symmetric, perm_m

DIVERGENCE_FLOOR = -1e3
DIVERGENCE_RADIUS = 1e3


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""


@dataclass(frozen=True)
class CapacityResult:
    log_capacity: float
    y: np.ndarray
    converged: bool
    diverged_to_zero: bool
    iterations: int
    gradient_norm: float = float("nan")

    @property
    def capacity(self) -> float:
        return 0.0 if self.diverged_to_zero else math.exp(self.log_capacity)


@dataclass(frozen=True)
class ScalingResult:
    d1: np.ndarray
    d2: np.ndarray
    scaled: np.ndarray
    residual: float
    iterations: int

    @property
    def log_det(self) -> float:
        """``log det(D1 D2)``."""
        return float(np.sum(np.log(self.d1)) + np.sum(np.log(self.d2)))


@dataclass(frozen=True)
class PermBounds:
    lower: float
    upper: float
    log_capacity: float
    converged: bool
    diverged_to_zero: bool


# ---------------------------------------------------------------------------
# log-domain elementary symmetric functions


def _log_esym_table(logz: np.ndarray, k: int) -> np.ndarray:
    """``T[i, a] = log S_a(z_0, ..., z_{i-1})`` for ``i <= n``, ``a <= k``."""
    n = len(logz)
    table = np.full((n + 1, k + 1), -np.inf)
    table[0, 0] = 0.0
    for i in range(n):
        prev = table[i]
        row = prev.copy()
        row[1:] = np.logaddexp(prev[1:], prev[:-1] + logz[i])
        table[i + 1] = row
    return table


def log_esym_with_grad(logz: np.ndarray, k: int) -> tuple[float, np.ndarray]:
    """``log S_k(z)`` and its gradient with respect to ``log z``."""
    n = len(logz)
    prefix = _log_esym_table(logz, k)
    suffix = _log_esym_table(logz[::-1], k)[::-1]  # suffix[i, b] = log S_b(z_i..z_{n-1})
    total = prefix[n, k]
    # leave-one-out: log S_{k-1}(z without z_i)
    loo = logsumexp(prefix[:n, :k] + suffix[1:, k - 1::-1], axis=1)
    with np.errstate(invalid="ignore"):
        grad = np.where(np.isfinite(loo), np.exp(logz + loo - total), 0.0)
    return float(total), grad


def p_kA_oracle(a: RationalMatrix, k: int) -> PolynomialOracle:
    """Oracle for ``p_{k,A}(x) = S_k(Ax)``, with ``log p(e^y)`` and its gradient.

    The exact path (``oracle(x)``) keeps rational arithmetic; the
    ``log_exp_grad`` attribute is the float path used by the optimiser.
    """
    if not 1 <= k <= a.rows:
        raise ValueError(f"k must lie in [1, {a.rows}], got {k}")
    if any(all(x == 0 for x in a.row(i)) for i in range(a.rows)):
        raise ValueError("every row of A must be nonzero")
    rows = a.to_rows()
    with np.errstate(divide="ignore"):
        log_a = np.log(np.array(a.to_float_rows(), dtype=float))

    def evaluate(x):
        z = [sum(aij * xj for aij, xj in zip(r, x)) for r in rows]
        return elementary_symmetric(z, k)

    def log_exp_grad(y):
        y = np.asarray(y, dtype=float)
        logits = log_a + y[None, :]
        logz = logsumexp(logits, axis=1)
        value, w = log_esym_with_grad(logz, k)
        resp = np.exp(logits - logz[:, None])
        return value, w @ resp

    return PolynomialOracle(a.cols, k, evaluate, log_exp_grad=log_exp_grad)


def with_mean_power(oracle: PolynomialOracle, power: int) -> PolynomialOracle:
    """``p(x) * ((x_1 + ... + x_n) / n)^power``."""
    n = oracle.n
    inner = oracle.evaluate

    def evaluate(x):
        return inner(x) * (Fraction(sum(x)) / n) ** power

    base = oracle.log_exp_grad
    log_exp_grad = None
    if base is not None:
        def log_exp_grad(y):
            y = np.asarray(y, dtype=float)
            value, grad = base(y)
            lse = logsumexp(y)
            soft = np.exp(y - lse)
            return value + power * (lse - math.log(n)), grad + power * soft

    return PolynomialOracle(n, oracle.degree + power, evaluate, log_exp_grad=log_exp_grad)


def _finite_difference_log_exp(oracle: PolynomialOracle, h: float = 1e-6) -> Callable:
    # mpmath keeps e^y representable far outside the double range
    def g(y):
        with mpmath.workdps(30):
            value = oracle.evaluate([mpmath.exp(mpmath.mpf(float(v))) for v in y])
            if value <= 0:
                return -math.inf
            return float(mpmath.log(value))

    def log_exp_grad(y):
        y = np.asarray(y, dtype=float)
        grad = np.empty_like(y)
        for i in range(len(y)):
            e = np.zeros_like(y)
            e[i] = h
            grad[i] = (g(y + e) - g(y - e)) / (2 * h)
        return g(y), grad

    return log_exp_grad


# ---------------------------------------------------------------------------
# convex minimisation


class _Diverged(Exception):
    def __init__(self, y, value):
        super().__init__()
        self.y, self.value = y, value


def _hyperplane_basis(n: int) -> np.ndarray:
    """Orthonormal basis (as columns) of ``{y : sum(y) = 0}``."""
    return null_space(np.ones((1, n)))


def log_capacity(p: PolynomialOracle, tol: float = 1e-8, max_iter: int = 10_000,
                 y0: np.ndarray | None = None, restarts: int = 5) -> CapacityResult:
    """Minimise ``log p(e^y)`` over ``sum(y) = 0``.

    L-BFGS runs on coordinates of an orthonormal basis of the hyperplane and
    is restarted from its own output while the projected gradient still
    exceeds ``tol`` in the max norm.  ``diverged_to_zero`` is raised when the
    objective drops below -1e3 while the iterate leaves the box of radius
    1e3, i.e. ``Cap p = 0``.
    """
    fg = p.log_exp_grad or _finite_difference_log_exp(p)
    n = p.n
    y = np.zeros(n) if y0 is None else np.asarray(y0, dtype=float) - np.mean(y0)
    value, grad = fg(y)
    if not np.isfinite(value):
        raise ValueError("polynomial is not positive at the starting point")

    def pgnorm(g):
        return float(np.max(np.abs(g - g.mean()))) if n else 0.0

    gnorm = pgnorm(grad)
    if n <= 1 or gnorm <= tol:
        return CapacityResult(value, y, True, False, 0, gnorm)
    basis = _hyperplane_basis(n)
    best = [value, y, grad]

    def objective(z):
        yy = basis @ z
        v, g = fg(yy)
        if math.isnan(v):
            raise ValueError("non-finite polynomial value during capacity search")
        if v < best[0]:
            best[:] = [v, yy, g]
        if v < DIVERGENCE_FLOOR and float(np.max(np.abs(yy))) > DIVERGENCE_RADIUS:
            raise _Diverged(yy, v)
        return v, basis.T @ g

    iterations = 0
    for _ in range(restarts + 1):
        try:
            res = minimize(objective, basis.T @ best[1], jac=True, method="L-BFGS-B",
                           options={"maxiter": max(max_iter - iterations, 1),
                                    "gtol": tol * 1e-2, "ftol": 0.0, "maxcor": 20})
        except _Diverged as exc:
            return CapacityResult(-math.inf, exc.y, False, True, iterations, float("nan"))
        iterations += int(res.nit)
        gnorm = pgnorm(best[2])
        if gnorm <= tol or iterations >= max_iter or res.nit == 0:
            break
    if gnorm > tol and iterations < max_iter:
        extra, gnorm = _newton_polish(fg, basis, best, tol, steps=min(20, max_iter - iterations))
        iterations += extra
    value, y, grad = best
    return CapacityResult(value, y, gnorm <= tol, False, iterations, gnorm)


def _newton_polish(fg, basis, best, tol, steps=20, h=1e-5):
    """Newton steps judged by the projected gradient, not the objective.

    Once line searches stall on rounding noise in ``log p``, the analytic
    gradient still carries information.  The Hessian comes from central
    differences of the gradient.
    """
    def pg(g):
        return basis.T @ g

    def pgnorm(g):
        return float(np.max(np.abs(g - g.mean())))

    k = basis.shape[1]
    gnorm = pgnorm(best[2])
    done = 0
    for done in range(1, steps + 1):
        y = best[1]
        hess = np.empty((k, k))
        for j in range(k):
            e = h * basis[:, j]
            hess[:, j] = (pg(fg(y + e)[1]) - pg(fg(y - e)[1])) / (2 * h)
        hess = (hess + hess.T) / 2
        dz = np.linalg.lstsq(hess, -pg(best[2]), rcond=1e-12)[0]
        t = 1.0
        for _ in range(30):
            trial = y + t * (basis @ dz)
            v, g = fg(trial)
            if np.isfinite(v) and pgnorm(g) < gnorm:
                best[:] = [v, trial, g]
                gnorm = pgnorm(g)
                break
            t *= 0.5
        else:
            break
        if gnorm <= tol:
            break
    return done, gnorm


# ---------------------------------------------------------------------------
# Sinkhorn scaling


def sinkhorn_scale(b, tol: float = 1e-12, max_iter: int = 100_000) -> ScalingResult:
    """Alternate row and column normalisation of a positive square matrix.

    Returns ``D1, D2`` with ``D1 B D2`` doubly stochastic up to ``residual``,
    gauge-fixed so that ``prod(d1) == prod(d2)``.
    """
    mat = np.array(b.to_float_rows() if isinstance(b, RationalMatrix) else b, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("Sinkhorn scaling needs a square matrix")
    if np.any(mat <= 0):
        raise ValueError("Sinkhorn scaling needs strictly positive entries")
    n = mat.shape[0]
    d1 = np.ones(n)
    d2 = np.ones(n)

    def residual_of(s):
        return max(np.max(np.abs(s.sum(axis=1) - 1)), np.max(np.abs(s.sum(axis=0) - 1)))

    scaled = mat.copy()
    res = residual_of(scaled)
    it = 0
    while res > tol and it < max_iter:
        it += 1
        d1 /= scaled.sum(axis=1)
        scaled = d1[:, None] * mat * d2[None, :]
        d2 /= scaled.sum(axis=0)
        scaled = d1[:, None] * mat * d2[None, :]
        res = residual_of(scaled)
    shift = (np.sum(np.log(d2)) - np.sum(np.log(d1))) / (2 * n)
    d1 = d1 * math.exp(shift)
    d2 = d2 * math.exp(-shift)
    scaled = d1[:, None] * mat * d2[None, :]
    return ScalingResult(d1, d2, scaled, float(residual_of(scaled)), it)


def log_capacity_via_sinkhorn(b, tol: float = 1e-12, max_iter: int = 100_000) -> float:
    res = sinkhorn_scale(b, tol, max_iter)
    if res.residual > max(tol, 1e-9):
        raise ConvergenceError(f"Sinkhorn residual {res.residual:.3g} after {res.iterations} iterations")
    return -res.log_det


def capacity_via_sinkhorn(b, tol: float = 1e-12, max_iter: int = 100_000) -> float:
    """``Cap prod_i (Bx)_i = 1 / det(D1 D2)`` for a positive square ``B``."""
    return math.exp(log_capacity_via_sinkhorn(b, tol, max_iter))


# ---------------------------------------------------------------------------
# sandwich for perm_m


def approx_perm_m(a: RationalMatrix, m: int, tol: float = 1e-8,
                  max_iter: int = 10_000) -> PermBounds:
    """Capacity bounds ``lower <= perm_m A <= upper``.

    With ``q = S_m(Ax)`` and ``p = q ((x_1 + ... + x_n)/n)^(n-m)``, the mixed
    derivative of ``p`` equals ``(n-m)!/n^(n-m) perm_m A`` and lies between
    ``n!/n^n Cap p`` and ``Cap p``.
    """
    if not a.is_square:
        raise ValueError("approx_perm_m needs a square matrix")
    n = a.rows
    if not 1 <= m <= n:
        raise ValueError(f"m must lie in [1, {n}], got {m}")
    keep = [i for i in range(n) if any(x != 0 for x in a.row(i))]
    if len(keep) < m:
        return PermBounds(0.0, 0.0, -math.inf, True, True)
    reduced = RationalMatrix.from_rows([a.row(i) for i in keep])
    oracle = with_mean_power(p_kA_oracle(reduced, m), n - m)
    res = log_capacity(oracle, tol=tol, max_iter=max_iter)
    if res.diverged_to_zero:
        return PermBounds(0.0, 0.0, -math.inf, False, True)
    log_unwind = (n - m) * math.log(n) - math.lgamma(n - m + 1)
    log_upper = res.log_capacity + log_unwind
    log_lower = log_upper + math.lgamma(n + 1) - n * math.log(n)
    return PermBounds(math.exp(log_lower), math.exp(log_upper), res.log_capacity,
                      res.converged, False)


def positivity_check(a: RationalMatrix, m: int, route: str = "exact") -> bool:
    """Whether ``perm_m A > 0``, decided exactly or through the capacity."""
    if route == "exact":
        return perm_m(a, m) > 0
    if route == "capacity":
        # Cap p > 0 exactly when perm_m A > 0; only divergence matters here
        return not approx_perm_m(a, m).diverged_to_zero
    raise ValueError(f"unknown route {route!r}")
