"""Shared numerical kernels.

Log-gamma, generalized binomial coefficients, alternating-series summation
with a controlled truncation rule, and adaptive quadrature on finite and
semi-infinite intervals.  Everything here is a pure function; nothing keeps
mutable state between calls.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

import numpy as np
from scipy import integrate as _sp_integrate

from .errors import NumericalError, QuadratureError, SeriesConvergenceError

__all__ = [
    "SeriesControl",
    "QuadratureControl",
    "SeriesResult",
    "QuadResult",
    "log_gamma",
    "gen_binomial",
    "gen_binomial_row",
    "sum_alternating",
    "integrate_semi_infinite",
    "integrate_interval",
]


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy for infinite series.

    A summation stops once `consecutive_small` successive terms satisfy
    |term| < tail_tol * |partial_sum| (plain |term| < tail_tol while the
    partial sum is exactly zero), or when `max_terms` terms have been
    consumed, whichever comes first.
    """

    max_terms: int = 200
    tail_tol: float = 1e-12
    consecutive_small: int = 3

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError(f"max_terms must be >= 1, got {self.max_terms}")
        if not self.tail_tol > 0:
            raise ValueError(f"tail_tol must be > 0, got {self.tail_tol}")
        if self.consecutive_small < 1:
            raise ValueError(
                f"consecutive_small must be >= 1, got {self.consecutive_small}"
            )


@dataclass(frozen=True)
class QuadratureControl:
    """Accuracy/effort budget for adaptive quadrature."""

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 200

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be > 0, got {self.rel_tol}")
        if not self.abs_tol > 0:
            raise ValueError(f"abs_tol must be > 0, got {self.abs_tol}")
        if self.max_subdivisions < 1:
            raise ValueError(
                f"max_subdivisions must be >= 1, got {self.max_subdivisions}"
            )


class SeriesResult(NamedTuple):
    value: float
    terms_used: int
    converged: bool


class QuadResult(NamedTuple):
    value: float
    err_est: float


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for x > 0.

    Relative error is at the level of the C library lgamma
    (well under 1e-13 across [1e-3, 1e3]).
    """
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"log_gamma requires finite x > 0, got {x!r}")
    return math.lgamma(x)


def gen_binomial(a: float, k: int) -> float:
    """Generalized binomial coefficient C(a, k) for real a.

    Evaluated as the product a(a-1)...(a-k+1)/k! term by term, which keeps
    the sign exact for non-integer a and avoids gamma-function poles at
    negative integer arguments.
    """
    if not math.isfinite(a):
        raise ValueError(f"gen_binomial requires finite a, got {a!r}")
    if k < 0:
        raise ValueError(f"gen_binomial requires k >= 0, got {k}")
    c = 1.0
    for j in range(k):
        c *= (a - j) / (j + 1)
    return c


def gen_binomial_row(a: float, n: int, signed: bool = False) -> np.ndarray:
    """C(a, k) for k = 0..n-1 in one pass.

    With signed=True the entries carry an extra (-1)^k factor, i.e. the
    coefficients of the alternating binomial expansion of (1-x)^a.
    """
    if not math.isfinite(a):
        raise ValueError(f"gen_binomial_row requires finite a, got {a!r}")
    if n < 1:
        raise ValueError(f"gen_binomial_row requires n >= 1, got {n}")
    k = np.arange(n - 1, dtype=float)
    factors = (a - k) / (k + 1.0)
    if signed:
        factors = -factors
    out = np.empty(n)
    out[0] = 1.0
    if n > 1:
        np.cumprod(factors, out=out[1:])
    return out


def sum_alternating(
    terms: Iterable[float], ctl: SeriesControl | None = None
) -> SeriesResult:
    """Sum a series under the SeriesControl truncation rule.

    `terms` yields the series terms (sign included) for n = 0, 1, 2, ...
    Returns the partial sum, the number of terms consumed, and whether the
    tail rule fired.  converged is False only when `max_terms` was reached
    first; an iterator that simply runs out of terms counts as converged
    (the summation is then exact).  A non-finite term aborts with an error
    naming its index.
    """
    if ctl is None:
        ctl = SeriesControl()
    total = 0.0
    small_run = 0
    n = 0
    for term in terms:
        if n >= ctl.max_terms:
            return SeriesResult(total, n, False)
        if not math.isfinite(term):
            raise NumericalError(f"non-finite series term {term!r} at index {n}")
        total += term
        n += 1
        threshold = ctl.tail_tol * abs(total) if total != 0.0 else ctl.tail_tol
        if abs(term) < threshold:
            small_run += 1
            if small_run >= ctl.consecutive_small:
                return SeriesResult(total, n, True)
        else:
            small_run = 0
    return SeriesResult(total, n, True)


def _quad(f: Callable[[float], float], a: float, b: float,
          ctl: QuadratureControl) -> QuadResult:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _sp_integrate.IntegrationWarning)
        out = _sp_integrate.quad(
            f, a, b,
            epsabs=ctl.abs_tol, epsrel=ctl.rel_tol,
            limit=ctl.max_subdivisions, full_output=1,
        )
    value, err_est = out[0], out[1]
    if len(out) > 3:  # QUADPACK appended a failure message
        raise QuadratureError(
            f"quadrature on [{a}, {b}] did not converge: {out[3]}",
            best_estimate=value, err_est=err_est,
        )
    return QuadResult(value, err_est)


def integrate_semi_infinite(
    f: Callable[[float], float],
    ctl: QuadratureControl | None = None,
    lower: float = 0.0,
) -> QuadResult:
    """Adaptive quadrature of f over [lower, oo).

    The semi-infinite range is mapped onto a finite interval internally
    (QUADPACK's QAGI transformation); integrable endpoint singularities
    such as x**(p-1) with 0 < p < 1 are resolved by the adaptive
    subdivision.  Raises QuadratureError, carrying the best estimate, if
    the subdivision budget is exhausted.
    """
    return _quad(f, lower, np.inf, ctl or QuadratureControl())


def integrate_interval(
    f: Callable[[float], float],
    a: float,
    b: float,
    ctl: QuadratureControl | None = None,
) -> QuadResult:
    """Adaptive quadrature of f over the finite interval [a, b]."""
    return _quad(f, a, b, ctl or QuadratureControl())
