"""Schedule constants from the defining integral equation.

alpha is the unique a > 1 with integral_0^1 a^(1-1/u)/u du = 1, and
beta = alpha / ln(alpha).  Both integrands here decay to 0 superexponentially
at the left endpoint, so defining the limit value 0 and trimming an
analytically negligible sliver makes plain adaptive Simpson sufficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache


class NumericError(RuntimeError):
    """Quadrature or root finding failed to converge within its budget."""


@dataclass(frozen=True)
class ScheduleConstants:
    alpha: float
    beta: float
    tolerance: float


def schedule_integrand(u: float, a: float) -> float:
    """a^(1-1/u)/u for u in (0, 1]; 0 at u = 0 by continuous extension."""
    if a <= 1.0:
        raise ValueError(f"a must be > 1, got {a} (integral diverges)")
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"u must be in [0, 1], got {u}")
    if u == 0.0:
        return 0.0
    return a ** (1.0 - 1.0 / u) / u


def _adaptive_simpson(f, a: float, b: float, tol: float, max_evals: int = 500_000) -> float:
    """Adaptive Simpson with interval bisection and Richardson correction."""
    evals = [0]

    def ev(x: float) -> float:
        evals[0] += 1
        if evals[0] > max_evals:
            raise NumericError("quadrature did not converge within its budget")
        return f(x)

    def simpson(x0, x2, f0, f1, f2):
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    def recurse(x0, x2, f0, f1, f2, whole, tol, depth):
        xm = 0.5 * (x0 + x2)
        xl = 0.5 * (x0 + xm)
        xr = 0.5 * (xm + x2)
        fl = ev(xl)
        fr = ev(xr)
        left = simpson(x0, xm, f0, fl, f1)
        right = simpson(xm, x2, f1, fr, f2)
        err = left + right - whole
        if depth > 60:
            raise NumericError("quadrature recursion depth exceeded")
        if abs(err) <= 15.0 * tol:
            return left + right + err / 15.0
        return recurse(x0, xm, f0, fl, f1, left, 0.5 * tol, depth + 1) + recurse(
            xm, x2, f1, fr, f2, right, 0.5 * tol, depth + 1
        )

    fa, fm, fb = ev(a), ev(0.5 * (a + b)), ev(b)
    whole = simpson(a, b, fa, fm, fb)
    return recurse(a, b, fa, fm, fb, whole, tol, 0)


def schedule_integral(a: float, tol: float = 1e-10) -> float:
    """integral_0^1 a^(1-1/u)/u du with absolute error <= tol."""
    if a <= 1.0:
        raise ValueError(f"a must be > 1, got {a}")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    # On [0, lo] the integrand is below a^(1 - 1/lo), far below any tolerance.
    lo = 1e-12
    return _adaptive_simpson(lambda u: schedule_integrand(u, a), lo, 1.0, tol)


def h(a: float, b: float, tol: float = 1e-10) -> float:
    """h(a, b) = integral_0^b (a/z) exp(-a/z) dz, with 0 at z = 0 by limit."""
    if a <= 0.0:
        raise ValueError(f"a must be > 0, got {a}")
    if b < 0.0:
        raise ValueError(f"b must be >= 0, got {b}")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if b == 0.0:
        return 0.0
    # Tail bound: integral_0^c (a/z)e^(-a/z) dz <= e^(-a/c); pick c so this
    # is below double-precision resolution.
    cut = min(b, a / 745.0)
    if cut >= b:
        return 0.0

    def integrand(z: float) -> float:
        if z <= 0.0:
            return 0.0
        r = a / z
        return r * math.exp(-r)

    return _adaptive_simpson(integrand, cut, b, tol)


@lru_cache(maxsize=8)
def solve_alpha(tol: float = 1e-8) -> ScheduleConstants:
    """Bisection for alpha on [1 + 1e-6, 10]; beta = alpha / ln(alpha).

    The integral is monotone decreasing in a, so the bracket is guaranteed to
    straddle 1; failure to do so signals a quadrature bug.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    lo, hi = 1.0 + 1e-6, 10.0
    qtol = min(1e-4, tol / 10.0)
    flo = schedule_integral(lo, qtol) - 1.0
    fhi = schedule_integral(hi, qtol) - 1.0
    if flo <= 0.0 or fhi >= 0.0:
        raise NumericError(
            f"bracket does not straddle 1: F({lo}) = {flo}, F({hi}) = {fhi}"
        )
    mid = 0.5 * (lo + hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        # Near the root, tighten quadrature so sign decisions stay reliable.
        q = max(tol / 10.0, min(qtol, (hi - lo) / 100.0))
        fmid = schedule_integral(mid, q) - 1.0
        if fmid > 0.0:
            lo = mid
        else:
            hi = mid
    alpha = 0.5 * (lo + hi)
    if abs(schedule_integral(alpha, tol / 10.0) - 1.0) > max(tol, 1e-9) * 10.0:
        raise NumericError("bisection converged to a non-root")
    return ScheduleConstants(alpha=alpha, beta=alpha / math.log(alpha), tolerance=tol)


def default_constants() -> ScheduleConstants:
    """Constants at the default tolerance, computed once per process."""
    return solve_alpha(1e-8)
