"""Scalar numeric primitives: Lambert W (principal branch) and a monotone
bisection root finder.

Both are used by the closed-form power policies, which need W on the real
principal branch only (arguments never go below -1/e) and a deterministic
root search for the airtime-packing multiplier.
"""

import math
from dataclasses import dataclass

_BRANCH = -math.exp(-1.0)  # -1/e, left edge of the principal branch
_DOMAIN_SLACK = 1e-15
_RESIDUAL_SCALE = 1e-12
_MAX_ITER = 50


@dataclass
class LambertWResult:
    """Outcome of a principal-branch Lambert W evaluation."""

    value: float
    iterations: int
    residual: float  # |value * exp(value) - x|


def _w0_seed(x: float) -> float:
    # Initial guess: branch-point series near -1/e, log-based elsewhere.
    if x < -0.2:
        p = math.sqrt(2.0 * (math.e * x + 1.0))
        return -1.0 + p - p * p / 3.0 + (11.0 / 72.0) * p * p * p
    if x <= math.e:
        return math.log1p(x)
    l1 = math.log(x)
    l2 = math.log(l1)
    return l1 - l2 + l2 / l1


def _w0_core(x: float) -> tuple[float, int]:
    """Halley iteration for w with w*exp(w) = x, w >= -1.

    Returns (w, iterations). Assumes x is already inside the domain.
    """
    if x == 0.0:
        return 0.0, 0
    if x <= _BRANCH:
        return -1.0, 0
    w = _w0_seed(x)
    for it in range(1, _MAX_ITER + 1):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        dw = f / denom
        w -= dw
        if abs(dw) <= 1e-16 * (2.0 + abs(w)):
            return w, it
    return w, _MAX_ITER


def lambert_w0(x: float) -> LambertWResult:
    """Principal branch of the Lambert W function.

    Solves w * exp(w) = x for w >= -1. Valid for x >= -1/e (a small
    numeric slack below the branch point is tolerated and clamped).

    Uses Halley's method seeded by a branch-point series (near -1/e) or a
    log-based asymptotic guess, capped at 50 iterations. The residual
    |w*exp(w) - x| is checked against 1e-12 * max(1, |x|) on exit.

    Raises:
        ValueError: if x is below -1/e - 1e-15.
        ArithmeticError: if the residual tolerance is not met (should not
            happen on the real principal branch).
    """
    if x < _BRANCH - _DOMAIN_SLACK:
        raise ValueError(f"lambert_w0 domain error: {x!r} < -1/e")
    xc = max(x, _BRANCH)
    w, iters = _w0_core(xc)
    residual = abs(w * math.exp(w) - x)
    if residual > _RESIDUAL_SCALE * max(1.0, abs(x)):
        raise ArithmeticError(
            f"lambert_w0 did not converge: x={x!r} residual={residual!r}")
    return LambertWResult(value=w, iterations=iters, residual=residual)


def solve_monotone_root(f, lo: float, hi: float, tol: float,
                        f_tol: float | None = None) -> float:
    """Bisection root of a decreasing function f on [lo, hi].

    Contract: f(lo) >= 0 >= f(hi) for an interior root. If f(lo) < 0 the
    boundary lo is returned (the root lies at or below the bracket); if
    f(hi) > 0 the boundary hi is returned. Otherwise bisects until the
    interval width is <= tol.

    Args:
        f: decreasing real function.
        lo, hi: bracket, hi > lo.
        tol: interval-width stopping tolerance.
        f_tol: optional early stop once |f(mid)| <= f_tol. The width bound
            then no longer applies; the returned point satisfies the value
            criterion instead.

    Raises:
        ValueError: if hi <= lo or tol <= 0.
    """
    if hi <= lo:
        raise ValueError(f"invalid bracket: [{lo!r}, {hi!r}]")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if f(lo) < 0.0:
        return lo
    if f(hi) > 0.0:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # bracket exhausted in float precision
            break
        fm = f(mid)
        if f_tol is not None and abs(fm) <= f_tol:
            return mid
        if fm >= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
