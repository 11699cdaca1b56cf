"""Asymptotics of slowly growing Riccati-like sequences.

This module handles positive sequences of the form

    X_k = X_{k-1} + 1 / (C * u**N + f(u**(N-1))),   u = k**-delta * X_{k-1},

with ``C > 0``, integer ``N >= 1``, ``delta in [0, 1]`` and a caller-supplied
positive ``f``.  Such sequences grow without bound; the interesting question
is the rate:

* ``delta < 1``:  ``X_k / k**beta -> [(N+1) / ((1 + delta*N) * C)]**(1/(N+1))``
  with ``beta = (1 + delta*N) / (N + 1)`` (the ``f`` term is asymptotically
  negligible).
* ``delta = 1``:  ``X_k / k`` converges to the unique ``y`` solving
  ``y * denom(y) = 1`` where ``denom`` is the full one-step denominator
  evaluated at ``u = y``; here ``f`` is *not* negligible.

``fixed_point`` solves the classical balance equation
``f(y) = 1/y - C*y**N``; ``predict_limit`` uses the exact one-step map for
its ``delta = 1`` branch, which coincides with ``fixed_point`` whenever
``f(y**(N-1)) == f(y)`` (e.g. ``N = 2`` or constant ``f``) and is what the
iterated recursion actually converges to in general.

Note on hypotheses: bounds of the form ``f(x) <= M*x`` cannot hold uniformly
down to ``x = 0`` for an ``f`` bounded away from zero, so ``f`` is validated
only along the visited trajectory, where its argument grows.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable

__all__ = [
    "RiccatiSpec",
    "RiccatiLimit",
    "LimitMethod",
    "riccati_step",
    "riccati_trajectory",
    "predict_limit",
    "fixed_point",
    "empirical_limit",
    "linear_growth_constant",
]

_BISECTION_ITERATIONS = 200
_RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class RiccatiSpec:
    """One recursion instance: constants, scaling exponent, f handle, start value."""

    c: float
    n: int
    delta: float
    f: Callable[[float], float]
    x0: float = 1.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.c) or self.c <= 0.0:
            raise ValueError(f"C must be finite and > 0, got {self.c!r}")
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"N must be an integer >= 1, got {self.n!r}")
        if not (0.0 <= self.delta <= 1.0):
            raise ValueError(f"delta must lie in [0, 1], got {self.delta!r}")
        if not math.isfinite(self.x0) or self.x0 <= 0.0:
            raise ValueError(f"x0 must be finite and > 0, got {self.x0!r}")
        if not callable(self.f):
            raise ValueError("f must be callable")

    @property
    def beta(self) -> float:
        """Growth exponent (1 + delta*N) / (N + 1)."""
        return (1.0 + self.delta * self.n) / (self.n + 1.0)


class LimitMethod(Enum):
    CLOSED_FORM = "closed-form"
    FIXED_POINT = "fixed-point"


@dataclass(frozen=True)
class RiccatiLimit:
    """Predicted limit of X_k / k**beta."""

    beta: float
    constant: float
    method: LimitMethod


def _f_value(spec: RiccatiSpec, arg: float) -> float:
    val = spec.f(arg)
    if not isinstance(val, (int, float)) or not math.isfinite(val) or val <= 0.0:
        raise ValueError(
            f"f({arg!r}) returned {val!r}; f must return finite positive reals"
        )
    return float(val)


def riccati_step(spec: RiccatiSpec, k: int, x_prev: float) -> float:
    """One step: x + 1/(C*u**N + f(u**(N-1))) with u = k**-delta * x.

    For ``N = 1`` the argument of ``f`` is ``u**0 = 1``, so ``f`` contributes
    a constant.  The result is always strictly larger than ``x_prev``.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not math.isfinite(x_prev) or x_prev <= 0.0:
        raise ValueError(f"x_prev must be finite and > 0, got {x_prev!r}")
    if spec.delta == 0.0:
        u = x_prev
    elif spec.delta == 1.0:
        u = x_prev / k
    else:
        u = math.exp(-spec.delta * math.log(k)) * x_prev
    try:
        denom = spec.c * u**spec.n + _f_value(spec, u ** (spec.n - 1))
    except OverflowError:
        raise ArithmeticError(f"denominator overflowed at step k={k}") from None
    return x_prev + 1.0 / denom


def riccati_trajectory(
    spec: RiccatiSpec, k_max: int, points_per_decade: int = 32
) -> list[tuple[int, float]]:
    """Run the recursion to ``k_max``, recording geometrically spaced (k, X_k).

    Always records k = 1 and k = k_max.  Raises on overflow with the failing k.
    """
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    n_pts = int(points_per_decade * math.log10(k_max)) + 1 if k_max > 1 else 1
    ks = {int(round(10.0 ** (i / points_per_decade))) for i in range(n_pts)}
    ks |= {1, k_max}
    record = sorted(k for k in ks if 1 <= k <= k_max)
    next_idx = 0

    c, n, delta, f = spec.c, spec.n, spec.delta, spec.f
    x = spec.x0
    out: list[tuple[int, float]] = []
    for k in range(1, k_max + 1):
        if delta == 0.0:
            u = x
        elif delta == 1.0:
            u = x / k
        else:
            u = math.exp(-delta * math.log(k)) * x
        try:
            fval = f(u ** (n - 1))
            if not (fval > 0.0) or not math.isfinite(fval):
                raise ValueError(
                    f"f returned {fval!r} at step k={k}; must be finite and positive"
                )
            x = x + 1.0 / (c * u**n + fval)
        except OverflowError:
            raise ArithmeticError(f"sequence overflowed at step k={k}") from None
        if not math.isfinite(x):
            raise ArithmeticError(f"sequence overflowed at step k={k}")
        if next_idx < len(record) and k == record[next_idx]:
            out.append((k, x))
            next_idx += 1
    return out


def linear_growth_constant(denominator: Callable[[float], float]) -> float:
    """Solve ``y * denominator(y) = 1`` for the linear-growth constant.

    ``denominator`` must be positive and non-decreasing on (0, inf), so that
    ``g(y) = 1/y - denominator(y)`` is strictly decreasing with a unique
    root.  The root is bracketed by geometric expansion from y = 1 and then
    bisected to float resolution.  Raises ValueError if the sampled values
    of ``g`` are inconsistent with monotonicity or no bracket exists.
    """

    def g(y: float) -> float:
        d = denominator(y)
        if not math.isfinite(d) or d <= 0.0:
            raise ValueError(f"denominator({y!r}) = {d!r}; must be finite and > 0")
        return 1.0 / y - d

    lo = hi = 1.0
    g_lo = g_hi = g(1.0)
    # expand downward until g > 0 (g -> +inf as y -> 0+)
    while g_lo <= 0.0:
        new_lo = lo / 2.0
        if new_lo < 1e-300:
            raise ValueError("no sign change found while bracketing (down)")
        g_new = g(new_lo)
        if g_new < g_lo:
            raise ValueError(
                "g(y) = 1/y - denominator(y) is not decreasing: "
                "f not strictly increasing"
            )
        lo, g_lo = new_lo, g_new
    # expand upward until g < 0 (g -> -inf as y -> inf)
    while g_hi >= 0.0:
        new_hi = hi * 2.0
        if new_hi > 1e300:
            raise ValueError("no sign change found while bracketing (up)")
        g_new = g(new_hi)
        if g_new > g_hi:
            raise ValueError(
                "g(y) = 1/y - denominator(y) is not decreasing: "
                "f not strictly increasing"
            )
        hi, g_hi = new_hi, g_new

    for _ in range(_BISECTION_ITERATIONS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fixed_point(spec: RiccatiSpec) -> float:
    """Solve the balance equation ``f(y) = 1/y - C*y**N`` (delta = 1 only).

    The residual of the returned root is at most ``1e-12 * max(1, |f(y)|)``.
    A non-increasing ``f`` detected during bracketing raises ValueError; a
    merely non-strictly-increasing ``f`` (e.g. constant) is accepted with a
    warning, since ``1/y - C*y**N`` is strictly decreasing on its own.
    """
    if spec.delta != 1.0:
        raise ValueError(f"fixed point is defined for delta = 1, got {spec.delta!r}")
    y = linear_growth_constant(lambda t: spec.c * t**spec.n + _f_value(spec, t))

    f_lo, f_mid, f_hi = (_f_value(spec, t) for t in (0.5 * y, y, 2.0 * y))
    if f_lo > f_mid or f_mid > f_hi:
        raise ValueError("f not strictly increasing")
    if f_lo == f_mid or f_mid == f_hi:
        warnings.warn(
            "f is not strictly increasing near the root; the fixed point is "
            "still unique because 1/y - C*y**N is strictly decreasing",
            stacklevel=2,
        )

    residual = abs(f_mid - (1.0 / y - spec.c * y**spec.n))
    if residual > _RESIDUAL_TOL * max(1.0, abs(f_mid)):
        raise ArithmeticError(
            f"bisection residual {residual:g} exceeds tolerance at y = {y!r}"
        )
    return y


def predict_limit(spec: RiccatiSpec) -> RiccatiLimit:
    """Predicted limit of ``X_k / k**beta``.

    ``delta < 1``: closed form ``[(N+1)/((1 + delta*N)*C)]**(1/(N+1))``.
    ``delta = 1``: the constant solves ``y * (C*y**N + f(y**(N-1))) = 1``,
    the balance equation of the exact one-step map (see module docstring).
    """
    if spec.delta < 1.0:
        constant = ((spec.n + 1.0) / ((1.0 + spec.delta * spec.n) * spec.c)) ** (
            1.0 / (spec.n + 1.0)
        )
        return RiccatiLimit(spec.beta, constant, LimitMethod.CLOSED_FORM)
    constant = linear_growth_constant(
        lambda y: spec.c * y**spec.n + _f_value(spec, y ** (spec.n - 1))
    )
    return RiccatiLimit(1.0, constant, LimitMethod.FIXED_POINT)


def empirical_limit(
    spec: RiccatiSpec, k_max: int, tail_fraction: float = 0.25
) -> float:
    """Average of ``X_k / k**beta`` over the tail of a run to ``k_max``.

    The recursion is run once, geometrically sampled, and the mean of the
    normalized values over the last ``tail_fraction`` of the samples (log
    spacing, so a fraction of the logarithmic range) is returned.
    """
    if k_max < 100:
        raise ValueError(f"k_max must be >= 100, got {k_max}")
    if not (0.0 < tail_fraction < 1.0):
        raise ValueError(f"tail_fraction must lie in (0, 1), got {tail_fraction!r}")
    samples = riccati_trajectory(spec, k_max)
    beta = spec.beta
    n_tail = max(1, math.ceil(tail_fraction * len(samples)))
    tail = samples[-n_tail:]
    return math.fsum(x / k**beta for k, x in tail) / len(tail)
