"""Power-law tail estimation for growing sequences.

Given samples ``(k, value)`` with ``value ~ C * k**beta`` for large k, the
exponent and constant are estimated by ordinary least squares of
``log(value)`` on ``log(k)``.  The recursions this package produces have
provably pure power-law tails, so log-log OLS is adequate; the additive
transient (e.g. the initial precision) biases the fit at small k, which is
mitigated by fitting only a tail window (default: the top two decades).

``ratio_limit`` is the complementary direct estimator of
``lim value / k**beta`` for a *known* beta: the mean of the normalized
values over the last fraction of the (log-spaced) samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = ["RateFit", "fit_power_law", "ratio_limit", "default_window"]


@dataclass(frozen=True)
class RateFit:
    """Fitted tail ``value ~ constant_hat * k**beta_hat`` over ``window``."""

    beta_hat: float
    constant_hat: float
    r_squared: float
    window: tuple[int, int]


def _as_arrays(samples: Sequence[tuple[int, float]]) -> tuple[np.ndarray, np.ndarray]:
    ks = np.asarray([k for k, _ in samples], dtype=np.int64)
    vs = np.asarray([v for _, v in samples], dtype=np.float64)
    if np.any(ks <= 0):
        raise ValueError("all sample steps k must be >= 1")
    if np.any(vs <= 0.0) or not np.all(np.isfinite(vs)):
        raise ValueError("all sample values must be finite and > 0")
    order = np.argsort(ks, kind="stable")
    return ks[order], vs[order]


def default_window(samples: Sequence[tuple[int, float]]) -> tuple[int, int]:
    """Top two decades of the sampled range: [max(k)/100, max(k)]."""
    ks, _ = _as_arrays(samples)
    k_hi = int(ks[-1])
    k_lo = max(int(ks[0]), math.ceil(k_hi / 100))
    return (k_lo, k_hi)


def fit_power_law(
    samples: Sequence[tuple[int, float]],
    window: Optional[tuple[int, int]] = None,
) -> RateFit:
    """Least-squares fit of log(value) on log(k) over ``window`` (inclusive).

    Requires at least 3 samples inside the window and positive values.
    ``r_squared`` is 1.0 for an exactly constant sequence (slope 0 fits it
    perfectly).
    """
    ks, vs = _as_arrays(samples)
    if window is None:
        window = default_window(samples)
    k_lo, k_hi = window
    mask = (ks >= k_lo) & (ks <= k_hi)
    if int(mask.sum()) < 3:
        raise ValueError(
            f"need >= 3 samples inside window [{k_lo}, {k_hi}], got {int(mask.sum())}"
        )
    x = np.log(ks[mask].astype(np.float64))
    y = np.log(vs[mask])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.dot(resid, resid))
    ss_tot = float(np.dot(y - y.mean(), y - y.mean()))
    r_squared = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return RateFit(
        beta_hat=float(slope),
        constant_hat=float(math.exp(intercept)),
        r_squared=r_squared,
        window=(int(k_lo), int(k_hi)),
    )


def ratio_limit(
    samples: Sequence[tuple[int, float]],
    beta: float,
    tail_fraction: float = 0.25,
) -> float:
    """Mean of ``value / k**beta`` over the last ``tail_fraction`` of samples.

    Samples are sorted by k; with geometric sampling the selected tail covers
    the last ``tail_fraction`` of the logarithmic range.
    """
    if not (0.0 < tail_fraction <= 1.0):
        raise ValueError(f"tail_fraction must lie in (0, 1], got {tail_fraction!r}")
    ks, vs = _as_arrays(samples)
    if ks.size < 1:
        raise ValueError("need at least one sample")
    n_tail = max(1, math.ceil(tail_fraction * ks.size))
    ratios = vs[-n_tail:] / ks[-n_tail:].astype(np.float64) ** beta
    return float(ratios.mean())
