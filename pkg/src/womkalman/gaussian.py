"""Scalar Gaussian beliefs in precision form.

A belief about an unknown scalar is a Gaussian summarized by its mean and
its precision (inverse variance).  Conditioning on a noisy measurement
``s = theta + e`` with known noise precision is then a one-line update:
precisions add, and the posterior mean is a convex combination of the prior
mean and the observation, weighted by the gain.

Precision form is used throughout this package because the chained-filter
recursions track precisions directly; variance conversion helpers are
provided at the boundary.  ``precision = 0`` encodes an uninformative
(flat) prior, in which case the posterior equals the observation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["Belief", "bayes_update", "kalman_gain"]


@dataclass(frozen=True)
class Belief:
    """Gaussian belief ``N(mean, 1/precision)`` over a scalar state.

    ``precision`` must be finite and >= 0; zero means a flat prior.
    """

    mean: float
    precision: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.mean):
            raise ValueError(f"belief mean must be finite, got {self.mean!r}")
        if not math.isfinite(self.precision) or self.precision < 0.0:
            raise ValueError(
                f"belief precision must be finite and >= 0, got {self.precision!r}"
            )

    @property
    def variance(self) -> float:
        """Variance ``1/precision`` (``inf`` for a flat prior)."""
        return math.inf if self.precision == 0.0 else 1.0 / self.precision

    @classmethod
    def from_variance(cls, mean: float, variance: float) -> "Belief":
        """Build a belief from (mean, variance); ``variance=inf`` maps to precision 0."""
        if variance == math.inf:
            return cls(mean, 0.0)
        if not (variance > 0.0) or not math.isfinite(variance):
            raise ValueError(f"variance must be positive and finite, got {variance!r}")
        return cls(mean, 1.0 / variance)


def kalman_gain(prior_precision: float, obs_precision: float) -> float:
    """Weight placed on the observation when updating a belief.

    Equals ``obs_precision / (prior_precision + obs_precision)``, always in
    (0, 1], and exactly 1 iff the prior is flat.
    """
    if not math.isfinite(prior_precision) or prior_precision < 0.0:
        raise ValueError(
            f"prior precision must be finite and >= 0, got {prior_precision!r}"
        )
    if not math.isfinite(obs_precision) or obs_precision <= 0.0:
        raise ValueError(
            f"observation precision must be finite and > 0, got {obs_precision!r}"
        )
    return obs_precision / (prior_precision + obs_precision)


def bayes_update(prior: Belief, observation: float, obs_precision: float) -> Belief:
    """Condition a Gaussian belief on one noisy observation of the state.

    The posterior precision is ``prior.precision + obs_precision`` exactly;
    the posterior mean is ``(1 - gain) * prior.mean + gain * observation``
    with ``gain = kalman_gain(prior.precision, obs_precision)``.
    """
    if not math.isfinite(observation):
        raise ValueError(f"observation must be finite, got {observation!r}")
    gain = kalman_gain(prior.precision, obs_precision)
    mean = (1.0 - gain) * prior.mean + gain * observation
    return Belief(mean, prior.precision + obs_precision)
