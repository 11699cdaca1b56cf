"""Deterministic precision dynamics of a word-of-mouth filter chain.

The model: ``m`` Kalman-filter sensors estimate one scalar state.  Sensor 1
sees raw measurements (noise variance ``lambda_e``); each sensor ``j <= m-1``
re-broadcasts its posterior mean corrupted by transmission noise of variance
``lambda_w[j-1]``; sensor ``m`` publishes the posterior that every sensor
adopts as its prior at the next step.  Because a receiver must first undo
the sender's shrinkage toward the shared prior, the transmission noise is
amplified by the inverse squared gain, and the public precision ``rho``
obeys a Riccati-like recursion

    rho_k = rho_{k-1} + 1 / (lambda_e + sum_j gamma_k[j])

where each ``gamma_k[j] = lambda_w[j] * (1 + rho_{k-1} * S_j)**2`` is the
equivalent-noise contribution of link ``j`` and ``S_j`` is the running
denominator ``lambda_e + gamma_k[0] + ... + gamma_k[j-1]``.  The denominator
is a polynomial of degree ``2**m - 2`` in the prior precision, so the public
precision grows only like ``k**(1/(2**m - 1))``: learning slows down
exponentially with the chain length.

Four stepping regimes are provided:

* ``UNSCALED``      -- the plain recursion above.
* ``SCALED``        -- sensors 1..m-1 multiply the shared prior precision by
  ``k**-delta`` before using it (deliberate prior down-weighting).  For
  ``delta < 1`` the growth exponent improves to
  ``(1 + delta*(2**m - 2)) / (2**m - 1)``; ``delta = 1`` restores linear
  growth; ``delta > 1`` saturates at ``rho_k / k -> 1/(lambda_e + sum lambda_w)``.
* ``ZEROED_PRIOR``  -- sensors 1..m-1 ignore the prior entirely, collapsing
  the recursion to the exact affine form
  ``rho_k = rho0 + k/(lambda_e + sum lambda_w)``.
* ``SCALED_LAST``   -- the last sensor *also* scales its prior; the public
  precision then stays bounded and learning never completes.

``predict_rate`` returns the closed-form growth exponent and leading
constant for each regime; ``leading_coefficient`` exposes the top
coefficient of the denominator polynomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

from .asymptotics import linear_growth_constant

__all__ = [
    "Regime",
    "CascadeConfig",
    "PrecisionState",
    "RateSource",
    "RatePrediction",
    "PrecisionOverflowError",
    "initial_state",
    "step_precision",
    "step_precision_scaled",
    "step_precision_zeroed",
    "step_precision_scaled_last",
    "step",
    "run_trajectory",
    "gamma_chain",
    "increment_denominator",
    "leading_coefficient",
    "predict_rate",
    "geometric_steps",
]

MAX_AGENTS = 12


class Regime(Enum):
    """How the transmitting sensors treat the shared prior precision."""

    UNSCALED = "unscaled"
    SCALED = "scaled"
    ZEROED_PRIOR = "zeroed"
    SCALED_LAST = "scaled-last"


class PrecisionOverflowError(ArithmeticError):
    """A gamma term left the representable float range during stepping."""

    def __init__(self, k: int, agent: int):
        self.k = k
        self.agent = agent
        super().__init__(
            f"equivalent-noise term for link {agent} is non-finite at step k={k}"
        )


@dataclass(frozen=True)
class CascadeConfig:
    """Full parameterization of one chain.

    ``m`` sensors (1 <= m <= 12), observation noise variance ``lambda_e``,
    per-link transmission noise variances ``lambda_w`` (length ``m - 1``),
    initial public precision ``rho0``, and prior-scaling exponent ``delta``
    (used only by the scaled regimes).
    """

    m: int
    lambda_e: float
    lambda_w: tuple[float, ...] = ()
    rho0: float = 1.0
    delta: float = 0.0
    regime: Regime = Regime.UNSCALED

    def __post_init__(self) -> None:
        object.__setattr__(self, "lambda_w", tuple(float(x) for x in self.lambda_w))
        if not (1 <= self.m <= MAX_AGENTS):
            raise ValueError(f"m must be in [1, {MAX_AGENTS}], got {self.m}")
        if not math.isfinite(self.lambda_e) or self.lambda_e <= 0.0:
            raise ValueError(f"lambda_e must be finite and > 0, got {self.lambda_e!r}")
        if len(self.lambda_w) != self.m - 1:
            raise ValueError(
                f"lambda_w must have m-1 = {self.m - 1} entries, got {len(self.lambda_w)}"
            )
        for j, lw in enumerate(self.lambda_w, start=1):
            if not math.isfinite(lw) or lw < 0.0:
                raise ValueError(f"lambda_w[{j - 1}] must be finite and >= 0, got {lw!r}")
        if not math.isfinite(self.rho0) or self.rho0 <= 0.0:
            raise ValueError(f"rho0 must be finite and > 0, got {self.rho0!r}")
        if not math.isfinite(self.delta) or self.delta < 0.0:
            raise ValueError(f"delta must be finite and >= 0, got {self.delta!r}")
        if self.regime is Regime.UNSCALED and self.delta != 0.0:
            raise ValueError("delta must be 0 in the unscaled regime")

    @property
    def noise_sum(self) -> float:
        """Total variance seen when the prior is ignored: lambda_e + sum(lambda_w)."""
        return self.lambda_e + math.fsum(self.lambda_w)


@dataclass(frozen=True)
class PrecisionState:
    """Deterministic chain state after step ``k``.

    ``rho`` is the public precision; ``gamma[j]`` the equivalent-noise
    contribution of link ``j+1`` computed during this step; ``alpha[j]`` the
    gain of sensor ``j+1``; ``denom`` the last sensor's effective noise
    variance ``lambda_e + sum(gamma)`` (so the increment was ``1/denom``).
    At ``k = 0`` only ``rho`` is meaningful (``gamma``/``alpha`` empty,
    ``denom`` None).
    """

    k: int
    rho: float
    gamma: tuple[float, ...] = ()
    alpha: tuple[float, ...] = ()
    denom: Optional[float] = None

    def __post_init__(self) -> None:
        if self.k < 0:
            raise ValueError(f"k must be >= 0, got {self.k}")
        if not math.isfinite(self.rho) or self.rho <= 0.0:
            raise ValueError(f"rho must be finite and > 0, got {self.rho!r}")
        if self.denom is not None and not (self.denom > 0.0):
            raise ValueError(f"denom must be > 0, got {self.denom!r}")
        for a in self.alpha:
            if not (0.0 < a <= 1.0):
                raise ValueError(f"gains must lie in (0, 1], got {a!r}")


class RateSource(Enum):
    """Which asymptotic regime produced a rate prediction."""

    UNSCALED_POWER_LAW = "unscaled-power-law"
    SCALED_SUBLINEAR = "scaled-sublinear"
    SCALED_LINEAR_FIXED_POINT = "scaled-linear-fixed-point"
    SCALED_SATURATED = "scaled-saturated"
    ZEROED_PRIOR = "zeroed-prior"


@dataclass(frozen=True)
class RatePrediction:
    """Predicted tail behavior ``rho_k ~ constant * k**beta``."""

    beta: float
    constant: Optional[float]
    source: RateSource


def initial_state(config: CascadeConfig) -> PrecisionState:
    """State at k = 0: public precision ``rho0``, no step quantities yet."""
    return PrecisionState(k=0, rho=config.rho0)


def _time_scale(delta: float, k: int) -> float:
    """The prior down-weighting factor k**-delta (exact for delta in {0, 1})."""
    if delta == 0.0:
        return 1.0
    if delta == 1.0:
        return 1.0 / k
    return math.exp(-delta * math.log(k))


def gamma_chain(
    config: CascadeConfig, used_rho: float, k: Optional[int] = None
) -> tuple[list[float], float]:
    """Evaluate the equivalent-noise chain for one step.

    ``used_rho`` is the prior precision the transmitting sensors actually
    plug in (already scaled or zeroed as the regime dictates).  Returns
    ``(gammas, denom)`` with ``denom = lambda_e + sum(gammas)``.  Raises
    :class:`PrecisionOverflowError` if a term overflows; ``k`` is only used
    to label that error.
    """
    gammas: list[float] = []
    s = config.lambda_e
    for j, lw in enumerate(config.lambda_w, start=1):
        t = 1.0 + used_rho * s
        g = lw * (t * t)
        if not math.isfinite(g):
            raise PrecisionOverflowError(k=-1 if k is None else k, agent=j)
        gammas.append(g)
        s += g
    return gammas, s


def increment_denominator(config: CascadeConfig, used_rho: float) -> float:
    """The last sensor's effective noise variance for a given used prior precision."""
    return gamma_chain(config, used_rho)[1]


def _build_state(
    config: CascadeConfig, k: int, rho_prev: float, rho_new: float, used_rho: float
) -> PrecisionState:
    """Assemble the full state (gains included) for step ``k``.

    Gain of sensor ``j``: with prior precision ``p_j`` and effective
    observation variance ``S_j``, ``alpha_j = (1/S_j) / (p_j + 1/S_j)
    = 1 / (1 + p_j * S_j)``.  Sensors 1..m-1 use the (scaled/zeroed) prior;
    the last sensor's prior depends on the regime.
    """
    gammas: list[float] = []
    prefixes: list[float] = []
    s = config.lambda_e
    for j, lw in enumerate(config.lambda_w, start=1):
        prefixes.append(s)
        t = 1.0 + used_rho * s
        g = lw * (t * t)
        if not math.isfinite(g):
            raise PrecisionOverflowError(k=k, agent=j)
        gammas.append(g)
        s += g
    prefixes.append(s)  # S_m = denom

    last_prior = used_rho if config.regime is Regime.SCALED_LAST else rho_prev
    priors = [used_rho] * (config.m - 1) + [last_prior]
    alphas = tuple(1.0 / (1.0 + p * sj) for p, sj in zip(priors, prefixes))
    return PrecisionState(
        k=k, rho=rho_new, gamma=tuple(gammas), alpha=alphas, denom=s
    )


def _used_rho(config: CascadeConfig, k: int, rho_prev: float) -> float:
    regime = config.regime
    if regime is Regime.UNSCALED:
        return rho_prev
    if regime is Regime.ZEROED_PRIOR:
        return 0.0
    return _time_scale(config.delta, k) * rho_prev


def _step_generic(config: CascadeConfig, state: PrecisionState) -> PrecisionState:
    k = state.k + 1
    used = _used_rho(config, k, state.rho)
    try:
        denom = increment_denominator(config, used)
        base = used if config.regime is Regime.SCALED_LAST else state.rho
        rho_new = base + 1.0 / denom
        return _build_state(config, k, state.rho, rho_new, used)
    except PrecisionOverflowError as exc:
        raise PrecisionOverflowError(k=k, agent=exc.agent) from None


def _require_regime(config: CascadeConfig, regime: Regime) -> None:
    if config.regime is not regime:
        raise ValueError(
            f"config regime is {config.regime.value!r}; expected {regime.value!r}"
        )


def step_precision(config: CascadeConfig, state: PrecisionState) -> PrecisionState:
    """One step of the plain (unscaled) public-precision recursion."""
    _require_regime(config, Regime.UNSCALED)
    return _step_generic(config, state)


def step_precision_scaled(config: CascadeConfig, state: PrecisionState) -> PrecisionState:
    """One step with sensors 1..m-1 using the prior precision scaled by k**-delta."""
    _require_regime(config, Regime.SCALED)
    return _step_generic(config, state)


def step_precision_zeroed(config: CascadeConfig, state: PrecisionState) -> PrecisionState:
    """One step with sensors 1..m-1 ignoring the prior: gamma[j] = lambda_w[j]."""
    _require_regime(config, Regime.ZEROED_PRIOR)
    return _step_generic(config, state)


def step_precision_scaled_last(
    config: CascadeConfig, state: PrecisionState
) -> PrecisionState:
    """One step with *every* sensor, including the last, using the scaled prior.

    The public precision then satisfies
    ``rho_k = k**-delta * rho_{k-1} + 1/denom`` and stays bounded.
    """
    _require_regime(config, Regime.SCALED_LAST)
    return _step_generic(config, state)


def step(config: CascadeConfig, state: PrecisionState) -> PrecisionState:
    """Regime-dispatching step."""
    return _step_generic(config, state)


def geometric_steps(k_max: int, points_per_decade: int = 32) -> list[int]:
    """Approximately geometrically spaced integer steps in [1, k_max].

    Always includes 1 and k_max; deterministic for a given input.
    """
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    n = int(points_per_decade * math.log10(k_max)) + 1 if k_max > 1 else 1
    ks = {int(round(10.0 ** (i / points_per_decade))) for i in range(n)}
    ks |= {1, k_max}
    return sorted(k for k in ks if 1 <= k <= k_max)


def run_trajectory(
    config: CascadeConfig,
    k_max: int,
    schedule: str = "all",
    points_per_decade: int = 32,
) -> list[PrecisionState]:
    """Iterate the regime-appropriate step from ``rho0`` up to ``k_max``.

    ``schedule="all"`` records every step (list of length ``k_max``);
    ``schedule="geometric"`` records only approximately geometrically
    spaced steps (plus k=1 and k=k_max).  The k=0 state is not included.
    Deterministic: the same config always yields bit-identical output.
    """
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    if schedule not in ("all", "geometric"):
        raise ValueError(f"schedule must be 'all' or 'geometric', got {schedule!r}")

    record_all = schedule == "all"
    if record_all:
        record = list(range(1, k_max + 1))
    else:
        record = geometric_steps(k_max, points_per_decade)
    next_idx = 0

    regime = config.regime
    delta = config.delta
    lam_e = config.lambda_e
    lam_w = config.lambda_w
    zeroed = regime is Regime.ZEROED_PRIOR
    scaled_last = regime is Regime.SCALED_LAST
    scaling = regime in (Regime.SCALED, Regime.SCALED_LAST)

    out: list[PrecisionState] = []
    rho = config.rho0
    for k in range(1, k_max + 1):
        if zeroed:
            used = 0.0
        elif scaling:
            used = _time_scale(delta, k) * rho
        else:
            used = rho
        s = lam_e
        for lw in lam_w:
            t = 1.0 + used * s
            s += lw * (t * t)
        if not math.isfinite(s):
            # recompute slowly to identify the offending link
            gamma_chain(config, used, k=k)
            raise PrecisionOverflowError(k=k, agent=len(lam_w))
        rho_new = (used if scaled_last else rho) + 1.0 / s
        if next_idx < len(record) and k == record[next_idx]:
            out.append(_build_state(config, k, rho, rho_new, used))
            next_idx += 1
        rho = rho_new
    return out


def _log_leading_coefficient(config: CascadeConfig) -> float:
    if config.m < 2:
        raise ValueError("leading coefficient requires m >= 2")
    for j, lw in enumerate(config.lambda_w, start=1):
        if lw == 0.0:
            raise ValueError(
                f"lambda_w[{j - 1}] = 0: denominator degree degenerates, "
                "no leading coefficient"
            )
    m = config.m
    acc = 2.0 ** (m - 1) * math.log(config.lambda_e)
    for i, lw in enumerate(config.lambda_w, start=1):
        acc += 2.0 ** (m - 1 - i) * math.log(lw)
    return acc


def leading_coefficient(config: CascadeConfig) -> float:
    """Top coefficient of the increment denominator as a polynomial in rho.

    The denominator has degree ``2**m - 2`` in the prior precision with
    leading coefficient ``lambda_e**(2**(m-1)) * prod_i lambda_w[i]**(2**(m-1-i))``
    (links indexed from 1).  Computed in log space to postpone overflow.
    """
    return math.exp(_log_leading_coefficient(config))


def predict_rate(config: CascadeConfig) -> RatePrediction:
    """Closed-form tail prediction ``rho_k ~ constant * k**beta`` per regime.

    * unscaled: ``beta = 1/(2**m - 1)``,
      ``constant = [(2**m - 1)/a]**(1/(2**m - 1))`` with ``a`` the leading
      coefficient;
    * scaled, delta < 1: ``beta = (1 + delta*(2**m - 2))/(2**m - 1)``,
      ``constant = [(2**m - 1)/((1 + delta*(2**m - 2)) * a)]**(1/(2**m - 1))``;
    * scaled, delta = 1: ``beta = 1`` and the constant is the fixed point of
      the exact one-step map, i.e. the root of ``y * denom(y) = 1`` where
      ``denom`` is the full gamma-chain denominator at used precision ``y``;
    * scaled, delta > 1, and zeroed prior: ``beta = 1``,
      ``constant = 1/(lambda_e + sum lambda_w)``;
    * scaled-last: no growth (bounded sequence) -- raises ValueError.
    """
    regime = config.regime
    if regime is Regime.SCALED_LAST:
        raise ValueError("no growth: bounded sequence")
    if regime is Regime.ZEROED_PRIOR:
        return RatePrediction(1.0, 1.0 / config.noise_sum, RateSource.ZEROED_PRIOR)
    if config.m < 2:
        raise ValueError("rate prediction requires m >= 2 (m = 1 is the classical filter)")

    n = 2**config.m - 2  # denominator degree
    if regime is Regime.UNSCALED:
        log_a = _log_leading_coefficient(config)
        beta = 1.0 / (n + 1)
        constant = math.exp((math.log(n + 1) - log_a) / (n + 1))
        return RatePrediction(beta, constant, RateSource.UNSCALED_POWER_LAW)

    # scaled regime
    delta = config.delta
    if delta > 1.0:
        return RatePrediction(1.0, 1.0 / config.noise_sum, RateSource.SCALED_SATURATED)
    if delta == 1.0:
        constant = linear_growth_constant(
            lambda y: increment_denominator(config, y)
        )
        return RatePrediction(1.0, constant, RateSource.SCALED_LINEAR_FIXED_POINT)
    log_a = _log_leading_coefficient(config)
    beta = (1.0 + delta * n) / (n + 1)
    constant = math.exp(
        (math.log(n + 1) - math.log(1.0 + delta * n) - log_a) / (n + 1)
    )
    return RatePrediction(beta, constant, RateSource.SCALED_SUBLINEAR)
