"""Stochastic simulation of the full filter chain.

The deterministic recursion in :mod:`womkalman.cascade` claims that the
public belief's precision is the exact Bayes posterior precision of the
state given everything the last sensor has seen.  This module checks that
claim by simulating the actual information pathway:

* sensor 1 measures ``s_k = theta + e_k`` and updates its mean;
* each link adds transmission noise to the sender's posterior mean;
* the receiver inverts the sender's (publicly known) gain to recover the
  *equivalent observation* ``z``, which looks like ``theta`` plus noise,
  and runs a standard precision-form update on it;
* the last sensor's mean becomes the public mean for the next step.

Since all gains are measurement-independent, one deterministic
:class:`~womkalman.cascade.PrecisionState` sequence serves every simulated
path.  If the precision recursion is indeed the posterior precision, then
across paths ``(public_mean - theta)`` is ``N(0, 1/rho_k)``, so the
empirical mean squared error over ``n`` paths, divided by ``1/rho_k``, is a
``chi^2_n / n`` variable: :func:`run_paths` reports that ratio together
with a central 99.9% acceptance interval.  This consistency guarantee holds
for the unscaled and zeroed-prior regimes; in the scaled regimes the
sensors deliberately use a wrong prior precision, so the reports there are
diagnostics without a calibrated interval.

Reproducibility: each path's noise stream is derived from
``SeedSequence(seed).spawn(path_index)``, so results depend only on
``(seed, config)`` and not on execution order or batching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .cascade import CascadeConfig, PrecisionState, Regime, run_trajectory

__all__ = [
    "McConfig",
    "PathState",
    "ConsistencyReport",
    "initial_path_state",
    "step_path",
    "run_paths",
    "sample_mean_bias",
]

_CHI2_COVERAGE = 0.999
_DEFAULT_BLOCK_FLOATS = 6_000_000  # ~48 MB of per-block noise


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo experiment description.

    ``checkpoint_ks`` are the steps at which cross-path statistics are
    recorded; ``0`` is allowed and reports the prior itself.  ``seed`` is a
    64-bit unsigned integer; there is no default on purpose.
    """

    cascade: CascadeConfig
    theta_bar: float
    n_paths: int
    k_max: int
    seed: int
    checkpoint_ks: tuple[int, ...] = (1, 10, 100, 1000, 10_000)

    def __post_init__(self) -> None:
        object.__setattr__(self, "checkpoint_ks", tuple(int(k) for k in self.checkpoint_ks))
        if not math.isfinite(self.theta_bar):
            raise ValueError(f"theta_bar must be finite, got {self.theta_bar!r}")
        if self.n_paths < 1:
            raise ValueError(f"n_paths must be >= 1, got {self.n_paths}")
        if self.k_max < 1:
            raise ValueError(f"k_max must be >= 1, got {self.k_max}")
        if not isinstance(self.seed, int) or not (0 <= self.seed < 2**64):
            raise ValueError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")
        ks = self.checkpoint_ks
        if not ks:
            raise ValueError("checkpoint_ks must not be empty")
        if list(ks) != sorted(set(ks)):
            raise ValueError(f"checkpoint_ks must be sorted and unique, got {ks}")
        if ks[0] < 0 or ks[-1] > self.k_max:
            raise ValueError(
                f"checkpoint_ks must lie within [0, k_max={self.k_max}], got {ks}"
            )


@dataclass(frozen=True)
class PathState:
    """One realization: the true state, the public mean, and per-sensor data.

    ``last_z`` holds the equivalent observations recovered on each link at
    the most recent step (empty before the first step).
    """

    theta: float
    public_mean: float
    agent_means: tuple[float, ...]
    last_z: tuple[float, ...] = ()


@dataclass(frozen=True)
class ConsistencyReport:
    """Cross-path statistics at one checkpoint.

    ``ratio = empirical_mse / predicted_var`` should look like a
    ``chi^2_n / n`` draw when the precision recursion is the true posterior
    precision; ``chi2_bounds`` is the central 99.9% interval for that ratio.
    ``mean_error`` is the cross-path mean of ``public_mean - theta``.
    """

    k: int
    n_paths: int
    empirical_mse: float
    predicted_var: float
    ratio: float
    chi2_bounds: tuple[float, float]
    mean_error: float

    @property
    def within_bounds(self) -> bool:
        lo, hi = self.chi2_bounds
        return lo <= self.ratio <= hi

    @property
    def bias_bound(self) -> float:
        """Four standard errors of the cross-path mean under the model."""
        return 4.0 * math.sqrt(self.predicted_var / self.n_paths)


def initial_path_state(config: McConfig, theta: float) -> PathState:
    """State before any measurement: every mean equals the prior mean."""
    m = config.cascade.m
    return PathState(
        theta=theta,
        public_mean=config.theta_bar,
        agent_means=(config.theta_bar,) * m,
    )


def step_path(
    config: McConfig,
    state: PathState,
    precision_prev: PrecisionState,
    precision_new: PrecisionState,
    rng_draws: Sequence[float],
) -> PathState:
    """Advance one path by one step, given the deterministic gain schedule.

    ``rng_draws`` supplies the m independent standard normals consumed by
    the step: the measurement noise followed by the m-1 transmission noises.
    ``precision_prev``/``precision_new`` must be the deterministic states at
    k-1 and k for the same cascade config (gains do not depend on the data,
    so they are shared by all paths).
    """
    cas = config.cascade
    m = cas.m
    if precision_new.k != precision_prev.k + 1:
        raise ValueError(
            f"precision states must be consecutive, got k={precision_prev.k} and "
            f"k={precision_new.k}"
        )
    if len(rng_draws) != m:
        raise ValueError(f"need exactly m = {m} standard normal draws, got {len(rng_draws)}")
    if len(precision_new.alpha) != m:
        raise ValueError("precision_new does not carry one gain per sensor")

    alphas = precision_new.alpha
    public = state.public_mean
    e = math.sqrt(cas.lambda_e) * rng_draws[0]
    s_obs = state.theta + e

    means: list[float] = []
    zs: list[float] = []
    a1 = alphas[0]
    means.append((1.0 - a1) * public + a1 * s_obs)
    for j in range(1, m):
        w = math.sqrt(cas.lambda_w[j - 1]) * rng_draws[j]
        transmitted = means[j - 1] + w
        a_prev = alphas[j - 1]
        z = (transmitted - (1.0 - a_prev) * public) / a_prev
        zs.append(z)
        a_j = alphas[j]
        means.append((1.0 - a_j) * public + a_j * z)

    return PathState(
        theta=state.theta,
        public_mean=means[-1],
        agent_means=tuple(means),
        last_z=tuple(zs),
    )


def sample_mean_bias(report: ConsistencyReport) -> float:
    """Cross-path mean of ``public_mean - theta`` at the report's checkpoint.

    Under the model this is a centered Gaussian with standard error
    ``sqrt(predicted_var / n_paths)``; compare against ``report.bias_bound``.
    Requires at least two paths.
    """
    if report.n_paths < 2:
        raise ValueError("bias estimate needs n_paths >= 2")
    return report.mean_error


def _chi2_bounds(n: int) -> tuple[float, float]:
    tail = 0.5 * (1.0 - _CHI2_COVERAGE)
    lo, hi = stats.chi2.ppf([tail, 1.0 - tail], n) / n
    return float(lo), float(hi)


def run_paths(config: McConfig, _block_paths: Optional[int] = None) -> list[ConsistencyReport]:
    """Simulate ``n_paths`` independent chains and report checkpoint statistics.

    The deterministic precision trajectory is computed once; paths are then
    simulated in memory-bounded blocks, vectorized across paths.  Identical
    ``(seed, config)`` give bit-identical reports.
    """
    cas = config.cascade
    states = run_trajectory(cas, config.k_max, schedule="all")
    alphas = np.asarray([st.alpha for st in states])  # (k_max, m)
    rhos = np.asarray([st.rho for st in states])

    m = cas.m
    n_paths = config.n_paths
    k_max = config.k_max
    sd_e = math.sqrt(cas.lambda_e)
    sd_w = np.asarray([math.sqrt(x) for x in cas.lambda_w])
    sd_theta = math.sqrt(1.0 / cas.rho0)

    checkpoints = config.checkpoint_ks
    sum_sq = dict.fromkeys(checkpoints, 0.0)
    sum_err = dict.fromkeys(checkpoints, 0.0)
    want = set(checkpoints)

    if _block_paths is None:
        _block_paths = max(1, min(n_paths, _DEFAULT_BLOCK_FLOATS // (k_max * m + 1)))
    children = np.random.SeedSequence(config.seed).spawn(n_paths)

    for start in range(0, n_paths, _block_paths):
        size = min(_block_paths, n_paths - start)
        theta = np.empty(size)
        noise = np.empty((size, k_max, m))
        for i in range(size):
            rng = np.random.Generator(np.random.PCG64(children[start + i]))
            theta[i] = config.theta_bar + sd_theta * rng.standard_normal()
            noise[i] = rng.standard_normal((k_max, m))

        public = np.full(size, config.theta_bar)
        if 0 in want:
            err = public - theta
            sum_sq[0] += float(err @ err)
            sum_err[0] += float(err.sum())
        for k in range(1, k_max + 1):
            a = alphas[k - 1]
            s_obs = theta + sd_e * noise[:, k - 1, 0]
            mu = (1.0 - a[0]) * public + a[0] * s_obs
            for j in range(1, m):
                transmitted = mu + sd_w[j - 1] * noise[:, k - 1, j]
                z = (transmitted - (1.0 - a[j - 1]) * public) / a[j - 1]
                mu = (1.0 - a[j]) * public + a[j] * z
            public = mu
            if k in want:
                err = public - theta
                sum_sq[k] += float(err @ err)
                sum_err[k] += float(err.sum())

    lo, hi = _chi2_bounds(n_paths)
    reports = []
    for k in checkpoints:
        predicted_var = 1.0 / cas.rho0 if k == 0 else 1.0 / rhos[k - 1]
        mse = sum_sq[k] / n_paths
        reports.append(
            ConsistencyReport(
                k=k,
                n_paths=n_paths,
                empirical_mse=mse,
                predicted_var=float(predicted_var),
                ratio=mse / float(predicted_var),
                chi2_bounds=(lo, hi),
                mean_error=sum_err[k] / n_paths,
            )
        )
    return reports
