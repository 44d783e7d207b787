import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .params import SystemParams
from .scenario import PowerSample, TrialStreams, build, conditional_powers, DEFAULT_WINDOW_FACTOR

__all__ = [
    'CurvePoint',
    'EnsembleStats',
    'simulate_trial',
    'simulate',
    'mean_ci',
    'wilson_interval',
    'empirical_tail',
    'moments_pi',
    'default_thresholds',
    'run_ensemble',
    'sweep_lambda_irs',
]

logger = logging.getLogger(__name__)

CONFIDENCE = 0.95
MOMENT_ORDERS = (1, 2, 3)


@dataclass(frozen=True)
class CurvePoint:
    """Empirical exceedance probability at one threshold with its Wilson interval."""
    threshold: float
    probability: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class EnsembleStats:
    """
    Monte Carlo summary of one parameter point.

    ``samples`` keeps the per-trial ``(p_s, p_i, cap)`` rows in trial order so
    that callers can evaluate further thresholds without re-running.
    """
    n_trials: int
    mean_ps: float
    ci_ps: float
    mean_pi: float
    ci_pi: float
    mean_cap: float
    ci_cap: float
    survival_s: List[CurvePoint] = field(default_factory=list)
    survival_i: List[CurvePoint] = field(default_factory=list)
    outage: List[CurvePoint] = field(default_factory=list)
    moments_pi: Tuple[float, ...] = ()
    samples: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)), repr=False)


def _z_value(confidence: float = CONFIDENCE) -> float:
    return float(stats.norm.ppf(0.5 + confidence / 2.0))


def mean_ci(values: Sequence[float], confidence: float = CONFIDENCE) -> Tuple[float, float]:
    """
    Sample mean and normal-approximation CI halfwidth; the halfwidth is ``inf`` for one sample.

    Example:
        >>> mean_ci([2.0])
        (2.0, inf)
    """
    values = np.asarray(values, dtype=float)
    mean = float(math.fsum(values) / len(values))
    if len(values) < 2:
        return mean, math.inf
    return mean, _z_value(confidence) * float(np.std(values, ddof=1)) / math.sqrt(len(values))


def wilson_interval(successes: int, n: int, confidence: float = CONFIDENCE) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n == 0:
        return 0.0, 1.0
    z = _z_value(confidence)
    phat = successes / n
    denominator = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denominator
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denominator
    low = 0.0 if successes == 0 else max(0.0, center - half)
    high = 1.0 if successes == n else min(1.0, center + half)
    return low, high


def empirical_tail(samples: Sequence[float], thresholds: Sequence[float],
                   confidence: float = CONFIDENCE) -> List[CurvePoint]:
    """
    Empirical survival function ``Pr{X > t}`` with Wilson intervals.

    Args:
        samples (list): Observations.
        thresholds (list): Ascending thresholds.
        confidence (float, optional): CI level. Defaults to 0.95.

    Returns:
        list: One ``CurvePoint`` per threshold, non-increasing in probability.

    Raises:
        ValueError: If the thresholds are not sorted.
    """
    thresholds = np.asarray(thresholds, dtype=float)
    if np.any(np.diff(thresholds) < 0):
        raise ValueError("Thresholds must be sorted in ascending order.")
    ordered = np.sort(np.asarray(samples, dtype=float))
    n = len(ordered)
    above = n - np.searchsorted(ordered, thresholds, side='right')

    curve = []
    for t, count in zip(thresholds, above):
        low, high = wilson_interval(int(count), n, confidence)
        curve.append(CurvePoint(float(t), float(count) / n if n else 0.0, low, high))
    return curve


def moments_pi(samples: Sequence[float], orders: Sequence[int] = MOMENT_ORDERS) -> Tuple[float, ...]:
    """Raw empirical moments ``E{X**k}``."""
    values = np.asarray(samples, dtype=float)
    return tuple(float(np.mean(values ** k)) for k in orders)


def default_thresholds(samples: Sequence[float], count: int = 20) -> List[float]:
    """Geometric grid spanning the positive range of ``samples``."""
    positive = np.asarray(samples, dtype=float)
    positive = positive[positive > 0]
    if len(positive) == 0:
        return [1.0]
    low, high = float(positive.min()), float(positive.max())
    if low == high:
        return [low]
    return [float(t) for t in np.geomspace(low, high, count)]


def simulate_trial(p: SystemParams, master_seed: int, trial: int,
                   window_factor: float = DEFAULT_WINDOW_FACTOR) -> PowerSample:
    """Build and evaluate the realization of one trial index."""
    scenario = build(p, TrialStreams.from_seed(master_seed, trial), window_factor)
    return conditional_powers(scenario)


def simulate(p: SystemParams, n: int, master_seed: int, threads: int = 1,
             window_factor: float = DEFAULT_WINDOW_FACTOR) -> np.ndarray:
    """
    Per-trial ``(p_s, p_i, cap)`` rows, in trial order, for any number of threads.

    Raises:
        ValueError: If ``n < 1`` or ``threads < 1``.
    """
    if n < 1:
        raise ValueError("At least one trial is required.")
    if threads < 1:
        raise ValueError("At least one thread is required.")

    def run(trial: int) -> PowerSample:
        return simulate_trial(p, master_seed, trial, window_factor)

    if threads == 1:
        results = [run(trial) for trial in range(n)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            results = list(executor.map(run, range(n)))
    return np.array([[r.p_s, r.p_i, r.cap] for r in results], dtype=float).reshape(-1, 3)


def _summarize(samples: np.ndarray, thresholds_s: Optional[Sequence[float]],
               thresholds_i: Optional[Sequence[float]], alphas: Optional[Sequence[float]]) -> EnsembleStats:
    ps, pi, cap = samples[:, 0], samples[:, 1], samples[:, 2]
    mean_ps, ci_ps = mean_ci(ps)
    mean_pi, ci_pi = mean_ci(pi)
    mean_cap, ci_cap = mean_ci(cap)
    return EnsembleStats(
        n_trials=len(samples),
        mean_ps=mean_ps,
        ci_ps=ci_ps,
        mean_pi=mean_pi,
        ci_pi=ci_pi,
        mean_cap=mean_cap,
        ci_cap=ci_cap,
        survival_s=empirical_tail(ps, thresholds_s if thresholds_s is not None else default_thresholds(ps)),
        survival_i=empirical_tail(pi, thresholds_i if thresholds_i is not None else default_thresholds(pi)),
        outage=empirical_tail(cap, alphas if alphas is not None else default_thresholds(cap)),
        moments_pi=moments_pi(pi),
        samples=samples,
    )


def run_ensemble(p: SystemParams, n: int, master_seed: int, threads: int = 1,
                 thresholds_s: Optional[Sequence[float]] = None,
                 thresholds_i: Optional[Sequence[float]] = None,
                 alphas: Optional[Sequence[float]] = None,
                 window_factor: float = DEFAULT_WINDOW_FACTOR) -> EnsembleStats:
    """
    Run ``n`` seeded trials and summarize them.

    Trial ``i`` draws all of its randomness from streams derived from
    ``(master_seed, i)``, and aggregation happens in trial order, so the result
    is bit-identical for every ``threads`` value.

    Args:
        p (SystemParams): Validated parameters.
        n (int): Number of trials, ``>= 1``.
        master_seed (int): Seed of the ensemble.
        threads (int, optional): Worker threads. Defaults to 1.
        thresholds_s (list, optional): Signal-power thresholds of the survival curve.
        thresholds_i (list, optional): Interference-power thresholds.
        alphas (list, optional): Capacity thresholds of the outage curve, in nats.
        window_factor (float, optional): Simulation window in units of ``r_co``.

    Returns:
        EnsembleStats: Means with 95% CIs, curves and moments.
    """
    logger.debug("Running %d trials (seed=%d, threads=%d, lambda_irs=%g)", n, master_seed, threads, p.lambda_irs)
    samples = simulate(p, n, master_seed, threads, window_factor)
    return _summarize(samples, thresholds_s, thresholds_i, alphas)


def sweep_lambda_irs(p: SystemParams, grid: Sequence[float], n: int, master_seed: int, threads: int = 1,
                     alphas: Optional[Sequence[float]] = None,
                     window_factor: float = DEFAULT_WINDOW_FACTOR) -> List[EnsembleStats]:
    """
    One ensemble per IRS density, all with the same seed.

    The BS and user processes of trial ``i`` are identical across the grid
    (common random numbers).

    Raises:
        ValueError: If the grid is empty or has a negative density.
    """
    if not grid:
        raise ValueError("The grid must not be empty.")
    if any(lam < 0 for lam in grid):
        raise ValueError("IRS densities must be non-negative.")

    rows = []
    for lam in grid:
        logger.info("lambda_irs=%g: %d trials", lam, n)
        rows.append(run_ensemble(p.with_values(lambda_irs=float(lam)), n, master_seed, threads,
                                 alphas=alphas, window_factor=window_factor))
    return rows
