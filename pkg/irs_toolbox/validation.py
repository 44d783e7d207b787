"""
Property suite run by the ``validate_all`` experiment.

Checks of kind ``invariant`` must hold; checks of kind ``finding`` record known
properties of the closed forms (for instance growth orders that differ from the
expected ones) and never fail the run.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from .bounds import (
    evaluate,
    g_fn,
    g_series,
    h_fn,
    h_series,
    k_coef,
    optimize_tau,
    order_slope,
    pi_max,
    ps_max,
    ps_min,
)
from .errors import NonFinite
from .geometry import ORIGIN, campbell_check, lens_area_exact, lens_area_formula, lens_area_numeric, sample_ppp
from .montecarlo import empirical_tail, simulate, sweep_lambda_irs
from .params import SystemParams
from .scenario import build_from_points, received_power, symbol_average_power

__all__ = ['CheckResult', 'run_checks', 'order_growth_series', 'SLOPE_GRID']

logger = logging.getLogger(__name__)

SLOPE_GRID = tuple(float(x) for x in np.geomspace(3e-2, 1e-1, 5))
SLOPE_Q = 1000


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one validation check; ``kind`` is ``invariant`` or ``finding``."""
    name: str
    kind: str
    passed: bool
    detail: str


def _invariant(name: str, passed: bool, detail: str) -> CheckResult:
    return CheckResult(name, 'invariant', bool(passed), detail)


def _finding(name: str, passed: bool, detail: str) -> CheckResult:
    return CheckResult(name, 'finding', bool(passed), detail)


def check_series_identity() -> List[CheckResult]:
    worst = 0.0
    for k in range(-2, 7):
        x = 10.0 ** k
        for closed, series in ((g_fn, g_series), (h_fn, h_series)):
            value = closed(x)
            worst = max(worst, abs(series(x) - value) / value)
    h_one = h_fn(1.0)
    return [
        _invariant('series_identity', worst < 1e-9, f"max relative difference {worst:.3g}"),
        _invariant('h_at_one', abs(h_one - 1.00000275574) < 1e-10, f"h(1)={h_one!r}"),
    ]


def check_order_slopes(p: SystemParams) -> List[CheckResult]:
    base = p.with_values(q_elems=SLOPE_Q)
    slope_ps_max = order_slope(ps_max, base, SLOPE_GRID)
    slope_ps_min = order_slope(ps_min, base, SLOPE_GRID, part='irs_part')
    slope_pi_max = order_slope(pi_max, base, SLOPE_GRID)
    return [
        _invariant('slope_ps_max', abs(slope_ps_max - 4.0) <= 0.2, f"slope {slope_ps_max:.4f}, expected 4"),
        _invariant('slope_ps_min_irs', abs(slope_ps_min - 1.0) <= 0.05, f"slope {slope_ps_min:.4f}, expected 1"),
        _finding('slope_pi_max', abs(slope_pi_max - 3.0) <= 0.2,
                 f"slope {slope_pi_max:.4f}, expected 3; the closed form carries a fourth-power IRS term"),
    ]


def check_lens_area(r: float, b: float, rng: np.random.Generator) -> List[CheckResult]:
    exact = lens_area_exact(b, r)
    numeric, error = lens_area_numeric(b, r, 10 ** 6, rng)
    printed = lens_area_formula(b, r)
    return [
        _invariant('lens_area_oracle', abs(numeric - exact) <= 5 * error,
                   f"numeric {numeric:.4f} +- {error:.4f}, exact {exact:.4f}"),
        _finding('lens_area_printed', abs(printed - exact) <= 0.05 * exact,
                 f"printed {printed:.4f} versus exact {exact:.4f} at b={b:g}, r={r:g}"),
    ]


def check_bound_structure(spec) -> List[CheckResult]:
    violations, negatives = [], []
    for lam in spec.grid:
        bounds = evaluate(spec.params.with_values(lambda_irs=lam), spec.bound_params)
        violations.extend(f"{name}@{lam:g}" for name in bounds.sandwich_violations())
        negatives.extend(f"{name}@{lam:g}" for name in bounds.negative_parts())
    return [
        _invariant('bound_sandwich', not violations, ', '.join(violations) or 'min <= max everywhere'),
        _finding('bound_parts_nonnegative', not negatives, ', '.join(negatives) or 'all parts >= 0'),
    ]


def check_point_process(rng: np.random.Generator, trials: int = 10 ** 5) -> List[CheckResult]:
    lam, radius = 1e-2, 15.0
    counts = np.empty(trials)
    inner = 0
    total = 0
    for i in range(trials):
        points = sample_ppp(lam, ORIGIN, radius, rng).points
        counts[i] = len(points)
        inner += int(np.count_nonzero(np.hypot(points[:, 0], points[:, 1]) <= radius / 2))
        total += len(points)
    dispersion = float(np.var(counts, ddof=1) / np.mean(counts))
    fraction = inner / total
    sigma = math.sqrt(0.25 * 0.75 / total)

    h = 10.0
    campbell = campbell_check(1e-3, lambda x: 1.0 / (h * h + np.sum(x * x, axis=1)), radius, trials, rng)
    return [
        _invariant('ppp_dispersion', 0.95 <= dispersion <= 1.05, f"index of dispersion {dispersion:.4f}"),
        _invariant('ppp_uniformity', abs(fraction - 0.25) <= 3 * sigma, f"inner-disk fraction {fraction:.4f}"),
        _invariant('campbell', campbell < 0.02, f"relative error {campbell:.4f}"),
    ]


def frozen_small_scenarios(p: SystemParams, count: int, rng: np.random.Generator):
    """Small random layouts (at most 3 BSs, 3 users, 2 IRSs) inside the coverage disk."""
    small = p.with_values(q_elems=min(p.q_elems, 4))
    r = small.r_co

    def disk(n: int) -> np.ndarray:
        rho = r * np.sqrt(rng.random(n))
        phi = 2 * math.pi * rng.random(n)
        return np.column_stack([rho * np.cos(phi), rho * np.sin(phi)])

    for _ in range(count):
        bs = disk(int(rng.integers(1, 4)))
        users = disk(int(rng.integers(0, 3)))
        irs = disk(int(rng.integers(0, 3)))
        yield build_from_points(small, bs, users, irs, rng)


def check_brute_force(p: SystemParams, rng: np.random.Generator, count: int = 20,
                      draws: int = 10 ** 5) -> List[CheckResult]:
    worst = 0.0
    failures = []
    for index, scenario in enumerate(frozen_small_scenarios(p, count, rng)):
        exact = received_power(scenario)
        estimate, error = symbol_average_power(scenario, draws, rng)
        gap = abs(estimate - exact)
        if exact > 0:
            worst = max(worst, gap / exact)
        if gap > max(0.01 * exact, 5 * error):
            failures.append(str(index))
    return [_invariant('brute_force', not failures,
                       f"worst relative gap {worst:.4f}" + (f", failing {','.join(failures)}" if failures else ''))]


def monotone_checks(attr: str, grid: Sequence[float], means: Sequence[float],
                     halfwidths: Sequence[float]) -> List[CheckResult]:
    """
    An increase along the grid is confirmed when the CIs of neighbors do not
    overlap. A decrease beyond the CIs breaks the invariant; any step that is
    not a confirmed increase is reported as a finding.
    """
    decreases, unresolved = [], []
    for i in range(1, len(means)):
        step = f"{grid[i - 1]:g}->{grid[i]:g}"
        a, ha, b, hb = means[i - 1], halfwidths[i - 1], means[i], halfwidths[i]
        if b + hb < a - ha:
            decreases.append(step)
        if not b - hb > a + ha:
            unresolved.append(step)
    trend = ' < '.join(f"{m:.6g}+-{h:.2g}" for m, h in zip(means, halfwidths))
    return [
        _invariant(f"monotone_{attr}", not decreases,
                   f"decrease beyond CI at {', '.join(decreases)}" if decreases else trend),
        _finding(f"separated_{attr}", not unresolved,
                 f"no increase beyond the CIs at {', '.join(unresolved)}" if unresolved
                 else 'every step beyond the CIs'),
    ]


def check_ensembles(spec, ensembles) -> List[CheckResult]:
    results = []
    outside, far = [], []
    for lam, stats in zip(spec.grid, ensembles):
        bounds = evaluate(spec.params.with_values(lambda_irs=lam), spec.bound_params)
        if stats.mean_ps + stats.ci_ps < bounds.ps_min.total or stats.mean_ps - stats.ci_ps > bounds.ps_max.total:
            outside.append(f"ps@{lam:g}")
        if stats.mean_pi + stats.ci_pi < bounds.pi_min.total or stats.mean_pi - stats.ci_pi > bounds.pi_max.total:
            outside.append(f"pi@{lam:g}")
        # closer to ps_min than to ps_max on a log scale
        low, high = bounds.ps_min.total, bounds.ps_max.total
        if low > 0 and stats.mean_ps - stats.ci_ps > math.sqrt(low * high):
            far.append(f"{lam:g}")
    results.append(_invariant('mc_sandwich', not outside, ', '.join(outside) or 'means inside [min, max]'))
    results.append(_invariant('mc_near_lower_bound', not far,
                              f"mean_ps above the log-midpoint of the bounds at {', '.join(far)}" if far
                              else 'mean_ps on the lower-bound side everywhere'))

    grid = list(spec.grid)
    for attr in ('ps', 'pi', 'cap'):
        results += monotone_checks(f"mean_{attr}", grid, [getattr(s, f"mean_{attr}") for s in ensembles],
                                    [getattr(s, f"ci_{attr}") for s in ensembles])

    moment_failures = []
    for lam, stats in zip(spec.grid, ensembles):
        k = k_coef(spec.params.with_values(lambda_irs=lam))
        for order, moment in zip((1, 2, 3), stats.moments_pi):
            if moment ** (1.0 / order) > k * order ** 11:
                moment_failures.append(f"p={order}@{lam:g}")
    results.append(_invariant('moment_bound', not moment_failures, ', '.join(moment_failures) or 'all below K p^11'))
    return results


def check_tails(spec, ensembles) -> List[CheckResult]:
    tail_violations, outage_violations = [], []
    previous = None
    ordering = []
    for lam, stats in zip(spec.grid, ensembles):
        p = spec.params.with_values(lambda_irs=lam)
        for curve, which in ((stats.survival_s, 's_tail'), (stats.survival_i, 'i_tail')):
            for point in curve:
                if point.threshold <= 0:
                    continue
                bound = optimize_tau(point.threshold, p, which).bound
                if point.ci_low > bound:
                    tail_violations.append(f"{which}@{lam:g},t={point.threshold:.3g}")
        samples = stats.samples[:, 2]
        current = []
        for point in empirical_tail(samples, spec.alphas):
            bound = optimize_tau(point.threshold, p, 'outage').bound
            current.append(bound)
            if point.ci_low > bound:
                outage_violations.append(f"{lam:g},alpha={point.threshold:g}")
        if previous is not None and any(c < prev * (1 - 1e-12) for c, prev in zip(current, previous)):
            ordering.append(f"{lam:g}")
        previous = current
    return [
        _invariant('tail_domination', not tail_violations, ', '.join(tail_violations[:5]) or 'no violations'),
        _invariant('outage_domination', not outage_violations, ', '.join(outage_violations[:5]) or 'no violations'),
        _finding('outage_bound_ordering', not ordering,
                 f"decrease at {', '.join(ordering)}; the signal upper bound falls with density on sparse grids"
                 if ordering else 'non-decreasing in IRS density'),
    ]


def check_determinism(spec) -> List[CheckResult]:
    n = min(spec.trials, 50)
    single = simulate(spec.params, n, spec.seed, threads=1, window_factor=spec.window_factor)
    parallel = simulate(spec.params, n, spec.seed, threads=4, window_factor=spec.window_factor)
    return [_invariant('determinism', np.array_equal(single, parallel), f"{n} trials, 1 versus 4 threads")]


def _guarded(name: str, check: Callable[[], List[CheckResult]]) -> List[CheckResult]:
    try:
        return check()
    except NonFinite as error:
        return [_invariant(name, False, str(error))]


def run_checks(spec) -> List[CheckResult]:
    """
    Run every check for an experiment spec.

    Monte Carlo checks use ``spec.trials`` trials per IRS density of ``spec.grid``.

    Returns:
        list: ``CheckResult`` items in a fixed order.
    """
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(2 ** 31,)))
    checks = []
    checks += check_series_identity()
    checks += _guarded('order_slopes', lambda: check_order_slopes(spec.params))
    checks += check_lens_area(spec.params.r_co, spec.bound_params.b, rng)
    checks += _guarded('bound_structure', lambda: check_bound_structure(spec))
    checks += check_point_process(rng)
    checks += check_brute_force(spec.params, rng)

    grid = list(spec.grid)
    if grid:
        ensembles = sweep_lambda_irs(spec.params, grid, spec.trials, spec.seed, spec.threads,
                                     alphas=list(spec.alphas), window_factor=spec.window_factor)
        checks += _guarded('ensembles', lambda: check_ensembles(spec, ensembles))
        checks += _guarded('tails', lambda: check_tails(spec, ensembles))
    checks += check_determinism(spec)

    for check in checks:
        logger.info("%-24s %-9s %s  %s", check.name, check.kind, 'ok' if check.passed else 'FAILED', check.detail)
    return checks


def order_growth_series(p: SystemParams, grid: Sequence[float] = None) -> Dict[str, List[Tuple[float, float]]]:
    """Bound values along the IRS density grid used by the slope checks, for plotting."""
    grid = grid or SLOPE_GRID
    base = p.with_values(q_elems=SLOPE_Q)
    series = {'ps_max': [], 'ps_min (IRS part)': [], 'pi_max': []}
    for lam in grid:
        q = base.with_values(lambda_irs=lam)
        series['ps_max'].append((lam, ps_max(q).total))
        series['ps_min (IRS part)'].append((lam, ps_min(q).irs_part))
        series['pi_max'].append((lam, pi_max(q).total))
    return series
