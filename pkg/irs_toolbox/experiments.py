import csv
import io
import logging
import math
import os
import subprocess
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from .bounds import KL_EXPONENT, evaluate, optimize_tau
from .errors import ConfigError
from .format_power import format_readable_power
from .montecarlo import EnsembleStats, run_ensemble, sweep_lambda_irs
from .params import BoundParams, SystemParams, param_hash
from .plot_generator import generate_svg_plot
from .scenario import DEFAULT_WINDOW_FACTOR
from .validation import CheckResult, order_growth_series, run_checks

__all__ = [
    'EXPERIMENTS',
    'ExperimentSpec',
    'ExperimentResult',
    'DEFAULT_ALPHAS',
    'spec_from_config',
    'validate_spec',
    'csv_metadata',
    'render_csv',
    'run',
]

logger = logging.getLogger(__name__)

EXPERIMENTS = ('fig3_powers', 'fig4_capacity', 'fig5_outage_lambda', 'fig6_outage_kappa', 'validate_all')
SWEEPS = EXPERIMENTS[:4]
DEFAULT_ALPHAS = tuple(float(a) for a in np.round(np.linspace(0.25, 5.0, 20), 6))
EXPERIMENT_KEYS = ('name', 'grid', 'alphas', 'trials', 'seed', 'threads', 'out_dir', 'window_factor')


@dataclass(frozen=True)
class ExperimentSpec:
    """
    One named experiment. ``grid`` holds IRS densities, or Rician factors for
    ``fig6_outage_kappa``.
    """
    name: str
    params: SystemParams
    bound_params: BoundParams
    grid: Tuple[float, ...] = (1e-4, 3e-4, 1e-3)
    trials: int = 2000
    seed: int = 0
    threads: int = 1
    out_dir: str = 'results'
    alphas: Tuple[float, ...] = DEFAULT_ALPHAS
    window_factor: float = DEFAULT_WINDOW_FACTOR


@dataclass(frozen=True)
class ExperimentResult:
    paths: List[str]
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def failed_invariants(self) -> List[CheckResult]:
        return [c for c in self.checks if c.kind == 'invariant' and not c.passed]


def validate_spec(spec: ExperimentSpec) -> ExperimentSpec:
    """
    Check the experiment block.

    Raises:
        ConfigError: Naming the offending field.
    """
    if spec.name not in EXPERIMENTS:
        raise ConfigError('name', f"unknown experiment {spec.name!r}, expected one of {EXPERIMENTS}")
    if spec.name in SWEEPS and not spec.grid:
        raise ConfigError('grid', "sweep experiments need a non-empty grid")
    for value in spec.grid:
        if math.isnan(value) or value < 0 or (math.isinf(value) and spec.name != 'fig6_outage_kappa'):
            raise ConfigError('grid', "grid values must be finite and non-negative")
    if spec.trials < 1:
        raise ConfigError('trials', "at least one trial is required")
    if spec.threads < 1:
        raise ConfigError('threads', "at least one thread is required")
    if not spec.alphas or any(a <= 0 for a in spec.alphas) or list(spec.alphas) != sorted(spec.alphas):
        raise ConfigError('alphas', "alphas must be positive and ascending")
    if spec.window_factor <= 0:
        raise ConfigError('window_factor', "window factor must be positive")
    return spec


def spec_from_config(config: Dict[str, Any], **overrides) -> ExperimentSpec:
    """
    Combine a parsed configuration with command-line overrides.

    Args:
        config (dict): Output of ``params.parse_config``.
        **overrides: Experiment fields; ``None`` values are ignored.

    Returns:
        ExperimentSpec: The validated spec.

    Raises:
        ConfigError: On unknown experiment keys or invalid values.
    """
    block = dict(config.get('experiment', {}))
    unknown = sorted(set(block) - set(EXPERIMENT_KEYS))
    if unknown:
        raise ConfigError(unknown[0], "unknown experiment key")
    block.update({k: v for k, v in overrides.items() if v is not None})
    if 'name' not in block:
        raise ConfigError('name', "no experiment selected")

    for key in ('grid', 'alphas'):
        if key in block:
            values = block[key]
            if not isinstance(values, (list, tuple)):
                raise ConfigError(key, "must be a list of numbers")
            if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in values):
                raise ConfigError(key, "must contain numbers only")
            block[key] = tuple(float(v) for v in values)
    for key in ('trials', 'seed', 'threads'):
        if key in block and (not isinstance(block[key], int) or isinstance(block[key], bool)):
            raise ConfigError(key, "must be an integer")
    if 'window_factor' in block and (isinstance(block['window_factor'], bool)
                                     or not isinstance(block['window_factor'], (int, float))):
        raise ConfigError('window_factor', "must be a number")
    if not isinstance(block.get('out_dir', ''), str):
        raise ConfigError('out_dir', "must be a path")

    spec = ExperimentSpec(params=config['params'], bound_params=config['bound_params'], **block)
    return validate_spec(spec)


def _git_describe() -> str:
    try:
        completed = subprocess.run(['git', 'describe', '--always', '--dirty'], capture_output=True, text=True,
                                   cwd=os.path.dirname(os.path.abspath(__file__)), timeout=10)
    except (OSError, subprocess.SubprocessError):
        return 'unknown'
    return completed.stdout.strip() or 'unknown'


def csv_metadata(spec: ExperimentSpec) -> str:
    """Header comment of every CSV: parameter hash, code version and bound interpretation flags."""
    return (f"# param_hash={param_hash(spec.params, spec.bound_params)} git={_git_describe()} "
            f"kl_exponent={KL_EXPONENT} lens_area={spec.bound_params.lens_area} "
            f"lens_area_s={spec.bound_params.lens_area_s!r} seed={spec.seed} trials={spec.trials}")


def render_csv(metadata: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """RFC-4180 text; floats are written with ``repr`` so values read back exactly."""
    buffer = io.StringIO()
    buffer.write(metadata + '\r\n')
    writer = csv.writer(buffer)
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buffer.getvalue()


def _write(spec: ExperimentSpec, header: Sequence[str], rows: Sequence[Sequence[Any]], svg: str) -> List[str]:
    os.makedirs(spec.out_dir, exist_ok=True)
    csv_path = os.path.join(spec.out_dir, f"{spec.name}.csv")
    svg_path = os.path.join(spec.out_dir, f"{spec.name}.svg")
    with open(csv_path, 'w', encoding='utf-8', newline='') as handle:
        handle.write(render_csv(csv_metadata(spec), header, rows))
    with open(svg_path, 'w', encoding='utf-8') as handle:
        handle.write(svg)
    logger.info("Wrote %s and %s", csv_path, svg_path)
    return [csv_path, svg_path]


def _fig3_powers(spec: ExperimentSpec) -> ExperimentResult:
    header = ['lambda_irs', 'mean_ps', 'ci_ps', 'mean_pi', 'ci_pi', 'ps_min', 'ps_max', 'pi_min', 'pi_max']
    ensembles = sweep_lambda_irs(spec.params, list(spec.grid), spec.trials, spec.seed, spec.threads,
                                 window_factor=spec.window_factor)
    rows = []
    for lam, stats in zip(spec.grid, ensembles):
        bounds = evaluate(spec.params.with_values(lambda_irs=lam), spec.bound_params)
        rows.append([lam, stats.mean_ps, stats.ci_ps, stats.mean_pi, stats.ci_pi,
                     bounds.ps_min.total, bounds.ps_max.total, bounds.pi_min.total, bounds.pi_max.total])

    columns = {name: [row[i] for row in rows] for i, name in enumerate(header)}
    series = {name: list(zip(columns['lambda_irs'], columns[name]))
              for name in ('mean_ps', 'mean_pi', 'ps_min', 'ps_max', 'pi_min', 'pi_max')}
    svg = generate_svg_plot(series, title='Signal and interference power', x_label='IRS density [1/m2]',
                            y_label='Power', log_x=True, log_y=True, tick_format=format_readable_power)
    return ExperimentResult(_write(spec, header, rows, svg))


def _fig4_capacity(spec: ExperimentSpec) -> ExperimentResult:
    header = ['lambda_irs', 'mean_cap', 'ci_cap', 'mean_cap_bits', 'ci_cap_bits']
    ensembles = sweep_lambda_irs(spec.params, list(spec.grid), spec.trials, spec.seed, spec.threads,
                                 window_factor=spec.window_factor)
    rows = [[lam, s.mean_cap, s.ci_cap, s.mean_cap / math.log(2), s.ci_cap / math.log(2)]
            for lam, s in zip(spec.grid, ensembles)]
    svg = generate_svg_plot({'mean capacity': [(row[0], row[3]) for row in rows]}, title='Mean capacity',
                            x_label='IRS density [1/m2]', y_label='bits/s/Hz', log_x=True)
    return ExperimentResult(_write(spec, header, rows, svg))


def _outage_rows(spec: ExperimentSpec, p: SystemParams, stats: EnsembleStats, key: float) -> List[List[Any]]:
    rows = []
    for point in stats.outage:
        choice = optimize_tau(point.threshold, p, 'outage')
        rows.append([key, point.threshold, point.probability, point.ci_low, point.ci_high, choice.bound, choice.tau])
    return rows


def _outage_sweep(spec: ExperimentSpec, key_name: str) -> ExperimentResult:
    header = [key_name, 'alpha', 'emp_pr_c_gt_alpha', 'ci_low', 'ci_high', 'bound', 'tau_star']
    rows = []
    series = {}
    for value in spec.grid:
        p = spec.params.with_values(**{'lambda_irs' if key_name == 'lambda_irs' else 'kappa': value})
        logger.info("%s=%g: %d trials", key_name, value, spec.trials)
        stats = run_ensemble(p, spec.trials, spec.seed, spec.threads, alphas=list(spec.alphas),
                             window_factor=spec.window_factor)
        block = _outage_rows(spec, p, stats, value)
        rows.extend(block)
        series[f"empirical {key_name}={value:g}"] = [(row[1], row[2]) for row in block]
        series[f"bound {key_name}={value:g}"] = [(row[1], row[5]) for row in block]

    svg = generate_svg_plot(series, title='Pr{C > alpha}', x_label='alpha [nats]', y_label='probability',
                            log_y=True)
    return ExperimentResult(_write(spec, header, rows, svg))


def _validate_all(spec: ExperimentSpec) -> ExperimentResult:
    checks = run_checks(spec)
    header = ['check', 'kind', 'passed', 'detail']
    rows = [[c.name, c.kind, 'true' if c.passed else 'false', c.detail] for c in checks]
    svg = generate_svg_plot(order_growth_series(spec.params), title='Order of growth of the bounds',
                            x_label='IRS density [1/m2]', y_label='Power', log_x=True, log_y=True,
                            tick_format=format_readable_power)
    for check in checks:
        if not check.passed:
            log = logger.error if check.kind == 'invariant' else logger.warning
            log("%s %s failed: %s", check.kind, check.name, check.detail)
    return ExperimentResult(_write(spec, header, rows, svg), checks)


def run(spec: ExperimentSpec) -> ExperimentResult:
    """
    Execute a named experiment and write ``<name>.csv`` and ``<name>.svg`` to ``spec.out_dir``.

    Args:
        spec (ExperimentSpec): A validated spec.

    Returns:
        ExperimentResult: Written paths, plus the check outcomes for ``validate_all``.

    Raises:
        NonFinite: If a bound overflows for some grid value.
    """
    validate_spec(spec)
    logger.info("Running %s (trials=%d, seed=%d, threads=%d)", spec.name, spec.trials, spec.seed, spec.threads)
    if spec.name == 'fig3_powers':
        return _fig3_powers(spec)
    if spec.name == 'fig4_capacity':
        return _fig4_capacity(spec)
    if spec.name == 'fig5_outage_lambda':
        return _outage_sweep(spec, 'lambda_irs')
    if spec.name == 'fig6_outage_kappa':
        return _outage_sweep(spec, 'kappa')
    return _validate_all(spec)
