import argparse
import logging
import sys
from typing import List, Optional

from .errors import DomainError, NonFinite, ViolatedInvariant
from .experiments import EXPERIMENTS, run, spec_from_config
from .params import parse_config

__all__ = ['build_parser', 'main']

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_CONFIG = 2
EXIT_NON_FINITE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='irs-toolbox',
        description='Simulate IRS-assisted downlinks and evaluate their closed-form bounds.',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument('--config', required=True, help='JSON configuration file')
    parser.add_argument('--experiment', choices=EXPERIMENTS, default=None,
                        help='experiment to run (overrides experiment.name)')
    parser.add_argument('--seed', type=int, default=None, help='master seed (overrides experiment.seed)')
    parser.add_argument('--trials', type=int, default=None, help='Monte Carlo trials per grid point')
    parser.add_argument('--threads', type=int, default=None, help='worker threads')
    parser.add_argument('--out', dest='out_dir', default=None, help='output directory')
    parser.add_argument('--log-level', default='INFO', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Command-line entry point.

    Returns:
        int: 0 on success, 1 when a validation invariant fails, 2 on a
            configuration error, 3 when a bound is not finite.
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level),
                        format='%(asctime)s - %(levelname)s - %(message)s')

    try:
        with open(args.config, 'r', encoding='utf-8') as handle:
            config = parse_config(handle.read())
        spec = spec_from_config(config, name=args.experiment, seed=args.seed, trials=args.trials,
                                threads=args.threads, out_dir=args.out_dir)
    except OSError as error:
        print(f"config error: {error}", file=sys.stderr)
        return EXIT_CONFIG
    except (ViolatedInvariant, DomainError) as error:
        print(f"config error: {error}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        result = run(spec)
    except NonFinite as error:
        print(f"non-finite bound: {error.subterm}", file=sys.stderr)
        return EXIT_NON_FINITE

    for path in result.paths:
        print(path)
    failed = result.failed_invariants
    if failed:
        print(f"invariant failed: {failed[0].name}: {failed[0].detail}", file=sys.stderr)
        for check in failed[1:]:
            print(f"invariant failed: {check.name}: {check.detail}", file=sys.stderr)
        return EXIT_CHECKS_FAILED
    return EXIT_OK
