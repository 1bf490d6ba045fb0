import sys
import os
import argparse
import logging
from typing import List, Optional

# Add src directory to Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.cli.commands import (EXIT_USER_ERROR, cmd_baseline, cmd_check_bounds, cmd_run_data,
                              cmd_simulate_field)
from src.core.exceptions import ConfigError
from src.utils.config import ExperimentConfig, apply_overrides, load_config

_HANDLERS: List[logging.Handler] = []


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USER_ERROR)


def setup_logging(config: ExperimentConfig) -> None:
    """Console handler plus an optional file handler, replacing any installed by an earlier call."""
    log_level_name = config.logging.level.upper()
    log_file = config.logging.file

    logger = logging.getLogger()
    logger.setLevel(getattr(logging, log_level_name, logging.INFO))
    for handler in _HANDLERS:
        logger.removeHandler(handler)
        handler.close()
    _HANDLERS.clear()

    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    # Console Handler
    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setFormatter(formatter)
    _HANDLERS.append(console_handler)

    # File Handler (if specified)
    if log_file:
        # Ensure log directory exists
        log_dir = os.path.dirname(log_file)
        if log_dir and not os.path.exists(log_dir):
            os.makedirs(log_dir)

        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(formatter)
        _HANDLERS.append(file_handler)

    for handler in _HANDLERS:
        logger.addHandler(handler)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, default=None, help='Path to the configuration file.')
    common.add_argument('--seed', type=int, default=None, help='Random seed for positions, noise and replay.')
    common.add_argument('--out', type=str, default=None, help='Output directory for metrics and manifest.')
    common.add_argument('--T', type=int, default=None, help='Number of rounds.')
    common.add_argument('--workers', type=int, default=None, help='Worker threads for agent updates.')
    common.add_argument('--parsimony', type=float, default=None, help='Parsimony constant P (epsilon = P * eta^2).')
    common.add_argument('--epsilon', type=float, default=None, help='Compression budget, overrides --parsimony.')
    common.add_argument('--eta', type=float, default=None, help='Step size.')
    common.add_argument('--bandwidth', type=float, default=None, help='Gaussian kernel bandwidth.')
    common.add_argument('--adapt-bandwidth', action='store_true', default=None,
                        help='Adapt each agent\'s bandwidth online.')

    parser = _Parser(description="Decentralized online kernel learning with proximity constraints.")
    subparsers = parser.add_subparsers(dest='command', required=True, parser_class=_Parser)

    field = subparsers.add_parser('simulate-field', parents=[common], help='Run HALK on the synthetic field.')
    field.add_argument('--n-agents', type=int, default=None, help='Number of field nodes.')

    data = subparsers.add_parser('run-data', parents=[common], help='Run HALK on a per-node CSV.')
    data.add_argument('--csv', type=str, default=None, help='Per-node observation CSV.')
    data.add_argument('--target-column', type=str, default=None, help='Name of the target column.')
    data.add_argument('--replay', choices=['sample', 'cycle', 'once'], default=None,
                      help='How rows are replayed across rounds.')

    baseline = subparsers.add_parser('baseline', parents=[common], help='Run a comparison method.')
    baseline.add_argument('method', choices=['penalty', 'rbf', 'centralized', 'linear'])
    baseline.add_argument('--data', action='store_true', help='Use the configured CSV instead of the field.')
    baseline.add_argument('--penalty-c', type=float, default=None, help='Fixed penalty coefficient.')
    baseline.add_argument('--rbf-size', type=int, default=None, help='Size of the fixed RBF dictionary.')
    baseline.add_argument('--rbf-placement', choices=['grid', 'uniform'], default=None)
    baseline.add_argument('--linear-features', choices=['sine', 'poly2', 'poly3'], default=None)
    baseline.add_argument('--centralized-parsimony', type=float, default=None)

    bounds = subparsers.add_parser('check-bounds', parents=[common], help='Check a recorded run against the bounds.')
    bounds.add_argument('--metrics', type=str, required=True, help='Metrics CSV of the run.')
    bounds.add_argument('--optimum', type=float, default=None,
                        help='Optimal averaged objective; enables the decay-rate fit.')
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config is None:
        config = ExperimentConfig()
    else:
        config = load_config(args.config)
    overrides = {
        'experiment': {'seed': args.seed, 'out': args.out, 'T': args.T, 'workers': args.workers},
        'hyper': {'parsimony': args.parsimony, 'epsilon': args.epsilon, 'eta': args.eta,
                  'adapt_bandwidth': args.adapt_bandwidth},
        'kernel': {'bandwidth': args.bandwidth},
    }
    if getattr(args, 'n_agents', None) is not None:
        overrides['field'] = {'n_agents': args.n_agents}
    if getattr(args, 'replay', None) is not None:
        overrides['data'] = {'replay': args.replay}
    return apply_overrides(config, overrides)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    if args.config is not None and not os.path.exists(args.config):
        print(f"Error: Configuration file not found at {args.config}", file=sys.stderr)
        return EXIT_USER_ERROR
    try:
        config = resolve_config(args)
    except ConfigError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USER_ERROR

    setup_logging(config)

    if args.command == 'simulate-field':
        return cmd_simulate_field(config)
    if args.command == 'run-data':
        return cmd_run_data(config, args.csv, args.target_column)
    if args.command == 'baseline':
        params = {
            'penalty_c': args.penalty_c,
            'rbf_size': args.rbf_size,
            'rbf_placement': args.rbf_placement,
            'linear_features': args.linear_features,
            'centralized_parsimony': args.centralized_parsimony,
        }
        return cmd_baseline(config, args.method, {k: v for k, v in params.items() if v is not None},
                            use_data=args.data)
    return cmd_check_bounds(config, args.metrics, args.optimum)


if __name__ == '__main__':
    sys.exit(main())
