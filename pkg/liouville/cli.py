"""Command-line interface for liouville.

This module provides the CLI interface and main orchestration logic:
argument parsing, configuration merging and validation, run directories,
artifact writing and exit codes.
"""

import argparse
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

from liouville import __version__
from liouville.config import (
    build_config,
    load_config_file,
    parse_float_list,
    parse_int_list,
    validate_config,
)
from liouville.errors import ConfigError, NumericalError, ValidationError
from liouville.experiments import run_command
from liouville.logger import close_logging, setup_logging
from liouville.models import Command, DomainKind, ExperimentConfig, VarianceMode
from liouville.results import RunOutput, create_run_dir, quarantine, write_manifest, write_output

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

COMMAND_HELP = {
    Command.FIELD_STATS: "Circle-average statistics of sampled fields at one point",
    Command.CLOCK_MEAN: "Mean of mu_eps(t) over field replicates along one fixed path",
    Command.CONVERGE: "Successive differences of the clock over dyadic levels",
    Command.POSITIVITY: "Positivity and strict increase of the clock",
    Command.CONFORMAL_CHECK: "KS comparison of total clocks under a rotation of the disc",
    Command.THICK_DIM: "Thick-point covers and their dimension estimates",
    Command.KPZ_TABLE: "KPZ dimension table over a grid of Euclidean dimensions",
    Command.MOMENTS: "Moment estimates of the exact-scaling chaos",
    Command.PAIR_COUNT: "Net pair counts and modulus of continuity of Brownian paths",
}


def _point(text: str) -> List[float]:
    values = parse_float_list(text)
    if len(values) != 2:
        raise ConfigError(f"expected 'x,y', got '{text}'")
    return values


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, help='JSON config file (flat keys or a previous manifest.json)')
    common.add_argument('--seed', type=int, help='Root seed of all random streams (default: 1)')
    common.add_argument('--gamma', type=float, help='Coupling constant in [0, 2)')
    common.add_argument('--k', type=int, help='Dyadic level, eps = 2**-k')
    common.add_argument('--n-modes', dest='n_modes', type=int, help='Number of field modes (default: 262144 = 512^2)')
    common.add_argument('--dt', type=float, help='Path time step (default: eps**2 / 16 at the finest level)')
    common.add_argument('--margin', type=float, help='Stopping margin in (0, 1/2) (default: 0.1)')
    common.add_argument('--n-replicates', dest='n_replicates', type=int, help='Number of replicates')
    common.add_argument('--domain', choices=[kind.value for kind in DomainKind], help='Simulation domain')
    common.add_argument('--grid-n', dest='grid_n', type=int, help='Grid resolution for exports (default: 64)')
    common.add_argument('--start', type=_point, help="Starting point 'x,y'")
    common.add_argument('--horizon', type=float, help='Euclidean time horizon for clock readings')
    common.add_argument('--max-time', dest='max_time', type=float, help='Maximum path duration (default: 1.0; moments: 0.01)')
    common.add_argument('--variance-mode', dest='variance_mode',
                        choices=[mode.value for mode in VarianceMode],
                        help='Variance convention in the clock integrand (default: analytic)')
    common.add_argument('--output-dir', dest='output_dir', type=str, help='Directory receiving run folders (default: runs)')
    common.add_argument('--log-level', dest='log_level', type=str,
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], default='INFO',
                        help='Logging level (default: INFO)')
    return common


def create_parser() -> argparse.ArgumentParser:
    """Create and configure argument parser.

    Returns:
        Configured ArgumentParser instance
    """
    parser = argparse.ArgumentParser(
        prog='liouville',
        description='Simulate Liouville Brownian motion and check its properties numerically',
        formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    subparsers = parser.add_subparsers(dest='command', metavar='<command>')
    common = _common_parser()
    commands = {
        command: subparsers.add_parser(command.value, parents=[common], help=COMMAND_HELP[command],
                                       description=COMMAND_HELP[command])
        for command in Command
    }

    commands[Command.FIELD_STATS].add_argument(
        '--export-grid', dest='export_grid', action='store_true', default=None,
        help='Also write grid.csv with h_eps on a grid_n x grid_n lattice')
    commands[Command.CLOCK_MEAN].add_argument(
        '--export-series', dest='export_series', action='store_true', default=None,
        help='Also write path.csv, clock.csv and trajectory.csv for replicate 0')

    converge = commands[Command.CONVERGE]
    converge.add_argument('--k-min', dest='k_min', type=int, help='Coarsest dyadic level')
    converge.add_argument('--k-max', dest='k_max', type=int, help='Finest dyadic level')

    positivity = commands[Command.POSITIVITY]
    positivity.add_argument('--gammas', type=parse_float_list, help='Comma-separated gamma values')
    positivity.add_argument('--resolution', type=float, help='Net spacing for the strict-increase check')

    conformal = commands[Command.CONFORMAL_CHECK]
    conformal.add_argument('--theta', type=parse_float_list, help='Comma-separated rotation angles (radians)')
    conformal.add_argument('--shared-seeds', dest='shared_seeds', action='store_true', default=None,
                           help='Reuse the same replicate streams for both samples')

    thick = commands[Command.THICK_DIM]
    thick.add_argument('--alpha', type=float, help='Thickness level')
    thick.add_argument('--delta', type=float, help='Threshold slack (default: 0.05)')
    thick.add_argument('--eta', type=float, help='Scale exponent slack (default: 0.5)')
    thick.add_argument('--n-range', dest='n_range', type=parse_int_list, help='Comma-separated scale indices')
    thick.add_argument('--q-grid', dest='q_grid', type=parse_float_list, help='Comma-separated q values in (0, 1]')
    thick.add_argument('--threshold', type=float, help='Cover-sum threshold (default: 1.0)')

    commands[Command.KPZ_TABLE].add_argument('--d0', type=parse_float_list, help='Comma-separated d0 values in [0, 2]')

    moments = commands[Command.MOMENTS]
    moments.add_argument('--q', type=float, help='Moment order in (1, 2)')
    moments.add_argument('--m', type=int, help='Checkerboard depth')
    moments.add_argument('--epsilons', type=parse_float_list, help='Comma-separated scales in [2**-6, 2**-3]')
    moments.add_argument('--max-points', dest='max_points', type=int, help='Point budget per replicate (<= 2000)')

    pairs = commands[Command.PAIR_COUNT]
    pairs.add_argument('--ks', type=parse_int_list, help='Comma-separated dyadic levels')
    pairs.add_argument('--n-offsets', dest='n_offsets', type=int, help='Net offsets tried per level')

    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """Build the run configuration from parsed arguments (flags over file)."""
    command = Command(args.command)
    file_values: Optional[Dict[str, Any]] = None
    if args.config:
        file_values = load_config_file(Path(args.config))
    cli_values = {name: value for name, value in vars(args).items()
                  if name not in ('command', 'config', 'log_level')}
    return build_config(command, file_values, cli_values)


def run_experiment(config: ExperimentConfig, log_level: str = "INFO") -> int:
    """Run one configured command and write its artifacts.

    Writes <output_dir>/<command>-<timestamp>/ with manifest.json,
    results.csv, summary.json and liouville.log. On failure the rows
    produced so far go to the quarantine subfolder.

    Returns:
        Exit code (0=success, 1=I/O or unexpected error, 2=validation error,
        3=numerical error)
    """
    errors = validate_config(config)
    if errors:
        for message in errors:
            print(f"Error: {message}", file=sys.stderr)
        return EXIT_VALIDATION

    try:
        run_dir = create_run_dir(Path(config.output_dir), config.command.value)
    except OSError as e:
        print(f"Error: Could not create run directory: {e}", file=sys.stderr)
        return EXIT_ERROR

    logger = setup_logging(run_dir, log_level)
    logger.info(f"Run directory: {run_dir}")
    started = time.perf_counter()
    output = RunOutput()
    code = EXIT_OK
    failure: Optional[BaseException] = None
    try:
        run_command(config, output)
        write_output(run_dir, output)
        logger.info(f"Wrote {len(output.tables)} table(s) and summary.json")
        print(f"Results written to {run_dir}", file=sys.stdout)
    except ValidationError as e:
        code, failure = EXIT_VALIDATION, e
        logger.error(f"Validation error: {e}")
        print(f"Error: {e}", file=sys.stderr)
    except NumericalError as e:
        code, failure = EXIT_NUMERICAL, e
        logger.error(f"Numerical error: {e}")
        print(f"Error: {e}", file=sys.stderr)
    except Exception as e:
        code, failure = EXIT_ERROR, e
        logger.error(f"Unexpected error: {e}")
        print(f"Error: {e}", file=sys.stderr)

    try:
        if failure is not None:
            folder = quarantine(run_dir, output, failure, code)
            logger.info(f"Partial results moved to {folder}")
        write_manifest(run_dir, config, time.perf_counter() - started)
    except OSError as e:
        print(f"Error: Could not write artifacts: {e}", file=sys.stderr)
        code = code or EXIT_ERROR
    finally:
        close_logging()
    return code


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the liouville CLI.

    Returns:
        Exit code (0=success, 1=operation error, 2=validation error, 3=numerical error)
    """
    parser = create_parser()
    argv = sys.argv[1:] if argv is None else argv

    if not argv:
        parser.print_help()
        return EXIT_VALIDATION

    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_VALIDATION

    try:
        config = config_from_args(args)
    except ConfigError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_VALIDATION

    return run_experiment(config, args.log_level)


if __name__ == '__main__':
    sys.exit(main())
