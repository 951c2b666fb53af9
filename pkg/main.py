#!/usr/bin/env python
"""
Non-Markovian two-qubit noise model
Command-line entry point: kernel and cost sweeps, gate evolution, calibration and the discrepancy report
"""

import os
import sys
import logging
import argparse
from typing import List, Optional

from dotenv import load_dotenv

from src.calibration.counts_calibration import ConversionRule, Estimator
from src.cli.commands import (
    SweepSpec,
    cmd_calibrate,
    cmd_cost_sweep,
    cmd_evolve,
    cmd_gaussian_sweep,
    cmd_kernel_sweep,
    cmd_verify,
    to_json,
)
from src.cli.config import OutputFormat, RunConfig, build_run_config
from src.exceptions import DomainError, TclQemError, UsageError
from src.kernel.decoherence_kernel import NoiseParams
from src.multiplet.multiplet_basis import Gate, InitialState

logger = logging.getLogger(__name__)

DEFAULT_COUNTS = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data", "published_counts.json")

EXIT_OK = 0
EXIT_DATA_ERROR = 1
EXIT_USAGE_ERROR = 2


def setup_logging():
    """Configure the root logger; stdout carries data, so log records go to stderr."""
    level_name = os.getenv("TCLQEM_LOG_LEVEL", "INFO").upper()
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    log_file = os.getenv("TCLQEM_LOG_FILE")
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=getattr(logging, level_name, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers
    )


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='key=value config file (overrides TCLQEM_CONFIG)')
    common.add_argument('--out', help='Write output to this file instead of stdout')
    common.add_argument('--format', choices=OutputFormat.CHOICES, help='Output format for sweeps (default csv)')
    common.add_argument('--x-start', dest='x_start', type=float, help='First t/tau_s of the sweep')
    common.add_argument('--x-end', dest='x_end', type=float, help='Last t/tau_s of the sweep')
    common.add_argument('--steps', type=int, help='Number of grid points')
    common.add_argument('--gamma0-omega-tau', dest='gamma0_omega_tau', type=float, action='append',
                        help='Coupling Gamma0*omega_c*tau_s; repeat for several curves')
    common.add_argument('--omega-c-tau-s', dest='omega_c_tau_s', type=float, help='Dimensionless cutoff omega_c*tau_s')
    common.add_argument('--delta0', type=float, help='Shift scale Delta0')
    common.add_argument('--tau-s', dest='tau_s', type=float, help='Switching time in seconds')
    common.add_argument('--alpha', type=float, help='Re k at the gate time')
    common.add_argument('--t-over-tau-s', dest='t_over_tau_s', type=float,
                        help='Gate time t/tau_s used when --alpha is not given')
    common.add_argument('--gate', choices=[g.value for g in Gate], help='Gate (default cnot)')
    common.add_argument('--initial-state', dest='initial_state', choices=[s.value for s in InitialState],
                        help='Initial multiplet state')
    common.add_argument('--counts', help='Counts JSON file (default: bundled published tables)')
    common.add_argument('--estimator', choices=[e.value for e in Estimator], help='Calibration estimator')
    common.add_argument('--conversion-rule', dest='conversion_rule', choices=[r.value for r in ConversionRule],
                        help='Rule reported as coupling_hat')

    parser = argparse.ArgumentParser(description='Non-Markovian two-qubit noise model and QEM cost')
    subparsers = parser.add_subparsers(dest='command', required=True)
    subparsers.add_parser('kernel-sweep', parents=[common], help='Re k(t) and Im k(t) along t/tau_s')
    subparsers.add_parser('evolve', parents=[common], help='Outcome probabilities of one noisy gate')
    subparsers.add_parser('cost-sweep', parents=[common], help='QEM cost along t/tau_s')
    subparsers.add_parser('gaussian-sweep', parents=[common], help='Gaussian rho_11 along t/tau_s')
    subparsers.add_parser('calibrate', parents=[common], help='Estimate Re k(tau_s) from device counts')
    subparsers.add_parser('verify', parents=[common], help='Discrepancy report of published closed forms')

    return parser.parse_args(argv)


def _flags(args: argparse.Namespace) -> dict:
    flags = {key: value for key, value in vars(args).items() if key not in ('command', 'config')}
    for key, enum_type in (('gate', Gate), ('initial_state', InitialState),
                           ('estimator', Estimator), ('conversion_rule', ConversionRule)):
        if flags.get(key) is not None:
            flags[key] = enum_type(flags[key])
    return flags


def run_command(command: str, config: RunConfig) -> str:
    """Run one subcommand and return its rendered output"""
    if command == 'kernel-sweep':
        return cmd_kernel_sweep(SweepSpec.from_config(config)).render(config.format)
    if command == 'gaussian-sweep':
        return cmd_gaussian_sweep(SweepSpec.from_config(config)).render(config.format)
    if command == 'cost-sweep':
        return cmd_cost_sweep(SweepSpec.from_config(config), gate=config.gate).render(config.format)
    if command == 'evolve':
        params = None
        if config.alpha is None:
            try:
                params = NoiseParams.from_coupling(config.gamma0_omega_tau[0], config.omega_c_tau_s,
                                                   delta0=config.delta0, tau_s=config.tau_s)
            except DomainError as e:
                raise UsageError(f"Invalid noise parameters: {e}") from e
        return to_json(cmd_evolve(config.gate, config.initial_state, alpha=config.alpha,
                                  params=params, t_over_tau_s=config.t_over_tau_s))
    if command == 'calibrate':
        counts = config.counts or DEFAULT_COUNTS
        return to_json(cmd_calibrate(counts, estimator=config.estimator, rule=config.conversion_rule))
    if command == 'verify':
        return to_json(cmd_verify())
    raise UsageError(f"Unknown command: {command}")


def main(argv: Optional[List[str]] = None) -> int:
    """Main application entry point."""
    load_dotenv()
    setup_logging()
    args = parse_arguments(argv)

    try:
        config = build_run_config(_flags(args), config_path=args.config)
        output = run_command(args.command, config)
    except UsageError as e:
        logger.error(f"Usage error: {e}")
        return EXIT_USAGE_ERROR
    except TclQemError as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_DATA_ERROR

    if config.out:
        try:
            with open(config.out, 'w', encoding='utf-8', newline='\n') as f:
                f.write(output)
        except OSError as e:
            logger.error(f"Cannot write output file {config.out}: {e}")
            return EXIT_DATA_ERROR
        logger.info(f"Output written to: {config.out}")
    else:
        sys.stdout.write(output)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
