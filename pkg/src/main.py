#!/usr/bin/env python3
"""
bogofluct - Main Entry Point

Command-line interface of the Bose gas fluctuation toolkit. It loads the run
configuration, sets up logging, runs the stages of one subcommand and maps
toolkit errors to exit codes.

Subcommands:
- scattering      Neumann scattering problem over the particle sweep
- condensate      NLS / modified Hartree condensate evolution
- evolve          correlation kernels and Bogoliubov propagation
- covariance      fluctuation covariance Σ_t of the configured observables
- oracle-verify   comparison against exact truncated Fock space evolution
- full-pipeline   every stage from scattering to covariance
- config show     canonical INI of the effective configuration
"""

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

# Add the src directory to Python path for imports
current_dir = Path(__file__).parent
sys.path.insert(0, str(current_dir))

import numpy as np
from loguru import logger

from config import APP_NAME, APP_VERSION
from config.settings import RunSettings, get_settings_manager
from controllers import COMMAND_STAGES, PipelineController, cleanup_all_controllers
from controllers.report import json_default
from models.base import BogoFluctError
from utils.resource_manager import get_resource_manager

EXIT_SUCCESS = 0
EXIT_UNEXPECTED = 1
EXIT_ORACLE_FAILED = 9

CONSOLE_FORMAT = "<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | {message}"


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with the shared run flags on every subcommand"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="INI configuration file")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="Override one configuration value (repeatable)")
    common.add_argument("--out", type=str, default=None, help="Output directory (output.directory)")
    common.add_argument("--seed", type=int, default=None, help="Random seed (run.seed)")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="Log at DEBUG level")
    verbosity.add_argument("--quiet", action="store_true", help="Log warnings and errors only")

    parser = argparse.ArgumentParser(
        prog=APP_NAME,
        description="Gaussian fluctuation statistics of a Bose gas with scaled interaction",
    )
    parser.add_argument("--version", action="version", version=f"{APP_NAME} {APP_VERSION}")
    commands = parser.add_subparsers(dest="command", required=True)
    for command in COMMAND_STAGES:
        commands.add_parser(command, parents=[common], help=f"Run the {command} stage(s)")
    config_parser = commands.add_parser("config", parents=[common], help="Inspect the configuration")
    config_parser.add_argument("action", choices=["show"], help="Print the canonical INI")
    return parser


def console_level(args: argparse.Namespace, settings: Optional[RunSettings] = None) -> str:
    if args.verbose:
        return "DEBUG"
    if args.quiet:
        return "WARNING"
    return settings.logging.log_level.upper() if settings is not None else "INFO"


def setup_logging(settings: Optional[RunSettings], level: str) -> None:
    """Install the console sink and, when enabled, the rotating file sink"""
    logger.remove()
    if settings is None or settings.logging.enable_console_logging:
        logger.add(sys.stderr, level=level, format=CONSOLE_FORMAT)
    if settings is not None and settings.logging.enable_file_logging:
        config = settings.logging
        log_dir = get_resource_manager(settings.output.directory).get_log_directory(config.log_directory)
        logger.add(
            log_dir / config.log_file_name,
            level=config.log_level.upper(),
            format=config.log_format,
            rotation=f"{config.max_log_size_mb} MB",
            retention=config.log_backup_count,
            encoding="utf-8",
        )


def collect_overrides(args: argparse.Namespace) -> List[str]:
    overrides = list(args.overrides)
    if args.out is not None:
        overrides.append(f"output.directory={args.out}")
    if args.seed is not None:
        overrides.append(f"run.seed={args.seed}")
    return overrides


def run_command(command: str, settings: RunSettings) -> int:
    """
    Run the stages of one subcommand

    Returns:
        int: exit status; a failed oracle verdict is reported as EXIT_ORACLE_FAILED
    """
    rng = np.random.default_rng(settings.seed)
    pipeline = PipelineController(settings, get_resource_manager(settings.output.directory), rng=rng)
    try:
        pipeline.run(command)
        if command == "oracle-verify":
            print(json.dumps(pipeline.oracle.result, indent=2, sort_keys=True, default=json_default))
            if not pipeline.oracle.passed:
                logger.error("Oracle verdict failed")
                return EXIT_ORACLE_FAILED
    finally:
        pipeline.cleanup()
    return EXIT_SUCCESS


def main(argv: Optional[List[str]] = None) -> int:
    """Main application entry point."""
    args = build_parser().parse_args(argv)
    setup_logging(None, console_level(args))

    try:
        manager = get_settings_manager(args.config, collect_overrides(args))
        settings = manager.get_settings()
        setup_logging(settings, console_level(args, settings))

        if args.command == "config":
            sys.stdout.write(manager.to_ini())
            return EXIT_SUCCESS

        logger.info(f"{APP_NAME} {APP_VERSION}: {args.command} (config hash {manager.config_hash()[:12]})")
        exit_code = run_command(args.command, settings)
        logger.info(f"{args.command} finished with exit status {exit_code}")
        return exit_code

    except BogoFluctError as e:
        logger.error(f"{type(e).__name__}: {e.message}")
        return e.exit_code
    except KeyboardInterrupt:
        logger.warning("Interrupted")
        return EXIT_UNEXPECTED
    except Exception as e:
        logger.opt(exception=e).critical(f"Unexpected failure: {e}")
        return EXIT_UNEXPECTED
    finally:
        cleanup_all_controllers()


if __name__ == "__main__":
    sys.exit(main())
