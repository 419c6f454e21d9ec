import argparse
import logging
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from pydantic import ValidationError

from grid_paths import LabError
from cli import COMMANDS, CONFIG_ERROR, load_config, parse_overrides, run_command


logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


def main(command: str, config_path=None, overrides=None) -> int:
    """
    Args:
        command: subcommand name (simulate, mean-variation, decompose, probe, riemann, theorem1, mazur-demo)
        config_path: flat dotted-key config file (default: built-in defaults)
        overrides: dotted keys or named flags taking precedence over the file

    Returns:
        0 when every postcondition held, 1 when some failed (see failures.json),
        2 on a configuration error
    """
    logger.info("=" * 60)
    logger.info(f"SemimartingaleLab: {command}")
    logger.info("=" * 60)

    try:
        config = load_config(config_path, overrides, command=command)
    except ValidationError as e:
        logger.error(f"Invalid configuration:\n{e}")
        return CONFIG_ERROR
    except (ValueError, OSError) as e:
        logger.error(f"Cannot read configuration: {e}")
        return CONFIG_ERROR

    logger.info(f"Model: {config.build_model()!r}")
    logger.info(f"Levels: {config.grid.levels}, paths: {config.run.n_paths}, seed: {config.run.seed}")
    logger.info(f"Output: {config.output.directory} ({config.output.format})")
    logger.info("-" * 60)

    try:
        code = run_command(command, config)
    except OSError as e:
        logger.error(f"Cannot write results: {e}")
        return CONFIG_ERROR
    except LabError as e:
        logger.error(f"{command} cannot run on this scenario: {e}")
        return CONFIG_ERROR

    logger.info("=" * 60)
    logger.info("Done." if code == 0 else f"Finished with failed checks (exit code {code}).")
    logger.info("=" * 60)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="SemimartingaleLab: semimartingale diagnostics on dyadic grids",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python main.py simulate --levels 10 --paths 10000                  # BM paths on D_10
  python main.py mean-variation --model.kind squared_brownian         # Var(W^2, D_n) = 1
  python main.py probe --model.kind fbm --model.hurst 0.75 --levels 4..10
  python main.py riemann --config scenarios/bm.cfg --out results/bm
  python main.py theorem1 --model.kind bounded_truncation --model.bound 2 \\
      --model.inner.kind brownian --epsilon 0.1
Any dotted config key can be given as a flag: --thresholds.tau_conv 0.05
        """
    )
    parser.add_argument("--log-level", default="INFO", help="Logging level (default: INFO)")

    subparsers = parser.add_subparsers(dest="command", help="Command to execute")
    helps = {
        "simulate": "Simulate an ensemble and write it as CSV + JSON sidecar",
        "mean-variation": "Estimate Var(S, D_n) for every level",
        "decompose": "Doob and Rao decompositions along the finest level",
        "probe": "Good-integrator probe: C(eps, n) and its growth verdict",
        "riemann": "Riemann-integrator test on state-function integrands and witnesses",
        "theorem1": "Localisation pipeline on a bounded model",
        "mazur-demo": "Min-norm convex combinations and the accumulated stopping time",
    }
    for name in COMMANDS:
        sub = subparsers.add_parser(name, help=helps[name])
        sub.add_argument("--config", type=Path, default=None, help="Flat dotted-key config file")
        sub.add_argument("--seed", type=int, default=None, help="Root seed (run.seed)")
        sub.add_argument("--levels", default=None, help="Levels, e.g. 4..12 or 4,6,8 (grid.levels)")
        sub.add_argument("--paths", type=int, default=None, help="Number of paths (run.n_paths)")
        sub.add_argument("--epsilon", type=float, default=None, help="Tail probability (run.epsilon)")
        sub.add_argument("--out", default=None, help="Output directory (output.directory)")
        sub.add_argument("--format", choices=["csv", "json"], default=None, help="Output format (output.format)")
        sub.add_argument("--workers", type=int, default=None, help="Worker threads (run.workers)")
    return parser


def cli(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    logging.getLogger().setLevel(args.log_level.upper())
    if args.command is None:
        parser.print_help()
        return CONFIG_ERROR
    try:
        overrides = parse_overrides(extra)
    except ValueError as e:
        parser.error(str(e))
    for key in ("seed", "levels", "paths", "epsilon", "out", "format", "workers"):
        overrides[key] = getattr(args, key)
    return main(args.command, args.config, overrides)


if __name__ == "__main__":
    sys.exit(cli())
