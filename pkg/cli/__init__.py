"""Scenario configuration, result files and the subcommands behind main.py."""

try:
    from .config import ScenarioConfig, load_config, parse_levels, parse_overrides
    from .reporting import read_ensemble, write_ensemble
    from .commands import COMMANDS, CONFIG_ERROR, FAILURE, SUCCESS, run_command
except ImportError:
    from config import ScenarioConfig, load_config, parse_levels, parse_overrides
    from reporting import read_ensemble, write_ensemble
    from commands import COMMANDS, CONFIG_ERROR, FAILURE, SUCCESS, run_command

__all__ = [
    "ScenarioConfig", "load_config", "parse_levels", "parse_overrides",
    "read_ensemble", "write_ensemble",
    "COMMANDS", "run_command", "SUCCESS", "FAILURE", "CONFIG_ERROR",
]
