"""
Bergman Tent - numerical checks of tent-space, maximal-function and g-function
characterizations of weighted Bergman spaces on the unit ball of C^n.
"""

import json
import logging
import tomllib
from pathlib import Path
from typing import Any, Dict, List, Sequence

from pydantic import BaseModel, Field, ValidationError
from pydantic_settings import BaseSettings, CliSubCommand, SettingsConfigDict, SettingsError, get_subcommand

from .experiments import EXPERIMENTS, run_experiment, write_report
from .experiments.model import ExperimentConfig
from .oracles import render_table
from .utils import BergmanToolkitError, ConfigError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VERDICT_FAILED = 2


###################################
# Settings
###################################


class RunCommand(BaseModel, use_attribute_docstrings=True):
    """Run experiments and write <name>.csv and <name>.summary.txt"""

    experiment: List[str] = []
    """Experiments to run; every table of the config file when omitted"""
    config: Path | None = None
    """TOML file with one table per experiment and an optional [defaults] table"""
    out: Path = Path("out")
    """Directory the reports are written to"""
    seed: int | None = None
    """Seed for every random rule; overrides the config, 42 when unset everywhere"""
    override: List[str] = []
    """key=value patches applied to each selected experiment, values parsed as TOML"""


class ValidateCommand(BaseModel, use_attribute_docstrings=True):
    """Check every grid cell against the preconditions without running numerics"""

    experiment: List[str] = []
    """Experiments to check; every table of the config file when omitted"""
    config: Path | None = None
    """TOML file with one table per experiment and an optional [defaults] table"""
    seed: int | None = None
    """Seed written into the validated configuration"""
    override: List[str] = []
    """key=value patches applied to each selected experiment, values parsed as TOML"""


class ListCommand(BaseModel):
    """List experiments with their configuration keys and defaults"""


class OracleCommand(BaseModel):
    """Print the analytic oracle values used by the test suite"""


class Settings(BaseSettings, use_attribute_docstrings=True):
    """Bergman Tent command line."""

    model_config = SettingsConfigDict(
        env_prefix="BERGMAN_TENT_",
        cli_parse_args=True,
        cli_implicit_flags=True,
        cli_kebab_case=True,
        cli_hide_none_type=True,
        cli_avoid_json=True,
        cli_exit_on_error=False,
        cli_prog_name="bergman-tent",
    )

    run: CliSubCommand[RunCommand] = None
    validate_: CliSubCommand[ValidateCommand] = Field(default=None, alias="validate")
    list_: CliSubCommand[ListCommand] = Field(default=None, alias="list")
    oracle: CliSubCommand[OracleCommand] = None

    debug: bool = False
    """Enable verbose debug logging"""
    workers: int = Field(default=1, ge=1)
    """Worker threads running grid cells concurrently"""


###################################
# Experiment configuration
###################################


def _merge(base: Dict[str, Any], patch: Dict[str, Any]) -> Dict[str, Any]:
    out = dict(base)
    for key, value in patch.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def parse_override(text: str) -> Dict[str, Any]:
    """Parse `key=value` with a TOML value; dotted keys address nested tables."""
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"Override {text!r} is not of the form key=value")
    try:
        return tomllib.loads(f"{key.strip()} = {value.strip()}")
    except tomllib.TOMLDecodeError:
        # bare words are taken as strings
        return tomllib.loads(f"{key.strip()} = {json.dumps(value.strip())}")


def _read_config_file(path: Path | None) -> Dict[str, Any]:
    if path is None:
        return {}
    try:
        with path.open("rb") as f:
            return tomllib.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"Config file {path} does not exist") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e


def _nested_defaults(config_type: type[ExperimentConfig]) -> Dict[str, Any]:
    # partial nested tables patch the default model instead of replacing it
    return {
        key: field.default.model_dump()
        for key, field in config_type.model_fields.items()
        if isinstance(field.default, BaseModel)
    }


def _validation_message(name: str, config_type: type[ExperimentConfig], error: ValidationError) -> str:
    lines = [f"Invalid configuration for {name}:"]
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<table>"
        lines.append(f"  {location}: {item['msg']}")
    lines.append(f"Valid keys: {', '.join(config_type.model_fields)}")
    return "\n".join(lines)


def load_configs(
    path: Path | None,
    names: Sequence[str],
    overrides: Sequence[str] = (),
    seed: int | None = None,
) -> Dict[str, ExperimentConfig]:
    """
    Build the validated configuration of every selected experiment.

    Each table starts from the [defaults] keys the experiment accepts, then
    the experiment's own table, then the overrides; the CLI seed wins over
    both files.
    """
    raw = _read_config_file(path)
    defaults = raw.get("defaults", {})
    tables = {key: value for key, value in raw.items() if key != "defaults"}
    unknown = [key for key in tables if key not in EXPERIMENTS]
    if unknown:
        raise ConfigError(f"Unknown experiment tables {unknown}; valid names: {', '.join(EXPERIMENTS)}")

    selected = list(names) or list(tables)
    if not selected:
        raise ConfigError(f"No experiment selected; valid names: {', '.join(EXPERIMENTS)}")
    known = sorted({key for experiment in EXPERIMENTS.values() for key in experiment.config_type.model_fields})
    stray = [key for key in defaults if key not in known]
    if stray:
        raise ConfigError(f"Unknown keys {stray} in [defaults]; valid keys: {', '.join(known)}")
    patches = [parse_override(text) for text in overrides]

    configs = {}
    for name in selected:
        if name not in EXPERIMENTS:
            raise ConfigError(f"Unknown experiment {name!r}; valid names: {', '.join(EXPERIMENTS)}")
        config_type = EXPERIMENTS[name].config_type
        table = _nested_defaults(config_type)
        table = _merge(table, {key: value for key, value in defaults.items() if key in config_type.model_fields})
        table = _merge(table, tables.get(name, {}))
        for patch in patches:
            table = _merge(table, patch)
        if seed is not None:
            table["seed"] = seed
        try:
            configs[name] = config_type.model_validate(table)
        except ValidationError as e:
            raise ConfigError(_validation_message(name, config_type, e)) from e
    return configs


###################################
# Subcommands
###################################


def run(command: RunCommand, workers: int) -> int:
    configs = load_configs(command.config, command.experiment, command.override, command.seed)
    violations = [(name, violation) for name, config in configs.items() for violation in config.violations()]
    for name, violation in violations:
        logger.error(f"{name}: {violation}")
    if violations:
        return EXIT_ERROR
    status = EXIT_OK
    for name, config in configs.items():
        report = run_experiment(name, config, workers)
        write_report(report, command.out)
        if not report.passed:
            failed = [v.name for v in report.verdicts if not v.passed]
            logger.info(f"{name}: {len(failed)} verdicts failed")
            status = EXIT_VERDICT_FAILED
    return status


def validate(command: ValidateCommand) -> int:
    configs = load_configs(command.config, command.experiment, command.override, command.seed)
    status = EXIT_OK
    for name, config in configs.items():
        cells = config.cells()
        if not cells:
            print(f"{name}: no cells")
            status = EXIT_ERROR
            continue
        violations = config.violations()
        for violation in violations:
            print(f"{name}: {violation}")
        if violations:
            status = EXIT_ERROR
        else:
            print(f"{name}: {len(cells)} cells ok")
    return status


def list_experiments() -> int:
    for name, experiment in EXPERIMENTS.items():
        config_type = experiment.config_type
        print(f"{name}: {config_type.__doc__}")
        for key, field in config_type.model_fields.items():
            print(f"  {key} = {field.get_default(call_default_factory=True)!r}  # {field.description or ''}")
    return EXIT_OK


def oracle() -> int:
    print(render_table())
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    """
    Main application entrypoint

    Parses command line arguments, sets up logging and dispatches to the subcommand.
    Returns 0 when every verdict passes, 2 when some verdict fails and 1 on errors.
    """
    try:
        settings = Settings(_cli_parse_args=list(argv) if argv is not None else True)
        command = get_subcommand(settings)
    except (SettingsError, ValidationError) as e:
        logging.basicConfig(format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")
        logger.error(f"Invalid command line: {e}")
        return EXIT_ERROR

    logging.basicConfig(
        level=logging.DEBUG if settings.debug else logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )

    try:
        match command:
            case RunCommand():
                return run(command, settings.workers)
            case ValidateCommand():
                return validate(command)
            case ListCommand():
                return list_experiments()
            case OracleCommand():
                return oracle()
    except ConfigError as e:
        logger.error(str(e))
        return EXIT_ERROR
    except BergmanToolkitError as e:
        logger.error(f"Experiment failed: {e}")
        return EXIT_ERROR
    except KeyboardInterrupt:
        return EXIT_ERROR
    return EXIT_ERROR
