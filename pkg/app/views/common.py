"""
Options shared by the commands and the bridge from CommandResult to the terminal.
"""
from typing import Callable

import click
from pydantic import ValidationError

from app.models.cli_model import CliConfig, CommandResult

PROGRAM = click.Path(exists=True, dir_okay=False)


def config_from(**flags) -> CliConfig:
    """Merge flags over settings; invalid combinations are usage errors."""
    try:
        return CliConfig.from_flags(**flags)
    except ValidationError as exc:
        raise click.UsageError(exc.errors()[0]["msg"]) from exc


def respond(result: CommandResult) -> None:
    """Print both streams and exit with the result's code."""
    if result.output:
        click.echo(result.output)
    for line in result.errors:
        click.echo(line, err=True)
    click.get_current_context().exit(result.exit_code)


def mode_option(func: Callable) -> Callable:
    """--mode default|exhaustive"""
    return click.option("--mode", type=click.Choice(["default", "exhaustive"]), default=None,
                        help="Successor enumeration mode (BBC_DEFAULT_MODE).")(func)


def limit_options(func: Callable) -> Callable:
    """--max-states, --unfold-budget, --max-steps"""
    func = click.option("--max-steps", type=click.IntRange(min=1), default=None,
                        help="Step limit of runs (BBC_MAX_STEPS).")(func)
    func = click.option("--unfold-budget", type=click.IntRange(min=1), default=None,
                        help="Agent unfoldings per prefix (BBC_UNFOLD_BUDGET).")(func)
    return click.option("--max-states", type=click.IntRange(min=1), default=None,
                        help="State limit of explorations (BBC_MAX_STATES).")(func)


def output_options(*formats: str) -> Callable[[Callable], Callable]:
    """--format among `formats` and --out."""
    def decorate(func: Callable) -> Callable:
        func = click.option("--out", type=click.Path(dir_okay=False), default=None,
                            help="Write the output to this file.")(func)
        return click.option("--format", "output_format", type=click.Choice(list(formats)),
                            default="text", show_default=True)(func)
    return decorate
