"""
Commands over a single program: parse, normalize, typecheck.
"""
import click

from app.controllers.program_controller import ProgramController
from app.views.common import PROGRAM, config_from, output_options, respond


@click.command("parse")
@click.argument("path", type=PROGRAM)
@output_options("text")
def parse_command(path: str, output_format: str, out: str):
    """Validate PATH and pretty-print it."""
    respond(ProgramController.parse(path, config_from(format=output_format, out=out)))


@click.command("normalize")
@click.argument("path", type=PROGRAM)
@output_options("text", "json")
def normalize_command(path: str, output_format: str, out: str):
    """Print the normal form of PATH."""
    respond(ProgramController.normalize(path, config_from(format=output_format, out=out)))


@click.command("typecheck")
@click.argument("path", type=PROGRAM)
@output_options("text", "json")
def typecheck_command(path: str, output_format: str, out: str):
    """Type check PATH; exit 1 when ill-typed."""
    respond(ProgramController.typecheck(path, config_from(format=output_format, out=out)))


COMMANDS = [parse_command, normalize_command, typecheck_command]
