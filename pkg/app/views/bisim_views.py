"""
The bisim command.
"""
import click

from app.controllers.bisim_controller import BisimController
from app.views.common import PROGRAM, config_from, limit_options, output_options, respond


@click.command("bisim")
@click.argument("first", type=PROGRAM)
@click.argument("second", type=PROGRAM)
@click.option("--barb-mode", type=click.Choice(["strict", "weak"]), default=None,
              help="Compare immediate or reachable barbs (BBC_BARB_MODE).")
@click.option("--trace-out", type=click.Path(dir_okay=False), default=None,
              help="Write a replayable distinguishing trace (JSON).")
@limit_options
@output_options("text", "json")
def bisim_command(first: str, second: str, barb_mode: str, trace_out: str, max_states: int,
                  unfold_budget: int, max_steps: int, output_format: str, out: str):
    """Decide weak barbed bisimilarity of FIRST and SECOND.

    Exit 0 Bisimilar, 1 Distinguished, 3 Inconclusive.
    """
    config = config_from(barb_mode=barb_mode, trace_out=trace_out, max_states=max_states,
                         unfold_budget=unfold_budget, max_steps=max_steps,
                         format=output_format, out=out)
    respond(BisimController.compare(first, second, config))


COMMANDS = [bisim_command]
