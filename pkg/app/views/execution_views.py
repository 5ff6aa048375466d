"""
Commands that execute a program: step, run, states.
"""
import click

from app.controllers.execution_controller import ExecutionController
from app.views.common import (
    PROGRAM, config_from, limit_options, mode_option, output_options, respond,
)


@click.command("step")
@click.argument("path", type=PROGRAM)
@mode_option
@limit_options
@output_options("text", "json")
def step_command(path: str, mode: str, max_states: int, unfold_budget: int, max_steps: int,
                 output_format: str, out: str):
    """List the successors of the initial state of PATH."""
    config = config_from(mode=mode, max_states=max_states, unfold_budget=unfold_budget,
                         max_steps=max_steps, format=output_format, out=out)
    respond(ExecutionController.step(path, config))


@click.command("run")
@click.argument("path", type=PROGRAM)
@click.option("--seed", type=int, default=0, show_default=True, help="Random seed.")
@mode_option
@limit_options
@output_options("text", "json")
def run_command(path: str, seed: int, mode: str, max_states: int, unfold_budget: int,
                max_steps: int, output_format: str, out: str):
    """Run PATH with seeded random choices."""
    config = config_from(seed=seed, mode=mode, max_states=max_states,
                         unfold_budget=unfold_budget, max_steps=max_steps,
                         format=output_format, out=out)
    respond(ExecutionController.run(path, config))


@click.command("states")
@click.argument("path", type=PROGRAM)
@mode_option
@limit_options
@output_options("text", "json", "dot")
def states_command(path: str, mode: str, max_states: int, unfold_budget: int, max_steps: int,
                   output_format: str, out: str):
    """Explore the state graph of PATH."""
    config = config_from(mode=mode, max_states=max_states, unfold_budget=unfold_budget,
                         max_steps=max_steps, format=output_format, out=out)
    respond(ExecutionController.states(path, config))


COMMANDS = [step_command, run_command, states_command]
