"""
Generators (`gen hierarchy`, `gen electoral`) and `schema`.
"""
import click

from app.controllers.protocol_controller import ProtocolController
from app.models.cli_model import SCHEMAS
from app.views.common import config_from, output_options, respond


@click.group("gen")
def gen_group():
    """Generate protocol programs."""


@gen_group.command("hierarchy")
@click.option("--depth", type=int, default=0, show_default=True)
@click.option("--branching", type=str, default="2", show_default=True,
              help="Comma-separated fan-outs, root level first.")
@click.option("--rounds", type=click.Choice(["once", "repeat"]), default="once",
              show_default=True)
@click.option("--selection", default="min", show_default=True)
@click.option("--leaf-body", type=click.Choice(["inert", "echo"]), default="inert",
              show_default=True)
@click.option("--bound", type=int, default=None, help="Bound of internal channels.")
@click.option("--contributions", type=click.Choice(["fresh", "indexed"]), default="fresh",
              show_default=True)
@click.option("--flat", is_flag=True, help="Emit the flattening instead.")
@click.option("--hub", default="l0", show_default=True, help="Location of the root or hub.")
@output_options("text")
def hierarchy_command(depth: int, branching: str, rounds: str, selection: str,
                      leaf_body: str, bound: int, contributions: str, flat: bool, hub: str,
                      output_format: str, out: str):
    """Hierarchical aggregation protocol."""
    try:
        fanouts = [int(item) for item in branching.split(",") if item.strip()]
    except ValueError as exc:
        raise click.BadParameter("expected comma-separated integers",
                                 param_hint="--branching") from exc
    fields = {"depth": depth, "branching": fanouts, "rounds": rounds, "selection": selection,
              "leaf_body": leaf_body, "bound": bound, "contributions": contributions}
    respond(ProtocolController.hierarchy(fields, flat, hub,
                                         config_from(format=output_format, out=out)))


@gen_group.command("electoral")
@click.option("--n", "participants", type=int, required=True, help="Participants.")
@click.option("--rounds-k", "rounds", type=int, default=1, show_default=True,
              help="Collections before announcing.")
@click.option("--shape", type=click.Choice(["choice", "sequential"]), default="choice",
              show_default=True, help="Participant shape.")
@click.option("--repeat", is_flag=True, help="Restart participants after the announcement.")
@output_options("text")
def electoral_command(participants: int, rounds: int, shape: str, repeat: bool,
                      output_format: str, out: str):
    """Electoral system over a shared collection channel."""
    fields = {"participants": participants, "rounds": rounds, "shape": shape, "repeat": repeat}
    respond(ProtocolController.electoral(fields, config_from(format=output_format, out=out)))


@click.command("schema")
@click.argument("name", type=click.Choice(sorted(SCHEMAS)))
def schema_command(name: str):
    """Print the JSON schema of an exported document."""
    respond(ProtocolController.schema(name, config_from()))


COMMANDS = [gen_group, schema_command]
