"""
Command-line entry point: the `bbc` group with every command registered.
"""
from typing import Optional, Sequence

import click

from app.config.settings import settings
from app.utils.logger import get_logger, log_debug
from app.views import bisim_views, execution_views, program_views, protocol_views

logger = get_logger(__name__)


@click.group(name="bbc", help=f"{settings.app_name}: parse, execute and compare "
                              "broadcast/collection networks.")
@click.version_option(settings.app_version, prog_name=settings.app_name)
def cli():
    """Root command group."""


for module in (program_views, execution_views, bisim_views, protocol_views):
    for command in module.COMMANDS:
        cli.add_command(command)


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """Run one invocation and return its exit code."""
    log_debug(logger, "Dispatching", {"argv": list(argv) if argv is not None else None})
    try:
        cli.main(args=list(argv) if argv is not None else None, prog_name="bbc",
                 standalone_mode=True)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else (0 if exc.code is None else 2)
    return 0


def main() -> None:
    """Console script."""
    raise SystemExit(dispatch())


if __name__ == "__main__":
    main()
