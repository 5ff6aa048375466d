"""
Shared plumbing of the controllers: error mapping and output placement.
"""
# pylint: disable=W0718
import json
from pathlib import Path
from typing import Callable

from app.models.cli_model import CliConfig, CommandResult
from app.utils.errors import BBCError
from app.utils.logger import get_logger, log_error, log_info

logger = get_logger(__name__)


def guarded(command: str, action: Callable[[], CommandResult]) -> CommandResult:
    """Run `action`, mapping toolkit errors to their exit codes.

    Unexpected exceptions are logged and reported with exit code 2.
    """
    try:
        result = action()
        log_info(logger, f"Command {command} finished", {"exit_code": result.exit_code})
        return result
    except BBCError as exc:
        log_error(logger, f"Command {command} failed", exc.to_dict())
        return CommandResult(exit_code=exc.exit_code, errors=[f"error: {exc}"])
    except Exception as exc:
        log_error(logger, f"Unexpected error in {command}", {"error": str(exc)})
        return CommandResult(exit_code=2, errors=[f"internal error: {exc}"])


def emit(config: CliConfig, text: str, exit_code: int = 0) -> CommandResult:
    """Send machine output to `--out` when given, otherwise to the output stream."""
    if config.out:
        Path(config.out).write_text(text if text.endswith("\n") else text + "\n",
                                    encoding="utf-8")
        return CommandResult(exit_code=exit_code, errors=[f"wrote {config.out}"])
    return CommandResult(exit_code=exit_code, output=text)


def dump_json(payload) -> str:
    """Deterministic JSON of a pydantic model or plain data."""
    if hasattr(payload, "model_dump"):
        payload = payload.model_dump(mode="json")
    return json.dumps(payload, indent=2, sort_keys=True)
