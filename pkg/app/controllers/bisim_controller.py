"""
Bisimulation controller: compares two programs and exports distinguishing traces.
"""
from pathlib import Path

from app.controllers.base_controller import dump_json, emit, guarded
from app.models.bisim_model import Bisimilar, Distinguished, Inconclusive
from app.models.cli_model import CliConfig, CommandResult
from app.services.bisim_service import weak_barbed_bisim
from app.services.export_service import format_label, format_state, verdict_export
from app.services.parser_service import load_program

EXIT_CODES = {Bisimilar: 0, Distinguished: 1, Inconclusive: 3}


class BisimController:
    """Weak barbed bisimilarity between two program files."""

    @staticmethod
    def compare(first: str, second: str, config: CliConfig) -> CommandResult:
        """Decide bisimilarity: exit 0 Bisimilar, 1 Distinguished, 3 Inconclusive."""
        def action() -> CommandResult:
            verdict = weak_barbed_bisim(load_program(first), load_program(second),
                                        config.limits(), config.barb_mode)
            exported = verdict_export(verdict, config.barb_mode)
            exit_code = EXIT_CODES[type(verdict)]
            if isinstance(verdict, Distinguished) and config.trace_out:
                Path(config.trace_out).write_text(dump_json(exported) + "\n", encoding="utf-8")
            if config.output_format == "json":
                return emit(config, dump_json(exported), exit_code)
            lines = [verdict.verdict]
            if isinstance(verdict, Distinguished):
                lines[0] += f": {verdict.reason} (side {verdict.side})"
                if verdict.unmatched:
                    lines.append("unmatched barbs: " + ", ".join(
                        exported.unmatched_barbs))
                lines.append(f"  {format_state(verdict.states[0])}")
                for label, state in zip(verdict.labels, verdict.states[1:]):
                    lines.append(f"  {format_label(label)}")
                    lines.append(f"    => {format_state(state)}")
            elif isinstance(verdict, Inconclusive):
                lines[0] += f": {verdict.reason}"
            return emit(config, "\n".join(lines), exit_code)
        return guarded("bisim", action)
