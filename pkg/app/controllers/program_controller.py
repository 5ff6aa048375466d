"""
Program controller: parsing, normalization and type checking of .bbc files.
"""
from app.controllers.base_controller import dump_json, emit, guarded
from app.models.cli_model import CliConfig, CommandResult
from app.services.congruence_service import normalize
from app.services.export_service import format_state, normal_form_export, type_report_export
from app.services.parser_service import load_program, pretty_print
from app.services.typesys_service import typecheck_program


class ProgramController:
    """Commands that inspect a single program without executing it."""

    @staticmethod
    def parse(path: str, config: CliConfig) -> CommandResult:
        """Validate a program and print it back in canonical layout."""
        def action() -> CommandResult:
            return emit(config, pretty_print(load_program(path)))
        return guarded("parse", action)

    @staticmethod
    def normalize(path: str, config: CliConfig) -> CommandResult:
        """Print the normal form of the program's network."""
        def action() -> CommandResult:
            nf = normalize(load_program(path).network)
            if config.output_format == "json":
                return emit(config, dump_json(normal_form_export(nf)))
            return emit(config, format_state(nf))
        return guarded("normalize", action)

    @staticmethod
    def typecheck(path: str, config: CliConfig) -> CommandResult:
        """Type check under the natural environment; exit 1 on a type error.

        Args:
            path: Program file.
            config: Invocation flags; `--format json` prints the report.

        Returns:
            CommandResult with the report on the output stream and the error,
            if any, on the diagnostic stream.
        """
        def action() -> CommandResult:
            report = typecheck_program(load_program(path))
            exit_code = 0 if report.ok else 1
            if config.output_format == "json":
                result = emit(config, dump_json(type_report_export(report)), exit_code)
            else:
                result = emit(config, "ok" if report.ok else "ill-typed", exit_code)
            if not report.ok:
                result.errors.append(f"type error: {report.network_error}")
            return result
        return guarded("typecheck", action)
