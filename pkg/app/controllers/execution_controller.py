"""
Execution controller: successors, seeded runs and state-graph exploration.
"""
from app.controllers.base_controller import dump_json, emit, guarded
from app.models.cli_model import CliConfig, CommandResult
from app.models.reduction_model import Mode
from app.services.export_service import (
    format_label, format_state, label_export, normal_form_export, state_graph_dot,
    state_graph_export, trace_export,
)
from app.services.parser_service import load_program
from app.services.reduction_service import initial_state, run, state_graph, successors
from app.utils.logger import get_logger, log_warning

logger = get_logger(__name__)


class ExecutionController:
    """Commands that reduce a program."""

    @staticmethod
    def step(path: str, config: CliConfig) -> CommandResult:
        """List the successors of the initial state with their rule labels."""
        def action() -> CommandResult:
            program = load_program(path)
            moves = successors(initial_state(program), program, Mode(config.mode),
                               config.unfold_budget)
            if config.output_format == "json":
                return emit(config, dump_json([
                    {"label": label_export(label).model_dump(mode="json"),
                     "state": normal_form_export(state).model_dump(mode="json")}
                    for label, state in moves]))
            lines = [f"{len(moves)} successor(s)"]
            for label, state in moves:
                lines.append(format_label(label))
                lines.append(f"    => {format_state(state)}")
            return emit(config, "\n".join(lines))
        return guarded("step", action)

    @staticmethod
    def run(path: str, config: CliConfig) -> CommandResult:
        """Seeded random execution."""
        def action() -> CommandResult:
            trace = run(load_program(path), config.seed, config.max_steps, Mode(config.mode),
                        config.unfold_budget)
            if config.output_format == "json":
                return emit(config, dump_json(trace_export(trace)))
            lines = [f"seed {trace.seed}: {format_state(trace.initial)}"]
            for number, (label, _) in enumerate(trace.steps, start=1):
                lines.append(f"{number}. {format_label(label)}")
            ending = "stuck" if trace.stuck else "step limit reached"
            lines.append(f"{ending} after {len(trace.steps)} step(s): "
                         f"{format_state(trace.final)}")
            return emit(config, "\n".join(lines))
        return guarded("run", action)

    @staticmethod
    def states(path: str, config: CliConfig) -> CommandResult:
        """Explore the state graph and print it as text, JSON or DOT."""
        def action() -> CommandResult:
            graph = state_graph(load_program(path), config.limits(), Mode(config.mode))
            if config.output_format == "json":
                result = emit(config, dump_json(state_graph_export(graph)))
            elif config.output_format == "dot":
                result = emit(config, state_graph_dot(graph))
            else:
                lines = [f"states: {len(graph.states)}  edges: {len(graph.edges)}  "
                         f"truncated: {str(graph.truncated).lower()}"]
                lines += [f"[{index}] {format_state(state)}"
                          for index, state in enumerate(graph.states)]
                lines += [f"{source} -> {target}: {format_label(label)}"
                          for source, label, target in graph.edges]
                result = emit(config, "\n".join(lines))
            if graph.truncated:
                log_warning(logger, "Exploration truncated", {"states": len(graph.states)})
                result.errors.append("warning: state graph truncated by the limits")
            return result
        return guarded("states", action)
