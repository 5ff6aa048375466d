"""
Protocol controller: generators and JSON schemas.
"""
import json
from typing import Any, Dict

from app.controllers.base_controller import emit, guarded
from app.models.cli_model import SCHEMAS, CliConfig, CommandResult
from app.services.parser_service import pretty_print
from app.services.protocol_service import (
    electoral_spec, flatten, gen_electoral, gen_hierarchical, hierarchy_spec,
)
from app.utils.errors import BBCError


class ProtocolController:
    """Commands emitting generated programs and document schemas."""

    @staticmethod
    def hierarchy(fields: Dict[str, Any], flat: bool, hub: str,
                  config: CliConfig) -> CommandResult:
        """Emit the aggregation tree, or its flattening at `hub` when `flat` is set."""
        def action() -> CommandResult:
            spec = hierarchy_spec(**fields)
            program = flatten(spec, hub) if flat else gen_hierarchical(spec, root=hub)
            return emit(config, pretty_print(program))
        return guarded("gen hierarchy", action)

    @staticmethod
    def electoral(fields: Dict[str, Any], config: CliConfig) -> CommandResult:
        """Emit the electoral system described by `fields`."""
        def action() -> CommandResult:
            spec = electoral_spec(**fields)
            return emit(config, pretty_print(gen_electoral(spec)))
        return guarded("gen electoral", action)

    @staticmethod
    def schema(name: str, config: CliConfig) -> CommandResult:
        """JSON schema of an exported document."""
        def action() -> CommandResult:
            model = SCHEMAS.get(name)
            if model is None:
                raise BBCError(f"unknown schema `{name}`; choose from "
                               f"{', '.join(sorted(SCHEMAS))}")
            return emit(config, json.dumps(model.model_json_schema(), indent=2,
                                           sort_keys=True))
        return guarded("schema", action)
