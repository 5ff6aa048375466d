"""
Command configuration, command results and the JSON documents the CLI emits.

Models:
- `CliConfig` : flags of one invocation merged over the BBC_* settings
- `CommandResult` : exit code plus output and diagnostic streams
- `LabelExport`, `StepExport`, `NormalFormExport` : building blocks
- `StateGraphExport`, `TraceExport`, `VerdictExport`, `TypeReportExport` : documents
"""
# pylint: disable=R0903
from __future__ import annotations

from typing import Dict, List, Literal, Optional, Type

from pydantic import BaseModel, ConfigDict, Field

from app.config.settings import settings
from app.models.reduction_model import Limits


class CliConfig(BaseModel):
    """Flags of one invocation; unset values fall back to the settings."""

    mode: Literal["default", "exhaustive"] = Field(default_factory=lambda: settings.default_mode)
    max_states: int = Field(default_factory=lambda: settings.max_states, gt=0)
    unfold_budget: int = Field(default_factory=lambda: settings.unfold_budget, gt=0)
    max_steps: int = Field(default_factory=lambda: settings.max_steps, gt=0)
    seed: int = Field(default=0, description="Seed of random runs")
    barb_mode: Literal["strict", "weak"] = Field(default_factory=lambda: settings.barb_mode)
    output_format: Literal["text", "json", "dot"] = Field(default="text", alias="format")
    out: Optional[str] = Field(default=None, description="Write machine output to this file")
    trace_out: Optional[str] = Field(default=None, description="Distinguishing trace file")

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    @classmethod
    def from_flags(cls, **flags) -> "CliConfig":
        """Config from command-line flags, dropping the ones left unset."""
        return cls(**{key: value for key, value in flags.items() if value is not None})

    def limits(self) -> Limits:
        """Exploration limits of this invocation."""
        return Limits(self.max_states, self.unfold_budget, self.max_steps)


class CommandResult(BaseModel):
    """What a controller hands back to the view: exit code and both streams."""

    exit_code: int = 0
    output: str = ""
    errors: List[str] = Field(default_factory=list)


class LabelExport(BaseModel):
    """A rule label."""

    rule: Literal["Broad", "Local", "Coll"]
    channel: str
    location: str = Field(..., description="Sender (Broad, Local) or receiver (Coll)")
    peers: List[str] = Field(default_factory=list,
                             description="Receivers (Broad) or senders (Coll)")
    message: str
    text: str


class RestrictionExport(BaseModel):
    """A restricted name with its bound and optional type."""

    name: str
    bound: str
    type: Optional[str] = None


class LocatedExport(BaseModel):
    """One located process of a normal form."""

    location: str
    process: str


class NormalFormExport(BaseModel):
    """A normal form broken into its three components."""

    restrictions: List[RestrictionExport]
    connectivity: List[List[str]]
    located: List[LocatedExport]
    text: str


class StepExport(BaseModel):
    """A step of a trace: the label fired and the state reached."""

    label: LabelExport
    state: NormalFormExport


class EdgeExport(BaseModel):
    """An edge of a state graph."""

    source: int
    target: int
    label: LabelExport


class StateGraphExport(BaseModel):
    """The explored state graph."""

    initial: int
    mode: Literal["default", "exhaustive"]
    truncated: bool
    limits: Dict[str, int]
    states: List[NormalFormExport]
    edges: List[EdgeExport]


class TraceExport(BaseModel):
    """A seeded run."""

    seed: int
    stuck: bool
    initial: NormalFormExport
    steps: List[StepExport]


class VerdictExport(BaseModel):
    """A bisimulation verdict; the trace replays the distinguishing side from its start."""

    verdict: Literal["Bisimilar", "Distinguished", "Inconclusive"]
    barb_mode: Literal["strict", "weak"]
    reason: Optional[str] = None
    side: Optional[int] = None
    unmatched_barbs: List[str] = Field(default_factory=list)
    initial: Optional[NormalFormExport] = None
    trace: List[StepExport] = Field(default_factory=list)
    witness_size: Optional[int] = None


class TypeReportExport(BaseModel):
    """Outcome of type checking."""

    ok: bool
    error: Optional[str] = None
    agent_errors: Dict[str, str] = Field(default_factory=dict)
    unchecked_agents: List[str] = Field(default_factory=list)


SCHEMAS: Dict[str, Type[BaseModel]] = {
    "states": StateGraphExport,
    "trace": TraceExport,
    "verdict": VerdictExport,
    "normal-form": NormalFormExport,
    "typecheck": TypeReportExport,
}
