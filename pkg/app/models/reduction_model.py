"""
Reduction labels, exploration limits, traces and state graphs.
"""
# pylint: disable=R0903
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple, Union

from app.config.settings import settings
from app.models.ast_model import Message, MultisetLit, Program, message_key, name_key
from app.models.normal_form_model import NormalForm


class Mode(str, Enum):
    """Successor enumeration mode."""

    DEFAULT = "default"
    EXHAUSTIVE = "exhaustive"


@dataclass(frozen=True)
class BroadLabel:
    """Broadcast from `sender` to the delivered `receivers`."""

    channel: str
    sender: str
    receivers: Tuple[str, ...]
    message: Message

    rule = "Broad"

    def __post_init__(self):
        if not self.receivers:
            raise ValueError("a broadcast delivers to at least one location")


@dataclass(frozen=True)
class LocalLabel:
    """Communication inside one location."""

    channel: str
    location: str
    message: Message

    rule = "Local"


@dataclass(frozen=True)
class CollLabel:
    """Collection at `receiver` from `senders`."""

    channel: str
    receiver: str
    senders: Tuple[str, ...]
    messages: MultisetLit

    rule = "Coll"

    def __post_init__(self):
        if not self.senders:
            raise ValueError("a collection takes at least one sender")


RuleLabel = Union[BroadLabel, LocalLabel, CollLabel]


def label_key(label: RuleLabel) -> tuple:
    """Deterministic order on labels."""
    if isinstance(label, BroadLabel):
        return (0, name_key(label.channel), name_key(label.sender),
                tuple(name_key(loc) for loc in label.receivers), message_key(label.message))
    if isinstance(label, LocalLabel):
        return (1, name_key(label.channel), name_key(label.location), (),
                message_key(label.message))
    return (2, name_key(label.channel), name_key(label.receiver),
            tuple(name_key(loc) for loc in label.senders), message_key(label.messages))


def label_locations(label: RuleLabel) -> Tuple[str, ...]:
    """Every location taking part in the step."""
    if isinstance(label, BroadLabel):
        return (label.sender,) + label.receivers
    if isinstance(label, LocalLabel):
        return (label.location,)
    return (label.receiver,) + label.senders


@dataclass(frozen=True)
class Limits:
    """Exploration limits; defaults come from the BBC_* settings."""

    max_states: int = field(default_factory=lambda: settings.max_states)
    unfold_budget: int = field(default_factory=lambda: settings.unfold_budget)
    max_steps: int = field(default_factory=lambda: settings.max_steps)

    def __post_init__(self):
        if min(self.max_states, self.unfold_budget, self.max_steps) < 1:
            raise ValueError("limits must be positive")


@dataclass(frozen=True)
class Trace:
    """A run: the initial state and the (label, state) steps taken."""

    initial: NormalForm
    steps: Tuple[Tuple[RuleLabel, NormalForm], ...]
    seed: int
    stuck: bool

    @property
    def final(self) -> NormalForm:
        """Last state reached."""
        return self.steps[-1][1] if self.steps else self.initial


@dataclass(frozen=True)
class StateGraph:
    """Reachable fragment of the reduction relation over canonical normal forms."""

    states: Tuple[NormalForm, ...]
    edges: Tuple[Tuple[int, RuleLabel, int], ...]
    initial: int
    truncated: bool
    limits: Limits
    mode: Mode
    program: Optional[Program] = None

    def successors(self, index: int) -> List[Tuple[RuleLabel, int]]:
        """Outgoing (label, target) pairs of a state."""
        return [(label, target) for source, label, target in self.edges if source == index]

    def adjacency(self) -> Dict[int, List[int]]:
        """Targets per source state."""
        table: Dict[int, List[int]] = {index: [] for index in range(len(self.states))}
        for source, _, target in self.edges:
            table[source].append(target)
        return table

    def maximal_states(self) -> List[int]:
        """States without outgoing edges."""
        table = self.adjacency()
        return [index for index, targets in table.items() if not targets]
