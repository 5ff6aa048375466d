"""
Abstract syntax of BBC programs.

Messages, patterns, processes, networks and programs are frozen dataclasses,
so every value is hashable and safe to share. Multiset literals keep their
elements sorted by `message_key`, which makes equality order-insensitive
while preserving multiplicity.
"""
# pylint: disable=R0903,C0103
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, Optional, Tuple, Union

from app.models.type_model import Type


def name_key(name: str) -> tuple:
    """Order on names: numeric identifiers first (numerically), then lexicographic."""
    if name.isdigit():
        return (0, int(name), name)
    return (1, 0, name)


@dataclass(frozen=True)
class Var:
    """A first-order name occurrence."""

    name: str


@dataclass(frozen=True)
class SetVar:
    """A set variable, bound by a collection input."""

    name: str


@dataclass(frozen=True)
class TupleMsg:
    """Tuple of at least two messages."""

    items: Tuple["Message", ...]

    def __post_init__(self):
        if len(self.items) < 2:
            raise ValueError("tuples have arity at least 2")


@dataclass(frozen=True)
class MultisetLit:
    """Multiset literal; build it with `MultisetLit.of` to get the canonical order."""

    items: Tuple["Message", ...]

    @classmethod
    def of(cls, items: Iterable["Message"]) -> "MultisetLit":
        """Canonical multiset over `items` (multiplicity kept)."""
        return cls(tuple(sorted(items, key=message_key)))


@dataclass(frozen=True)
class SelectorApp:
    """Selector `g{E}` applied to a multiset literal or a set variable."""

    selector: str
    arg: Union[MultisetLit, SetVar]


@dataclass(frozen=True)
class ConstructorApp:
    """Constructor `f(M)`."""

    constructor: str
    arg: "Message"


Message = Union[Var, SetVar, TupleMsg, MultisetLit, SelectorApp, ConstructorApp]


def message_key(msg: Message) -> tuple:
    """Total order on messages (constructor tag, then children)."""
    if isinstance(msg, Var):
        return (0, name_key(msg.name))
    if isinstance(msg, SetVar):
        return (1, name_key(msg.name))
    if isinstance(msg, TupleMsg):
        return (2, tuple(message_key(item) for item in msg.items))
    if isinstance(msg, MultisetLit):
        return (3, tuple(message_key(item) for item in msg.items))
    if isinstance(msg, SelectorApp):
        return (4, msg.selector, message_key(msg.arg))
    return (5, msg.constructor, message_key(msg.arg))


@dataclass(frozen=True)
class Bound:
    """Bound of a channel: a default (None is infinity) plus per-location exceptions."""

    default: Optional[int] = None
    exceptions: Tuple[Tuple[str, int], ...] = ()

    def __post_init__(self):
        if self.default is not None and self.default < 1:
            raise ValueError("bounds are at least 1")
        if any(value < 1 for _, value in self.exceptions):
            raise ValueError("bounds are at least 1")
        object.__setattr__(self, "exceptions",
                           tuple(sorted(dict(self.exceptions).items(),
                                        key=lambda item: name_key(item[0]))))

    def at(self, location: str) -> Optional[int]:
        """Bound at `location`, None meaning unbounded."""
        return dict(self.exceptions).get(location, self.default)

    def cap(self, available: int, location: str) -> int:
        """min(available, bound at location)."""
        value = self.at(location)
        return available if value is None else min(available, value)


UNBOUNDED = Bound()


@dataclass(frozen=True)
class Pattern:
    """Pattern <x1,...,xk>M: binders pairwise distinct, all occurring in the body."""

    binders: Tuple[str, ...]
    body: Message


@dataclass(frozen=True)
class BInput:
    """Broadcast input a?<x>(M).P"""

    channel: str
    pattern: Pattern
    cont: "Process"


@dataclass(frozen=True)
class CInput:
    """Collection input a?*<x>(M) as S.P; only S scopes over P."""

    channel: str
    pattern: Pattern
    setvar: str
    cont: "Process"


@dataclass(frozen=True)
class Output:
    """Output a!<M>.P"""

    channel: str
    msg: Message
    cont: "Process"


@dataclass(frozen=True)
class New:
    """Restriction (nu x : T, b) P"""

    name: str
    bound: Bound
    body: "Process"
    type_ann: Optional[Type] = None


@dataclass(frozen=True)
class Match:
    """[M = N]P"""

    left: Message
    right: Message
    body: "Process"


@dataclass(frozen=True)
class Mismatch:
    """[M != N]P"""

    left: Message
    right: Message
    body: "Process"


@dataclass(frozen=True)
class Par:
    """P | Q"""

    left: "Process"
    right: "Process"


@dataclass(frozen=True)
class Sum:
    """P + Q"""

    left: "Process"
    right: "Process"


@dataclass(frozen=True)
class Nil:
    """The inert process 0."""


@dataclass(frozen=True)
class AgentCall:
    """A(M1, ..., Mk)"""

    agent: str
    args: Tuple[Message, ...]


Process = Union[BInput, CInput, Output, New, Match, Mismatch, Par, Sum, Nil, AgentCall]

NIL = Nil()


@dataclass(frozen=True)
class Located:
    """l[[P]]"""

    location: str
    process: Process


@dataclass(frozen=True)
class ParN:
    """N1 | N2"""

    left: "Network"
    right: "Network"


@dataclass(frozen=True)
class NewN:
    """(nu x : T, b) N"""

    name: str
    bound: Bound
    body: "Network"
    type_ann: Optional[Type] = None


@dataclass(frozen=True)
class Near:
    """Connectivity atom source |> target."""

    source: str
    target: str


Network = Union[Located, ParN, NewN, Near]


@dataclass(frozen=True)
class AgentDef:
    """A(x1, ..., xk) = P with fn(P) contained in the parameters."""

    name: str
    params: Tuple[str, ...]
    body: Process


@dataclass(frozen=True)
class SelectorDecl:
    """Declared selector bound to a shipped builtin with fixed parameters."""

    name: str
    builtin: str
    params: Tuple[str, ...] = ()


@dataclass(frozen=True)
class Program:
    """Signatures, channel bounds, type declarations, agents and the top network."""

    network: Network
    constructors: Tuple[str, ...] = ()
    selectors: Tuple[SelectorDecl, ...] = ()
    channels: Tuple[Tuple[str, Bound], ...] = ()
    agents: Tuple[AgentDef, ...] = ()
    types: Tuple[Tuple[str, Type], ...] = field(default=())

    @cached_property
    def agent_map(self) -> Dict[str, AgentDef]:
        """Agent definitions by name."""
        return {agent.name: agent for agent in self.agents}

    @cached_property
    def channel_bounds(self) -> Dict[str, Bound]:
        """Declared bounds of free channels."""
        return dict(self.channels)

    @cached_property
    def type_decls(self) -> Dict[str, Type]:
        """Declared types by name."""
        return dict(self.types)

    def signature(self) -> tuple:
        """Constructor and selector signature, compared by the bisimulation checker."""
        return (tuple(sorted(self.constructors)), tuple(sorted(self.selectors, key=repr)))

    def bound_of(self, channel: str) -> Bound:
        """Declared bound of a free channel, unbounded when undeclared."""
        return self.channel_bounds.get(channel, UNBOUNDED)
