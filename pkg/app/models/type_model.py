"""
Channel type grammar.

Models:
- `ChanB` / `ChanC` : broadcast and collection channel types carrying a payload type
- `MultisetT` : multiset of a fixed arity, or wildcard arity (`None`)
- `Product` : tuple types
- `Arrow` : types of constructors and selectors only
- `LocT` : the type of location names
- `Base` : user-declared or ambient atomic types
- `TypeEnv` : the environment over names and over constructor/selector symbols
- `TypeReport` : outcome of checking a whole program
"""
# pylint: disable=R0903
from __future__ import annotations

from collections import ChainMap
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Mapping, Optional, Tuple, Union


@dataclass(frozen=True)
class ChanB:
    """Broadcast channel carrying `payload`."""

    payload: "Type"


@dataclass(frozen=True)
class ChanC:
    """Collection channel carrying `payload`."""

    payload: "Type"


@dataclass(frozen=True)
class MultisetT:
    """Multiset of `arity` elements of type `elem`; `arity=None` is the wildcard."""

    elem: "Type"
    arity: Optional[int] = None


@dataclass(frozen=True)
class Product:
    """Tuple type, at least two components."""

    items: Tuple["Type", ...]

    def __post_init__(self):
        if len(self.items) < 2:
            raise ValueError("product types need at least two components")


@dataclass(frozen=True)
class Arrow:
    """Function type of a constructor or selector."""

    domain: "Type"
    codomain: "Type"


@dataclass(frozen=True)
class LocT:
    """Type of location names."""


@dataclass(frozen=True)
class Base:
    """Atomic type."""

    name: str


Type = Union[ChanB, ChanC, MultisetT, Product, Arrow, LocT, Base]

AMBIENT = Base("Name")
LOC = LocT()


@dataclass(frozen=True)
class TypeEnv:
    """Types of names, layered so that binders shadow outer scopes, plus symbol types."""

    names: ChainMap = field(default_factory=ChainMap)
    symbols: Mapping[str, Arrow] = field(default_factory=dict)

    def lookup(self, name: str) -> Optional[Type]:
        """Type of a name, None when unbound."""
        return self.names.get(name)

    def symbol(self, name: str) -> Optional[Arrow]:
        """Type of a constructor or selector, None when undeclared."""
        return self.symbols.get(name)

    def extend(self, bindings: Mapping[str, Type]) -> "TypeEnv":
        """Environment with `bindings` shadowing the current scope."""
        return TypeEnv(self.names.new_child(dict(bindings)), self.symbols)


@dataclass(frozen=True)
class TypeReport:
    """Verdict on a program: the network error, errors raised inside agents, unused agents."""

    network_error: Optional[str] = None
    agent_errors: Dict[str, str] = field(default_factory=dict)
    unchecked_agents: FrozenSet[str] = frozenset()

    @property
    def ok(self) -> bool:
        """Whether the program is well typed."""
        return self.network_error is None
