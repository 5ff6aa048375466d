"""
Normal forms of networks: restrictions around connectivity and located processes.
"""
# pylint: disable=R0903
from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, Optional, Tuple

from app.models.ast_model import Bound, Process
from app.models.type_model import Type

Connectivity = FrozenSet[Tuple[str, str]]


@dataclass(frozen=True)
class Restriction:
    """A lifted binder (nu name : type_ann, bound)."""

    name: str
    bound: Bound
    type_ann: Optional[Type] = None


@dataclass(frozen=True)
class NormalForm:
    """(nu m)(C | l1[[P1]] | ... | lk[[Pk]]).

    `located` is a sorted multiset of (location, process) entries, none of
    which is a parallel composition or a restriction at top level.
    """

    restrictions: Tuple[Restriction, ...]
    connectivity: Connectivity
    located: Tuple[Tuple[str, Process], ...]

    @property
    def restricted(self) -> FrozenSet[str]:
        """Names bound by the restrictions."""
        return frozenset(item.name for item in self.restrictions)

    def restriction(self, name: str) -> Optional[Restriction]:
        """The restriction binding `name`, if any."""
        for item in self.restrictions:
            if item.name == name:
                return item
        return None

    def locations(self) -> Tuple[str, ...]:
        """Locations hosting at least one entry, in entry order without repeats."""
        seen = []
        for location, _ in self.located:
            if location not in seen:
                seen.append(location)
        return tuple(seen)
