"""
Barbs and bisimulation verdicts.
"""
# pylint: disable=R0903
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet, Tuple, Union

from app.models.ast_model import name_key
from app.models.normal_form_model import NormalForm
from app.models.reduction_model import RuleLabel


class BarbMode(str, Enum):
    """How barbs are compared between related states."""

    STRICT = "strict"
    WEAK = "weak"


@dataclass(frozen=True)
class Barb:
    """Observable readiness on `channel` in mode B or C at `location`."""

    channel: str
    mode: str
    location: str

    def __post_init__(self):
        if self.mode not in ("B", "C"):
            raise ValueError(f"barb mode must be B or C, got {self.mode!r}")

    def key(self) -> tuple:
        """Deterministic order on barbs."""
        return (name_key(self.channel), self.mode, name_key(self.location))

    def __str__(self) -> str:
        return f"({self.channel},{self.mode})@{self.location}"


def sorted_barbs(barbs) -> Tuple[Barb, ...]:
    """Barbs in deterministic order."""
    return tuple(sorted(barbs, key=Barb.key))


@dataclass(frozen=True)
class Bisimilar:
    """The networks are related; `witness` holds (left, right) state indices.

    The witness relation is read up to symmetry and always contains the
    pair of initial states.
    """

    witness: FrozenSet[Tuple[int, int]]
    left_states: int
    right_states: int

    verdict = "Bisimilar"


@dataclass(frozen=True)
class Distinguished:
    """A reachable state on `side` (1 or 2) the other network cannot match."""

    side: int
    labels: Tuple[RuleLabel, ...]
    states: Tuple[NormalForm, ...]
    reason: str
    unmatched: FrozenSet[Barb] = frozenset()

    verdict = "Distinguished"


@dataclass(frozen=True)
class Inconclusive:
    """No verdict within the exploration limits."""

    reason: str

    verdict = "Inconclusive"


BisimVerdict = Union[Bisimilar, Distinguished, Inconclusive]
