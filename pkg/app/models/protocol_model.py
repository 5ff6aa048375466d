"""
Generator specifications for the hierarchical aggregation protocol and the
electoral system.

Models:
- `HierarchySpec` : shape and behaviour of an aggregation tree
- `ElectoralSpec` : participants and collection rounds of an election
"""
from __future__ import annotations

from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class HierarchySpec(BaseModel):
    """An aggregation tree of `depth` central levels above the leaves."""

    depth: int = Field(default=0, ge=0, description="Levels of centrals below the root")
    branching: List[int] = Field(default_factory=lambda: [2],
                                 description="Fan-out per level, root first; "
                                             "the last value repeats")
    rounds: Literal["once", "repeat"] = Field(default="once",
                                              description="One aggregation or recursive agents")
    selection: str = Field(default="min", description="Idempotent builtin selector")
    leaf_body: Literal["inert", "echo"] = Field(default="inert",
                                                description="What a leaf does with the decision")
    bound: Optional[int] = Field(default=None, ge=1,
                                 description="Bound of internal channels; max fan-out if unset")
    contributions: Literal["fresh", "indexed"] = Field(
        default="fresh", description="Leaves send a fresh name or their own index")

    model_config = ConfigDict(frozen=True)

    @field_validator("branching")
    @classmethod
    def _positive_fanout(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("branching needs at least one fan-out")
        if any(fanout < 1 for fanout in value):
            raise ValueError("every fan-out must be at least 1")
        return value

    @model_validator(mode="after")
    def _fanout_within_bound(self) -> "HierarchySpec":
        if self.bound is not None and max(self.fanouts()) > self.bound:
            raise ValueError(f"fan-out {max(self.fanouts())} exceeds bound {self.bound}")
        return self

    def fanouts(self) -> List[int]:
        """Fan-out of every level from the root down to the leaf parents."""
        padded = list(self.branching[:self.depth + 1])
        while len(padded) < self.depth + 1:
            padded.append(padded[-1])
        return padded

    def effective_bound(self) -> int:
        """Bound placed on internal channels."""
        return self.bound if self.bound is not None else max(self.fanouts())

    def leaf_count(self) -> int:
        """Number of leaves of the tree."""
        total = 1
        for fanout in self.fanouts():
            total *= fanout
        return total


class ElectoralSpec(BaseModel):
    """Participants sharing a collection channel bounded by their number."""

    participants: int = Field(..., ge=2, description="Number of participants n")
    rounds: int = Field(default=1, ge=1, description="Collections k before announcing")
    shape: Literal["choice", "sequential"] = Field(
        default="choice",
        description="choice: vote or collect, announce on a broadcast channel; "
                    "sequential: vote, then collect, then announce, all on the shared channel")
    repeat: bool = Field(default=False,
                         description="Restart every participant after the announcement")

    model_config = ConfigDict(frozen=True)
