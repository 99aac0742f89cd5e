"""Data Transfer Objects (DTOs) for command reports."""
from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field

from cnetkat.domain.enums import CheckMode, GuardRule, LabelKind, Verdict
from cnetkat.domain.models import PacketSet, label_kind


# Base DTOs
class BaseDTO(BaseModel):
    """Base DTO with common configuration."""

    model_config = ConfigDict(from_attributes=True, use_enum_values=True)


def packets_text(a: PacketSet | None) -> list[str] | None:
    return None if a is None else [str(pk) for pk in a]


# Pomset DTOs
class NodeDTO(BaseDTO):
    id: int
    kind: LabelKind
    label: str
    optional: bool = False


class PomsetDTO(BaseDTO):
    """Nodes and covering edges of a pomset."""

    nodes: list[NodeDTO]
    edges: list[tuple[int, int]]

    @classmethod
    def of(cls, u) -> PomsetDTO:
        return cls(
            nodes=[
                NodeDTO(id=i, kind=label_kind(lbl), label=str(lbl), optional=i in u.optional)
                for i, lbl in enumerate(u.labels)
            ],
            edges=u.hasse_edges(),
        )


class TraceDTO(BaseDTO):
    pomset: PomsetDTO
    output: list[str] | None = Field(default=None, description="Output packets; absent for store-only languages")

    @classmethod
    def of(cls, trace) -> TraceDTO:
        return cls(pomset=PomsetDTO.of(trace.pomset), output=packets_text(trace.output))


class BoundsDTO(BaseDTO):
    star: int
    pad: int
    node_budget: int

    @classmethod
    def of(cls, cfg) -> BoundsDTO:
        return cls(star=cfg.star_bound, pad=cfg.pad_bound, node_budget=cfg.node_budget)


# Eval DTOs
class EvalReport(BaseDTO):
    program: str
    input: list[str]
    bounds: BoundsDTO
    closed: bool
    bounds_hit: bool
    saturated: bool
    bounded: bool
    outputs: list[list[str] | None]
    traces: list[TraceDTO]
    materialized: bool = False


# Guarded DTOs
class GuardedTraceDTO(BaseDTO):
    source: TraceDTO
    trace: TraceDTO
    rule: GuardRule
    depth: int


class GuardedReport(BaseDTO):
    program: str
    input: list[str]
    bounds: BoundsDTO
    traces: int
    instances: int
    guarded: list[GuardedTraceDTO]
    order_qualifying: int = 0
    order_violations: int = 0


# Normal form DTOs
class SummandDTO(BaseDTO):
    state_program: str
    output: list[str]


class NormalizeReport(BaseDTO):
    program: str
    input: list[str]
    merged: bool
    summands: list[SummandDTO]
    text: str


# Check DTOs
class CheckResultDTO(BaseDTO):
    input: list[str]
    verdict: Verdict
    bounded: bool
    direction: str | None = None
    counterexample: TraceDTO | None = None


class CheckReport(BaseDTO):
    left: str
    right: str
    mode: CheckMode
    bounds: BoundsDTO
    holds: bool
    results: list[CheckResultDTO]


# Case study DTOs
class RunningExampleDTO(BaseDTO):
    star: int
    pad: int
    iterations: list[list[list[str]]]
    outputs: list[list[str]]
    bounds_hit: bool
    saturated: bool
    contains_overview: bool
    q_included: bool
    order_traces: int
    order_qualifying: int
    order_guarded_members: int
    order_violations: int
    passed: bool


class RaceDTO(BaseDTO):
    name: str
    input: list[str]
    output: list[str]
    traces: int
    found: bool
    trace: PomsetDTO | None = None
    guarded: PomsetDTO | None = None


class ComponentDTO(BaseDTO):
    program: str
    input: list[str]
    traces: int
    outputs: list[list[str]]


class ExamplesReport(BaseDTO):
    running: RunningExampleDTO
    races: list[RaceDTO]
    components: list[ComponentDTO]
    passed: bool
