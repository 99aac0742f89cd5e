"""Abstract syntax of programs, packet predicates and state observations."""
from __future__ import annotations

from dataclasses import dataclass

from cnetkat.domain.models import CompleteAtom, PacketSet, PiExpr, StateAction


# Packet predicates
@dataclass(frozen=True)
class PFalse:
    pass


@dataclass(frozen=True)
class PTrue:
    pass


@dataclass(frozen=True)
class FieldTest:
    field: str
    value: str


@dataclass(frozen=True)
class PAnd:
    left: Predicate
    right: Predicate


@dataclass(frozen=True)
class POr:
    left: Predicate
    right: Predicate


@dataclass(frozen=True)
class PNot:
    operand: Predicate


Predicate = PFalse | PTrue | FieldTest | PAnd | POr | PNot


# State observations
@dataclass(frozen=True)
class OBot:
    pass


@dataclass(frozen=True)
class OTop:
    pass


@dataclass(frozen=True)
class VarTest:
    var: str
    value: str


@dataclass(frozen=True)
class OAnd:
    left: Observation
    right: Observation


@dataclass(frozen=True)
class OOr:
    left: Observation
    right: Observation


@dataclass(frozen=True)
class ONot:
    """Pseudocomplement."""

    operand: Observation


Observation = OBot | OTop | VarTest | OAnd | OOr | ONot


# Programs
@dataclass(frozen=True)
class Abort:
    pass


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Dup:
    pass


@dataclass(frozen=True)
class Test:
    pred: Predicate


@dataclass(frozen=True)
class Observe:
    obs: Observation


@dataclass(frozen=True)
class FieldAssign:
    field: str
    value: str


@dataclass(frozen=True)
class VarAssign:
    var: str
    value: str

    @property
    def action(self) -> StateAction:
        return StateAction(self.var, value=self.value)


@dataclass(frozen=True)
class VarCopy:
    var: str
    source: str

    @property
    def action(self) -> StateAction:
        return StateAction(self.var, source=self.source)


@dataclass(frozen=True)
class PacketLiteral:
    packets: PacketSet


@dataclass(frozen=True)
class Complete:
    atom: CompleteAtom


@dataclass(frozen=True)
class Pi:
    expr: PiExpr


@dataclass(frozen=True)
class Union:
    left: Program
    right: Program


@dataclass(frozen=True)
class Seq:
    left: Program
    right: Program


@dataclass(frozen=True)
class Par:
    left: Program
    right: Program


@dataclass(frozen=True)
class Star:
    body: Program


Program = (
    Abort
    | Skip
    | Dup
    | Test
    | Observe
    | FieldAssign
    | VarAssign
    | VarCopy
    | PacketLiteral
    | Complete
    | Pi
    | Union
    | Seq
    | Par
    | Star
)

DROP = Test(PFalse())
PASS = Test(PTrue())
BOT = Observe(OBot())
TOP = Observe(OTop())


def seq_all(programs: list[Program], empty: Program | None = None) -> Program:
    """Left-nested sequential composition of a non-empty list."""
    if not programs:
        return empty if empty is not None else Skip()
    result = programs[0]
    for p in programs[1:]:
        result = Seq(result, p)
    return result


def union_all(programs: list[Program]) -> Program:
    """Left-nested choice; the empty sum is abort."""
    if not programs:
        return Abort()
    result = programs[0]
    for p in programs[1:]:
        result = Union(result, p)
    return result


def par_all(programs: list[Program]) -> Program:
    if not programs:
        return Skip()
    result = programs[0]
    for p in programs[1:]:
        result = Par(result, p)
    return result
