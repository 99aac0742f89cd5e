"""Cnetkat enumerations."""
from enum import Enum


class LabelKind(str, Enum):
    """Kind of a pomset node label."""

    STATE = "state"
    ACTION = "action"
    PACKETS = "packets"
    CHOICE = "choice"


class AtomFlavor(str, Enum):
    """Complete test vs complete assignment."""

    TEST = "test"
    ASSIGNMENT = "assignment"


class OutputFormat(str, Enum):
    """Report format of the command line."""

    TEXT = "text"
    JSON = "json"
    DOT = "dot"


class CheckMode(str, Enum):
    """Comparison performed by the check command."""

    INCLUSION = "incl"
    EQUIVALENCE = "equiv"


class Verdict(str, Enum):
    """Outcome of a bounded semantic comparison."""

    INCLUDED = "included"
    NOT_INCLUDED = "not included"
    EQUIVALENT = "equivalent"
    NOT_EQUIVALENT = "not equivalent"


class GuardRule(str, Enum):
    """Inductive rule that produced a guarded pomset."""

    STATE = "state"
    ACTION = "action"
    SEQUENCE = "sequence"
    PARALLEL = "parallel"
