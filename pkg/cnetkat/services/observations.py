"""Packet predicates as a Boolean algebra and state observations as a pseudocomplemented lattice."""
from collections.abc import Iterable

from cnetkat.domain.ast import (
    FieldTest,
    OAnd,
    OBot,
    Observation,
    ONot,
    OOr,
    OTop,
    PAnd,
    PFalse,
    PNot,
    POr,
    Predicate,
    PTrue,
    VarTest,
)
from cnetkat.domain.models import Packet, PacketSet, State, Universe


def bsem(t: Predicate, a: PacketSet) -> PacketSet:
    """Evaluate a packet predicate on a packet set.

    Args:
        t: Predicate over the universe's fields.
        a: Input packets.

    Returns:
        The packets of ``a`` satisfying ``t``.
    """
    match t:
        case PFalse():
            return PacketSet()
        case PTrue():
            return a
        case FieldTest(field=f, value=n):
            return a.filter(f, n)
        case PAnd(left=left, right=right):
            return bsem(left, a) & bsem(right, a)
        case POr(left=left, right=right):
            return bsem(left, a) | bsem(right, a)
        case PNot(operand=operand):
            return a - bsem(operand, a)
    raise TypeError(f"not a predicate: {t!r}")


def satisfies(pk: Packet, t: Predicate) -> bool:
    return pk in bsem(t, PacketSet(frozenset({pk})))


def all_states(universe: Universe) -> frozenset[State]:
    return frozenset(universe.states)


def downclose(states: Iterable[State], universe: Universe) -> frozenset[State]:
    """Least downward-closed superset: every state carrying at least the information of a member."""
    generators = list(states)
    return frozenset(alpha for alpha in universe.states if any(alpha.leq(beta) for beta in generators))


def is_downset(states: frozenset[State], universe: Universe) -> bool:
    return downclose(states, universe) == states


def osem(o: Observation, universe: Universe) -> frozenset[State]:
    """Denotation of an observation as a set of states.

    The pseudocomplement is the largest down-set disjoint from the operand:
    the states none of whose extensions satisfy it.
    """
    match o:
        case OBot():
            return frozenset()
        case OTop():
            return all_states(universe)
        case VarTest(var=v, value=n):
            return frozenset(alpha for alpha in universe.states if alpha.get(v) == n)
        case OAnd(left=left, right=right):
            return osem(left, universe) & osem(right, universe)
        case OOr(left=left, right=right):
            return osem(left, universe) | osem(right, universe)
        case ONot(operand=operand):
            inner = osem(operand, universe)
            return frozenset(
                alpha for alpha in universe.states if not any(gamma.leq(alpha) for gamma in inner)
            )
    raise TypeError(f"not an observation: {o!r}")
