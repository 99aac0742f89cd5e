"""Immutable value types: universes, packets, global states and pomset labels."""
from __future__ import annotations

import itertools
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from functools import cached_property

from cnetkat.domain.enums import AtomFlavor, LabelKind
from cnetkat.domain.errors import DomainError, ResourceBudgetError


@dataclass(frozen=True)
class Universe:
    """Declared packet fields and global variables, each with a finite value set.

    Field order is significant: complete tests and assignments list values in it.
    """

    fields: tuple[tuple[str, tuple[str, ...]], ...]
    vars: tuple[tuple[str, tuple[str, ...]], ...] = ()

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for name, values in (*self.fields, *self.vars):
            if name in seen:
                raise DomainError(f"name '{name}' declared twice")
            if not values:
                raise DomainError(f"'{name}' has an empty value set")
            if len(set(values)) != len(values):
                raise DomainError(f"'{name}' lists a value twice")
            seen.add(name)
        if not self.fields:
            raise DomainError("a universe needs at least one packet field")

    @classmethod
    def from_mapping(
        cls, fields: Mapping[str, Iterable[object]], vars: Mapping[str, Iterable[object]] | None = None
    ) -> Universe:
        """Build a universe from plain mappings; values are stringified."""
        return cls(
            fields=tuple((f, tuple(str(n) for n in ns)) for f, ns in fields.items()),
            vars=tuple((v, tuple(str(n) for n in ns)) for v, ns in (vars or {}).items()),
        )

    @cached_property
    def field_names(self) -> tuple[str, ...]:
        return tuple(f for f, _ in self.fields)

    @cached_property
    def var_names(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.vars)

    def field_values(self, f: str) -> tuple[str, ...]:
        for name, values in self.fields:
            if name == f:
                return values
        raise DomainError(f"undeclared field '{f}'")

    def var_values(self, v: str) -> tuple[str, ...]:
        for name, values in self.vars:
            if name == v:
                return values
        raise DomainError(f"undeclared variable '{v}'")

    def is_field(self, name: str) -> bool:
        return name in self.field_names

    def is_var(self, name: str) -> bool:
        return name in self.var_names

    def check_field(self, f: str, n: str) -> None:
        if n not in self.field_values(f):
            raise DomainError(f"value '{n}' out of range for field '{f}'")

    def check_var(self, v: str, n: str) -> None:
        if n not in self.var_values(v):
            raise DomainError(f"value '{n}' out of range for variable '{v}'")

    def packet(self, **assignment: object) -> Packet:
        """Build a packet; every declared field must be given."""
        missing = [f for f in self.field_names if f not in assignment]
        extra = [f for f in assignment if f not in self.field_names]
        if missing or extra:
            raise DomainError(f"packet must assign exactly the fields {list(self.field_names)}")
        items = []
        for f in self.field_names:
            n = str(assignment[f])
            self.check_field(f, n)
            items.append((f, n))
        return Packet(tuple(items), self)

    def packet_set(self, *assignments: Mapping[str, object]) -> PacketSet:
        return PacketSet(frozenset(self.packet(**a) for a in assignments))

    def state(self, **assignment: object) -> State:
        for v, n in assignment.items():
            self.check_var(v, str(n))
        return State(tuple((v, str(assignment[v])) for v in self.var_names if v in assignment))

    @cached_property
    def packets(self) -> tuple[Packet, ...]:
        """Every packet of the universe, in field-value order."""
        names = self.field_names
        combos = itertools.product(*(values for _, values in self.fields))
        return tuple(Packet(tuple(zip(names, combo)), self) for combo in combos)

    @cached_property
    def packet_sets(self) -> tuple[PacketSet, ...]:
        """Every subset of packets, smallest first."""
        pks = self.packets
        return tuple(
            PacketSet(frozenset(combo)) for size in range(len(pks) + 1) for combo in itertools.combinations(pks, size)
        )

    @cached_property
    def states(self) -> tuple[State, ...]:
        """Every partial function from variables to values, most defined last."""
        options = [[None, *values] for _, values in self.vars]
        result = []
        for combo in itertools.product(*options):
            items = tuple((v, n) for v, n in zip(self.var_names, combo) if n is not None)
            result.append(State(items))
        result.sort(key=lambda s: (len(s.items), s.sort_key(self)))
        return tuple(result)

    def check_caps(self, max_vars: int, max_values: int) -> None:
        """Refuse universes whose state space is too large to enumerate."""
        if len(self.vars) > max_vars:
            raise ResourceBudgetError("variables", max_vars, len(self.vars))
        widest = max((len(values) for _, values in self.vars), default=0)
        if widest > max_values:
            raise ResourceBudgetError("values per variable", max_values, widest)

    def describe(self) -> str:
        """Render the universe as a program header."""
        lines = ["fields " + ", ".join(f"{f}: {' '.join(ns)}" for f, ns in self.fields) + ";"]
        if self.vars:
            lines.append("vars " + ", ".join(f"{v}: {' '.join(ns)}" for v, ns in self.vars) + ";")
        return "\n".join(lines)


@dataclass(frozen=True)
class Packet:
    """Total assignment of the universe's fields, stored in field order."""

    items: tuple[tuple[str, str], ...]
    universe: Universe = field(compare=False, repr=False)

    def __getitem__(self, f: str) -> str:
        for name, n in self.items:
            if name == f:
                return n
        raise DomainError(f"undeclared field '{f}'")

    def update(self, f: str, n: str) -> Packet:
        self.universe.check_field(f, n)
        return Packet(tuple((name, n if name == f else m) for name, m in self.items), self.universe)

    def matches(self, f: str, n: str) -> bool:
        return self[f] == n

    def sort_key(self) -> tuple[int, ...]:
        return tuple(self.universe.field_values(f).index(n) for f, n in self.items)

    def __str__(self) -> str:
        return "[" + ",".join(f"{f}={n}" for f, n in self.items) + "]"


@dataclass(frozen=True)
class PacketSet:
    """A finite set of packets; the local state of a run."""

    packets: frozenset[Packet] = frozenset()

    @classmethod
    def of(cls, packets: Iterable[Packet]) -> PacketSet:
        return cls(frozenset(packets))

    def __iter__(self) -> Iterator[Packet]:
        return iter(self.sorted())

    def __len__(self) -> int:
        return len(self.packets)

    def __bool__(self) -> bool:
        return bool(self.packets)

    def __contains__(self, pk: object) -> bool:
        return pk in self.packets

    def __or__(self, other: PacketSet) -> PacketSet:
        return PacketSet(self.packets | other.packets)

    def __and__(self, other: PacketSet) -> PacketSet:
        return PacketSet(self.packets & other.packets)

    def __sub__(self, other: PacketSet) -> PacketSet:
        return PacketSet(self.packets - other.packets)

    def issubset(self, other: PacketSet) -> bool:
        return self.packets <= other.packets

    def sorted(self) -> list[Packet]:
        return sorted(self.packets, key=Packet.sort_key)

    def filter(self, f: str, n: str) -> PacketSet:
        if self.packets:
            next(iter(self.packets)).universe.check_field(f, n)
        return PacketSet(frozenset(pk for pk in self.packets if pk.matches(f, n)))

    def update(self, f: str, n: str) -> PacketSet:
        return PacketSet(frozenset(pk.update(f, n) for pk in self.packets))

    def sort_key(self) -> tuple:
        return (len(self.packets), tuple(pk.sort_key() for pk in self.sorted()))

    def __str__(self) -> str:
        return "{" + ",".join(str(pk) for pk in self.sorted()) + "}"


@dataclass(frozen=True)
class State:
    """Partial function from variables to values; a snapshot of the global store.

    ``alpha.leq(beta)`` holds when alpha carries at least beta's information.
    """

    items: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(sorted(self.items)))

    def get(self, v: str) -> str | None:
        for name, n in self.items:
            if name == v:
                return n
        return None

    @property
    def domain(self) -> frozenset[str]:
        return frozenset(name for name, _ in self.items)

    def as_dict(self) -> dict[str, str]:
        return dict(self.items)

    def leq(self, other: State) -> bool:
        mine = self.as_dict()
        return all(mine.get(v) == n for v, n in other.items)

    def apply(self, action: StateAction) -> State | None:
        """Return the state after ``action`` or None when the copy source is undefined."""
        if action.value is not None:
            value = action.value
        else:
            value = self.get(action.source)
            if value is None:
                return None
        updated = self.as_dict()
        updated[action.var] = value
        return State(tuple(sorted(updated.items())))

    def merge(self, other: State) -> State | None:
        mine = self.as_dict()
        for v, n in other.items:
            if mine.setdefault(v, n) != n:
                return None
        return State(tuple(sorted(mine.items())))

    def sort_key(self, universe: Universe | None = None) -> tuple:
        if universe is None:
            return self.items
        return tuple((universe.var_names.index(v), universe.var_values(v).index(n)) for v, n in self.items)

    def __str__(self) -> str:
        return "<" + ",".join(f"{v}={n}" for v, n in self.items) + ">"


@dataclass(frozen=True)
class StateAction:
    """``var <- value`` or ``var <- source``."""

    var: str
    value: str | None = None
    source: str | None = None

    def __post_init__(self) -> None:
        if (self.value is None) == (self.source is None):
            raise DomainError("a state action assigns either a value or a variable")

    @property
    def is_copy(self) -> bool:
        return self.source is not None

    def __str__(self) -> str:
        return f"{self.var}<-{self.value if self.value is not None else self.source}"


@dataclass(frozen=True)
class CompleteAtom:
    """Complete test ``?[..]`` or complete assignment ``![..]`` for one packet."""

    packet: Packet
    flavor: AtomFlavor

    @property
    def is_test(self) -> bool:
        return self.flavor is AtomFlavor.TEST

    def dual(self) -> CompleteAtom:
        flipped = AtomFlavor.ASSIGNMENT if self.is_test else AtomFlavor.TEST
        return CompleteAtom(self.packet, flipped)

    def __str__(self) -> str:
        return ("?" if self.is_test else "!") + str(self.packet)


@dataclass(frozen=True)
class PiExpr:
    """Parallel composition of complete assignments; the empty one is drop."""

    packets: frozenset[Packet] = frozenset()

    @classmethod
    def of_set(cls, a: PacketSet) -> PiExpr:
        return cls(a.packets)

    @property
    def packet_set(self) -> PacketSet:
        return PacketSet(self.packets)

    @property
    def atoms(self) -> tuple[CompleteAtom, ...]:
        return tuple(CompleteAtom(pk, AtomFlavor.ASSIGNMENT) for pk in self.packet_set.sorted())

    @property
    def is_drop(self) -> bool:
        return not self.packets

    def __str__(self) -> str:
        return "!" + str(self.packet_set)


@dataclass(frozen=True)
class StateChoice:
    """Pattern label: a node that may carry any of ``states``."""

    states: frozenset[State]

    def __str__(self) -> str:
        return "{" + "|".join(str(s) for s in sorted(self.states, key=State.sort_key)) + "}"


Label = State | StateAction | PacketSet | StateChoice


def label_kind(label: Label) -> LabelKind:
    if isinstance(label, State):
        return LabelKind.STATE
    if isinstance(label, StateAction):
        return LabelKind.ACTION
    if isinstance(label, PacketSet):
        return LabelKind.PACKETS
    return LabelKind.CHOICE


def is_state_like(label: Label) -> bool:
    return isinstance(label, (State, StateChoice))


def allowed_states(label: Label) -> frozenset[State]:
    """States a State or StateChoice node may carry; empty for other labels."""
    if isinstance(label, State):
        return frozenset({label})
    if isinstance(label, StateChoice):
        return label.states
    return frozenset()


def packet_update(pk: Packet, f: str, n: str) -> Packet:
    return pk.update(f, n)


def set_filter(a: PacketSet, f: str, n: str) -> PacketSet:
    return a.filter(f, n)


def set_update(a: PacketSet, f: str, n: str) -> PacketSet:
    return a.update(f, n)


def state_leq(alpha: State, beta: State) -> bool:
    return alpha.leq(beta)


def state_apply(alpha: State, action: StateAction) -> State | None:
    return alpha.apply(action)


def state_merge(alpha: State, beta: State) -> State | None:
    return alpha.merge(beta)


def pi_of_set(a: PacketSet) -> PiExpr:
    return PiExpr.of_set(a)


def set_of_pi(pi: PiExpr) -> PacketSet:
    return pi.packet_set
