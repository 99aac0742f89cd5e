"""Labelled partial orders: composition, isomorphism, subsumption, contraction and closure.

A ``Pomset`` stores its strict order transitively closed. Nodes labelled with a
``StateChoice`` or marked optional make the pomset a *pattern*: a compact name for
every concrete pomset obtained by dropping some optional nodes and picking one
state per choice node.
"""
from __future__ import annotations

import itertools
from collections import Counter
from collections.abc import Callable, Iterable, Iterator
from dataclasses import dataclass
from functools import cached_property

import networkx as nx
import structlog
from networkx.algorithms.isomorphism import DiGraphMatcher

from cnetkat.domain.errors import DomainError, ResourceBudgetError
from cnetkat.domain.models import (
    Label,
    PacketSet,
    State,
    StateAction,
    StateChoice,
    allowed_states,
    is_state_like,
)

logger = structlog.get_logger(__name__)


def label_key(label: Label) -> str:
    """Stable text key of a label, used for hashing and node matching."""
    if isinstance(label, State):
        return f"S{label}"
    if isinstance(label, StateAction):
        return f"A{label}"
    if isinstance(label, PacketSet):
        return f"P{label}"
    return f"C{label}"


@dataclass(frozen=True)
class Pomset:
    labels: tuple[Label, ...] = ()
    less: frozenset[tuple[int, int]] = frozenset()
    optional: frozenset[int] = frozenset()

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def nodes(self) -> range:
        return range(len(self.labels))

    @cached_property
    def _below(self) -> tuple[frozenset[int], ...]:
        below: list[set[int]] = [set() for _ in self.labels]
        for i, j in self.less:
            below[j].add(i)
        return tuple(frozenset(b) for b in below)

    @cached_property
    def _above(self) -> tuple[frozenset[int], ...]:
        above: list[set[int]] = [set() for _ in self.labels]
        for i, j in self.less:
            above[i].add(j)
        return tuple(frozenset(a) for a in above)

    def below(self, i: int) -> frozenset[int]:
        """Strict predecessors of node ``i``."""
        return self._below[i]

    def above(self, i: int) -> frozenset[int]:
        """Strict successors of node ``i``."""
        return self._above[i]

    def leq(self, i: int, j: int) -> bool:
        return i == j or (i, j) in self.less

    def comparable(self, i: int, j: int) -> bool:
        return self.leq(i, j) or self.leq(j, i)

    def minimal(self) -> list[int]:
        return [i for i in self.nodes if not self._below[i]]

    def maximal(self) -> list[int]:
        return [i for i in self.nodes if not self._above[i]]

    @cached_property
    def topological(self) -> tuple[int, ...]:
        return tuple(sorted(self.nodes, key=lambda i: (len(self._below[i]), i)))

    @property
    def is_concrete(self) -> bool:
        return not self.optional and not any(isinstance(lbl, StateChoice) for lbl in self.labels)

    def hasse_edges(self) -> list[tuple[int, int]]:
        """Covering pairs of the order."""
        return sorted(
            (i, j) for i, j in self.less if not any((i, k) in self.less for k in self._below[j] if k != i)
        )

    def restrict(self, keep: Iterable[int]) -> Pomset:
        """Induced sub-pomset on ``keep``, renumbered in ascending node order."""
        return self.restrict_with_map(keep)[0]

    def restrict_with_map(self, keep: Iterable[int]) -> tuple[Pomset, dict[int, int]]:
        kept = sorted(set(keep))
        index = {old: new for new, old in enumerate(kept)}
        less = frozenset((index[i], index[j]) for i, j in self.less if i in index and j in index)
        optional = frozenset(index[i] for i in self.optional if i in index)
        return Pomset(tuple(self.labels[i] for i in kept), less, optional), index

    def relabel(self, labels: dict[int, Label]) -> Pomset:
        return Pomset(tuple(labels.get(i, lbl) for i, lbl in enumerate(self.labels)), self.less, self.optional)

    def to_graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        for i, lbl in enumerate(self.labels):
            g.add_node(i, key=label_key(lbl) + ("?" if i in self.optional else ""))
        g.add_edges_from(self.less)
        return g

    @cached_property
    def canonical_key(self) -> str:
        """Isomorphism-invariant hash; equal pomsets share it, distinct ones rarely do."""
        if not self.labels:
            return "1"
        return nx.weisfeiler_lehman_graph_hash(self.to_graph(), node_attr="key", iterations=3)

    @cached_property
    def sort_key(self) -> tuple:
        keys = sorted(label_key(lbl) + ("?" if i in self.optional else "") for i, lbl in enumerate(self.labels))
        return (self.size, len(self.less), self.canonical_key, tuple(keys))

    def __str__(self) -> str:
        if not self.labels:
            return "1"
        names = [f"{i}:{lbl}{'?' if i in self.optional else ''}" for i, lbl in enumerate(self.labels)]
        edges = " ".join(f"{i}->{j}" for i, j in self.hasse_edges())
        return f"({' '.join(names)}{' | ' + edges if edges else ''})"


def transitive_closure(size: int, pairs: Iterable[tuple[int, int]]) -> frozenset[tuple[int, int]]:
    """Close ``pairs`` transitively; a cycle is a domain error."""
    succ: list[set[int]] = [set() for _ in range(size)]
    for i, j in pairs:
        succ[i].add(j)
    for k in range(size):
        for i in range(size):
            if k in succ[i]:
                succ[i] |= succ[k]
    if any(i in succ[i] for i in range(size)):
        raise DomainError("order relation has a cycle")
    return frozenset((i, j) for i in range(size) for j in succ[i])


def make(labels: Iterable[Label], pairs: Iterable[tuple[int, int]] = (), optional: Iterable[int] = ()) -> Pomset:
    """Build a pomset from generating order pairs."""
    labels = tuple(labels)
    return Pomset(labels, transitive_closure(len(labels), pairs), frozenset(optional))


def empty() -> Pomset:
    return Pomset()


def singleton(label: Label, optional: bool = False) -> Pomset:
    return Pomset((label,), frozenset(), frozenset({0}) if optional else frozenset())


def chain(labels: Iterable[Label]) -> Pomset:
    labels = tuple(labels)
    return Pomset(labels, frozenset((i, j) for i in range(len(labels)) for j in range(i + 1, len(labels))))


def _shift(u: Pomset, offset: int) -> tuple[frozenset[tuple[int, int]], frozenset[int]]:
    return frozenset((i + offset, j + offset) for i, j in u.less), frozenset(i + offset for i in u.optional)


def seq(u: Pomset, v: Pomset) -> Pomset:
    """Every node of ``u`` below every node of ``v``."""
    less, optional = _shift(v, u.size)
    cross = frozenset((i, j + u.size) for i in u.nodes for j in v.nodes)
    return Pomset(u.labels + v.labels, u.less | less | cross, u.optional | optional)


def par(u: Pomset, v: Pomset) -> Pomset:
    less, optional = _shift(v, u.size)
    return Pomset(u.labels + v.labels, u.less | less, u.optional | optional)


def _matcher(u: Pomset, v: Pomset) -> DiGraphMatcher:
    return DiGraphMatcher(u.to_graph(), v.to_graph(), node_match=lambda a, b: a["key"] == b["key"])


def _label_counts(u: Pomset) -> Counter:
    return Counter(label_key(lbl) + ("?" if i in u.optional else "") for i, lbl in enumerate(u.labels))


def iso(u: Pomset, v: Pomset) -> bool:
    """Label-preserving order isomorphism."""
    if u.size != v.size or len(u.less) != len(v.less) or _label_counts(u) != _label_counts(v):
        return False
    if u.canonical_key != v.canonical_key:
        return False
    return _matcher(u, v).is_isomorphic()


def subsumed_by(u: Pomset, v: Pomset) -> bool:
    """``u`` carries the events of ``v`` with at least its order."""
    if u.size != v.size or len(u.less) < len(v.less) or _label_counts(u) != _label_counts(v):
        return False
    return _matcher(u, v).subgraph_is_monomorphic()


def contracts_to(u: Pomset, v: Pomset) -> bool:
    """``u`` arises from ``v`` by merging State nodes.

    Searches for a surjection ``h`` from the nodes of ``v`` onto those of ``u`` that
    preserves labels and order, and reflects order except between two State nodes,
    which need only be comparable.
    """
    if u.size > v.size:
        return False
    order = list(v.topological)
    assignment: dict[int, int] = {}

    def consistent(x: int, hx: int) -> bool:
        for y, hy in assignment.items():
            for a, b, ha, hb in ((x, y, hx, hy), (y, x, hy, hx)):
                if v.leq(a, b) and not u.leq(ha, hb):
                    return False
                if u.leq(ha, hb):
                    if isinstance(v.labels[a], State) and isinstance(v.labels[b], State):
                        if not v.comparable(a, b):
                            return False
                    elif not v.leq(a, b):
                        return False
        return True

    def search(k: int) -> bool:
        if k == len(order):
            return len(set(assignment.values())) == u.size
        remaining = len(order) - k
        if u.size - len(set(assignment.values())) > remaining:
            return False
        x = order[k]
        for hx in u.nodes:
            if u.labels[hx] != v.labels[x] or not consistent(x, hx):
                continue
            assignment[x] = hx
            if search(k + 1):
                return True
            del assignment[x]
        return False

    return search(0)


class PomsetLanguage:
    """Finite set of pomsets, deduplicated up to isomorphism."""

    def __init__(self, members: Iterable[Pomset] = ()):
        self._buckets: dict[tuple, list[Pomset]] = {}
        self._size = 0
        for u in members:
            self.add(u)

    @staticmethod
    def _bucket(u: Pomset) -> tuple:
        return (u.size, len(u.less), u.canonical_key)

    def add(self, u: Pomset) -> bool:
        """Insert ``u``; return False when an isomorphic member exists."""
        bucket = self._buckets.setdefault(self._bucket(u), [])
        if any(iso(u, w) for w in bucket):
            return False
        bucket.append(u)
        self._size += 1
        return True

    def __contains__(self, u: object) -> bool:
        if not isinstance(u, Pomset):
            return False
        return any(iso(u, w) for w in self._buckets.get(self._bucket(u), []))

    def __iter__(self) -> Iterator[Pomset]:
        return iter(sorted((u for bucket in self._buckets.values() for u in bucket), key=lambda u: u.sort_key))

    def __len__(self) -> int:
        return self._size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PomsetLanguage):
            return NotImplemented
        return len(self) == len(other) and all(u in other for u in self)

    def issubset(self, other: PomsetLanguage) -> bool:
        return all(u in other for u in self)

    def union(self, other: PomsetLanguage) -> PomsetLanguage:
        return PomsetLanguage(itertools.chain(self, other))


def order_extensions(u: Pomset) -> Iterator[Pomset]:
    """Pomsets obtained by ordering one incomparable pair."""
    for i, j in itertools.permutations(u.nodes, 2):
        if u.comparable(i, j):
            continue
        new = {(a, b) for a in (u.below(i) | {i}) for b in (u.above(j) | {j})}
        yield Pomset(u.labels, u.less | frozenset(new), u.optional)


def twin_merges(u: Pomset) -> Iterator[Pomset]:
    """Pomsets obtained by merging two adjacent State nodes with equal labels."""
    for i, j in sorted(u.less):
        if not isinstance(u.labels[i], State) or u.labels[i] != u.labels[j]:
            continue
        if u.below(j) == u.below(i) | {i} and u.above(i) == u.above(j) | {j}:
            yield u.restrict(k for k in u.nodes if k != j)


def close(language: Iterable[Pomset], node_budget: int = 24, closure_budget: int = 100_000) -> PomsetLanguage:
    """Least language containing ``language`` closed under subsumption and contraction.

    Raises:
        ResourceBudgetError: a member exceeds ``node_budget`` nodes or the closure
            grows beyond ``closure_budget`` pomsets.
    """
    result = PomsetLanguage()
    work: list[Pomset] = []
    for u in language:
        if u.size > node_budget:
            raise ResourceBudgetError("node", node_budget, u.size)
        if result.add(u):
            work.append(u)
    while work:
        u = work.pop()
        for w in itertools.chain(order_extensions(u), twin_merges(u)):
            if result.add(w):
                if len(result) > closure_budget:
                    logger.warning("closure_budget_exceeded", limit=closure_budget, pomset_size=u.size)
                    raise ResourceBudgetError("closure", closure_budget, len(result))
                work.append(w)
    logger.debug("closure_computed", members=len(result))
    return result


def project_state(u: Pomset) -> Pomset:
    """Induced sub-pomset on State and StateAction nodes."""
    return u.restrict(i for i, lbl in enumerate(u.labels) if not isinstance(lbl, PacketSet))


def project_state_with_map(u: Pomset) -> tuple[Pomset, dict[int, int]]:
    return u.restrict_with_map(i for i, lbl in enumerate(u.labels) if not isinstance(lbl, PacketSet))


def _compatible(source: Label, target: Label) -> bool:
    if is_state_like(source):
        return is_state_like(target) and allowed_states(target) <= allowed_states(source)
    return source == target


def find_cover(source: Pomset, target: Pomset) -> dict[int, int | None] | None:
    """Search a map witnessing that every instance of ``target`` lies in the closure of ``source``.

    Nodes of ``source`` map to nodes of ``target`` or, when optional, to None. The map
    is monotone, respects labels (a choice node may only cover a node whose choices
    it contains), hits every target node, hits non-State target nodes exactly once,
    and sends only optional nodes to optional targets. With both arguments concrete
    the result exists iff ``target`` is a member of ``close({source})``.
    """
    src_plain = Counter(label_key(lbl) for lbl in source.labels if not is_state_like(lbl))
    tgt_plain = Counter(label_key(lbl) for lbl in target.labels if not is_state_like(lbl))
    if src_plain != tgt_plain:
        return None
    candidates: dict[int, list[int | None]] = {}
    for r in source.nodes:
        options: list[int | None] = [
            t
            for t in target.topological
            if _compatible(source.labels[r], target.labels[t]) and (r in source.optional or t not in target.optional)
        ]
        if r in source.optional:
            options.append(None)
        if not options:
            return None
        candidates[r] = options

    order = list(source.topological)
    assignment: dict[int, int | None] = {}
    hits: Counter = Counter()

    def consistent(r: int, t: int) -> bool:
        if not is_state_like(target.labels[t]) and hits[t]:
            return False
        for r2, t2 in assignment.items():
            if t2 is None:
                continue
            if source.leq(r2, r) and not target.leq(t2, t):
                return False
            if source.leq(r, r2) and not target.leq(t, t2):
                return False
        return True

    def search(k: int) -> bool:
        if k == len(order):
            return len(hits) == target.size
        if target.size - len(hits) > len(order) - k:
            return False
        r = order[k]
        for t in candidates[r]:
            if t is not None and not consistent(r, t):
                continue
            assignment[r] = t
            if t is not None:
                hits[t] += 1
            if search(k + 1):
                return True
            if t is not None:
                hits[t] -= 1
                if not hits[t]:
                    del hits[t]
            del assignment[r]
        return False

    return dict(assignment) if search(0) else None


def instances(pattern: Pomset, pick: Callable[[frozenset[State]], Iterable[State]] | None = None) -> Iterator[Pomset]:
    """Every concrete pomset a pattern stands for.

    ``pick`` narrows the states tried for a choice node, e.g. to one per equivalence class.
    """
    optional = sorted(pattern.optional)
    for size in range(len(optional) + 1):
        for dropped in itertools.combinations(optional, size):
            kept, _ = pattern.restrict_with_map(i for i in pattern.nodes if i not in dropped)
            kept = Pomset(kept.labels, kept.less)
            choices = [
                sorted(pick(lbl.states) if pick else lbl.states, key=State.sort_key)
                if isinstance(lbl, StateChoice)
                else [lbl]
                for lbl in kept.labels
            ]
            for combo in itertools.product(*choices):
                yield Pomset(tuple(combo), kept.less)


def to_dot(u: Pomset, name: str = "pomset") -> str:
    """DOT rendering: one node per event, edges of the covering relation."""
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for i, lbl in enumerate(u.labels):
        style = ", style=dashed" if i in u.optional else ""
        text = str(lbl).replace('"', '\\"')
        lines.append(f'  n{i} [label="{text}"{style}];')
    for i, j in u.hasse_edges():
        lines.append(f"  n{i} -> n{j};")
    lines.append("}")
    return "\n".join(lines)
