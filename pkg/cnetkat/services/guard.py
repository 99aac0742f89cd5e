"""Guarded pomsets: executions whose every change of the global store is caused by the run itself.

Membership is decided by decomposing a pomset along the four generating rules:

* a single state;
* a state, an action and the state the action produces;
* two guarded pomsets glued at a shared state;
* two guarded pomsets run in parallel between merged end states.

The same search, with state fibres chosen freely and order extended where a rule
needs it, enumerates the guarded members of the closure of a pomset.
"""
from __future__ import annotations

import itertools
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field

import networkx as nx
import structlog

from cnetkat.domain.enums import GuardRule
from cnetkat.domain.errors import ContractError, DomainError, ResourceBudgetError
from cnetkat.domain.models import Label, PacketSet, State, StateAction, allowed_states, is_state_like
from cnetkat.services import pomset as pom
from cnetkat.services.pomset import Pomset, PomsetLanguage

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class GuardWitness:
    """Derivation of a guarded pomset; ``nodes`` are the covered nodes of the analysed pomset."""

    rule: GuardRule
    nodes: frozenset[int]
    labels: tuple[Label, ...]
    children: tuple[GuardWitness, ...] = ()

    def replay(self) -> Pomset:
        """Rebuild the pomset this derivation produces."""
        match self.rule:
            case GuardRule.STATE:
                return pom.singleton(self.labels[0])
            case GuardRule.ACTION:
                return pom.chain(self.labels)
            case GuardRule.SEQUENCE:
                left, right = (c.replay() for c in self.children)
                bottom = _bottom(right)
                return pom.seq(left, right.restrict(i for i in right.nodes if i != bottom))
            case GuardRule.PARALLEL:
                inner = []
                for child in self.children:
                    u = child.replay()
                    inner.append(u.restrict(i for i in u.nodes if i not in (_bottom(u), _top(u))))
                middle = pom.par(*inner)
                return pom.seq(pom.seq(pom.singleton(self.labels[0]), middle), pom.singleton(self.labels[1]))
        raise ValueError(f"unknown rule {self.rule}")

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children), default=0)


def _bottom(u: Pomset) -> int:
    return next(i for i in u.nodes if len(u.above(i)) == u.size - 1)


def _top(u: Pomset) -> int:
    return next(i for i in u.nodes if len(u.below(i)) == u.size - 1)


def merge_splits(state: State) -> Iterator[tuple[State, State]]:
    """All pairs ``(a, b)`` whose merge is ``state``."""
    items = state.items
    for choice in itertools.product((0, 1, 2), repeat=len(items)):
        left = tuple(item for item, c in zip(items, choice) if c != 1)
        right = tuple(item for item, c in zip(items, choice) if c != 0)
        yield State(left), State(right)


@dataclass(frozen=True)
class _Part:
    fibers: tuple[frozenset[int], ...] = ()
    labels: tuple[Label, ...] = ()
    less: frozenset[tuple[int, int]] = frozenset()

    def then(self, other: _Part) -> _Part:
        n = len(self.fibers)
        shifted = frozenset((i + n, j + n) for i, j in other.less)
        cross = frozenset((i, j + n) for i in range(n) for j in range(len(other.fibers)))
        return _Part(self.fibers + other.fibers, self.labels + other.labels, self.less | shifted | cross)

    def beside(self, other: _Part) -> _Part:
        n = len(self.fibers)
        shifted = frozenset((i + n, j + n) for i, j in other.less)
        return _Part(self.fibers + other.fibers, self.labels + other.labels, self.less | shifted)

    def canonical(self) -> _Part:
        order = sorted(range(len(self.fibers)), key=lambda i: min(self.fibers[i]))
        index = {old: new for new, old in enumerate(order)}
        return _Part(
            tuple(self.fibers[i] for i in order),
            tuple(self.labels[i] for i in order),
            frozenset((index[i], index[j]) for i, j in self.less),
        )


def _node(fiber: frozenset[int], label: Label) -> _Part:
    return _Part((fiber,), (label,))


@dataclass(frozen=True)
class _Shape:
    part: _Part
    witness: GuardWitness = field(compare=False)


class _GuardSearch:
    """Decomposition search over subsets of one pomset's nodes.

    ``shapes(S, pre, post)`` lists the guarded pomsets ``pre·S·post`` that ``S`` can
    be turned into, where ``pre``/``post`` are states already fixed by the caller.
    In exact mode every node is its own fibre and the order must match exactly.
    """

    def __init__(self, x: Pomset, exact: bool, budget: int):
        self.x = x
        self.exact = exact
        self.budget = budget
        self.created = 0
        self._memo: dict[tuple, list[_Shape]] = {}
        self._downsets: dict[frozenset[int], list[frozenset[int]]] = {}

    def _states(self, fiber: Iterable[int]) -> list[State]:
        allowed: frozenset[State] | None = None
        for i in fiber:
            lbl = self.x.labels[i]
            if not is_state_like(lbl):
                return []
            allowed = allowed_states(lbl) if allowed is None else allowed & allowed_states(lbl)
        return sorted(allowed or (), key=State.sort_key)

    def downsets(self, s: frozenset[int]) -> list[frozenset[int]]:
        if s not in self._downsets:
            order = [i for i in self.x.topological if i in s]
            found: list[frozenset[int]] = []

            def grow(k: int, current: frozenset[int]) -> None:
                if k == len(order):
                    found.append(current)
                    return
                i = order[k]
                grow(k + 1, current)
                if (self.x.below(i) & s) <= current:
                    grow(k + 1, current | {i})

            grow(0, frozenset())
            self._downsets[s] = found
        return self._downsets[s]

    def _is_downset(self, d: frozenset[int], s: frozenset[int]) -> bool:
        return all((self.x.below(i) & s) <= d for i in d)

    def shapes(self, s: frozenset[int], pre: State | None, post: State | None) -> list[_Shape]:
        key = (s, pre, post)
        if key not in self._memo:
            found: dict[_Part, _Shape] = {}
            rules = (self._single, self._action, self._glue, self._parallel)
            for shape in itertools.chain.from_iterable(rule(s, pre, post) for rule in rules):
                if shape.part not in found:
                    found[shape.part] = shape
                    self.created += 1
                    if self.created > self.budget:
                        raise ResourceBudgetError("closure", self.budget, self.created)
                if self.exact:
                    break
            self._memo[key] = list(found.values())
        return self._memo[key]

    def _shape(self, part: _Part, witness: GuardWitness) -> _Shape:
        return _Shape(part.canonical(), witness)

    def _single(self, s, pre, post) -> Iterator[_Shape]:
        if not s:
            if (pre is None) != (post is None):
                label = pre if pre is not None else post
                yield self._shape(_Part(), GuardWitness(GuardRule.STATE, s, (label,)))
            return
        if pre is not None or post is not None or (self.exact and len(s) != 1):
            return
        for alpha in self._states(s):
            yield self._shape(_node(s, alpha), GuardWitness(GuardRule.STATE, s, (alpha,)))

    def _action(self, s, pre, post) -> Iterator[_Shape]:
        acts = [i for i in s if isinstance(self.x.labels[i], StateAction)]
        if len(acts) != 1:
            return
        a = acts[0]
        action = self.x.labels[a]
        rest = s - {a}
        if self.exact:
            below = frozenset(i for i in rest if self.x.leq(i, a))
            above = frozenset(i for i in rest if self.x.leq(a, i))
            splits = [(below, above)] if below | above == rest else []
        else:
            splits = [(d, rest - d) for d in self.downsets(s) if a not in d and self._is_downset(d | {a}, s)]
        for before, after in splits:
            if (pre is None) != bool(before) or (post is None) != bool(after):
                continue
            if self.exact and (len(before) > 1 or len(after) > 1):
                continue
            for alpha in [pre] if pre is not None else self._states(before):
                beta = alpha.apply(action)
                if beta is None:
                    continue
                if post is not None and post != beta:
                    continue
                if post is None and beta not in self._states(after):
                    continue
                part = _node(frozenset({a}), action)
                if before:
                    part = _node(before, alpha).then(part)
                if after:
                    part = part.then(_node(after, beta))
                yield self._shape(part, GuardWitness(GuardRule.ACTION, s, (alpha, action, beta)))

    def _glue(self, s, pre, post) -> Iterator[_Shape]:
        if self.exact:
            cuts = []
            for c in s:
                if is_state_like(self.x.labels[c]) and all(self.x.comparable(c, i) for i in s):
                    below = frozenset(i for i in s if (i, c) in self.x.less)
                    cuts.append((below, frozenset({c}), s - below - {c}))
        else:
            downs = [d for d in self.downsets(s) if d and d != s]
            cuts = [(d, e - d, s - e) for d in downs for e in downs if d < e]
        for below, glue, above in cuts:
            if not below or not above:
                continue
            for gamma in self._states(glue):
                lefts = self.shapes(below, pre, gamma)
                if not lefts:
                    continue
                rights = self.shapes(above, gamma, post)
                for left, right in itertools.product(lefts, rights):
                    part = left.part.then(_node(glue, gamma)).then(right.part)
                    witness = GuardWitness(GuardRule.SEQUENCE, s, (gamma,), (left.witness, right.witness))
                    yield self._shape(part, witness)

    def _ends(self, s: frozenset[int], fixed: State | None, bottom: bool) -> list[tuple[frozenset[int], State]]:
        if fixed is not None:
            return [(frozenset(), fixed)]
        if self.exact:
            ends = [
                frozenset({i})
                for i in s
                if all(self.x.leq(i, j) if bottom else self.x.leq(j, i) for j in s)
            ]
        elif bottom:
            ends = [d for d in self.downsets(s) if d]
        else:
            ends = [s - d for d in self.downsets(s) if d != s]
        return [(end, label) for end in ends for label in self._states(end)]

    def _parallel(self, s, pre, post) -> Iterator[_Shape]:
        for low, low_label in self._ends(s, pre, bottom=True):
            for high, high_label in self._ends(s - low, post, bottom=False):
                middle = s - low - high
                if not middle:
                    continue
                graph = nx.Graph()
                graph.add_nodes_from(middle)
                graph.add_edges_from((i, j) for i, j in self.x.less if i in middle and j in middle)
                components = sorted((frozenset(c) for c in nx.connected_components(graph)), key=min)
                if len(components) < 2:
                    continue
                first, others = components[0], components[1:]
                for size in range(len(others)):
                    for extra in itertools.combinations(others, size):
                        left_nodes = first.union(*extra)
                        right_nodes = middle - left_nodes
                        yield from self._parallel_split(s, low, high, low_label, high_label, left_nodes, right_nodes)

    def _parallel_split(self, s, low, high, low_label, high_label, left_nodes, right_nodes) -> Iterator[_Shape]:
        for alpha, gamma in merge_splits(low_label):
            for beta, delta in merge_splits(high_label):
                lefts = self.shapes(left_nodes, alpha, beta)
                if not lefts:
                    continue
                rights = self.shapes(right_nodes, gamma, delta)
                for left, right in itertools.product(lefts, rights):
                    part = left.part.beside(right.part)
                    if low:
                        part = _node(low, low_label).then(part)
                    if high:
                        part = part.then(_node(high, high_label))
                    witness = GuardWitness(
                        GuardRule.PARALLEL, s, (low_label, high_label), (left.witness, right.witness)
                    )
                    yield self._shape(part, witness)


def _store_only(u: Pomset) -> None:
    if any(isinstance(lbl, PacketSet) for lbl in u.labels) or u.optional:
        raise ContractError("guardedness is defined on concrete store pomsets; project packet nodes first")


def is_guarded(u: Pomset, budget: int = 100_000) -> GuardWitness | None:
    """Derivation of ``u`` from the guarded rules, or None.

    Packet-set nodes are projected away first; order through them is kept.
    """
    x = pom.project_state(u)
    if not x.size:
        return None
    search = _GuardSearch(x, exact=True, budget=budget)
    found = search.shapes(frozenset(x.nodes), None, None)
    return found[0].witness if found else None


@dataclass(frozen=True)
class GuardedMember:
    """A guarded pomset in the closure of ``x`` with the fibre map from nodes of ``x`` to its nodes."""

    pomset: Pomset
    fibers: dict[int, int] = field(hash=False)
    witness: GuardWitness


def guarded_closure(x: Pomset, budget: int = 100_000) -> list[GuardedMember]:
    """Every guarded member of ``close({x})`` for a store pomset or pattern without optional nodes."""
    _store_only(x)
    if not x.size:
        return []
    search = _GuardSearch(x, exact=False, budget=budget)
    members = []
    for shape in search.shapes(frozenset(x.nodes), None, None):
        part = shape.part
        fibers = {i: k for k, fiber in enumerate(part.fibers) for i in fiber}
        if any(fibers[i] != fibers[j] and (fibers[i], fibers[j]) not in part.less for i, j in x.less):
            continue
        w = Pomset(part.labels, pom.transitive_closure(len(part.labels), part.less))
        members.append(GuardedMember(w, fibers, shape.witness))
    logger.debug("guarded_closure_computed", nodes=x.size, members=len(members), shapes=search.created)
    return members


def lift_projection(y: Pomset, projection: dict[int, int], member: GuardedMember) -> Pomset | None:
    """Put the packet nodes of ``y`` back around a guarded member of its projection's closure.

    ``projection`` maps the store nodes of ``y`` to the nodes of the projection. Returns
    None when the packet nodes cannot be placed consistently.
    """
    w = member.pomset
    target: dict[int, int] = {}
    labels = list(w.labels)
    for i, lbl in enumerate(y.labels):
        if i in projection:
            target[i] = member.fibers[projection[i]]
        else:
            target[i] = len(labels)
            labels.append(lbl)
    pairs = {(target[i], target[j]) for i, j in y.less if target[i] != target[j]} | set(w.less)
    try:
        return Pomset(tuple(labels), pom.transitive_closure(len(labels), pairs))
    except DomainError:
        return None


def generate_guarded(states: Iterable[State], actions: Iterable[StateAction], max_nodes: int) -> PomsetLanguage:
    """All guarded pomsets with at most ``max_nodes`` nodes, built bottom-up from the rules."""
    states = list(states)
    language = PomsetLanguage(pom.singleton(alpha) for alpha in states)
    for alpha, act in itertools.product(states, actions):
        beta = alpha.apply(act)
        if beta is not None and max_nodes >= 3:
            language.add(pom.chain((alpha, act, beta)))
    framed: list[Pomset] = []
    fresh = [u for u in language if u.size >= 3]
    while fresh:
        framed.extend(fresh)
        recent = set(fresh)
        produced: list[Pomset] = []
        for u, v in itertools.product(framed, repeat=2):
            if u not in recent and v not in recent:
                continue
            for built in _combine(u, v, max_nodes):
                if language.add(built):
                    produced.append(built)
        fresh = produced
    return language


def _combine(u: Pomset, v: Pomset, max_nodes: int) -> Iterator[Pomset]:
    """Glue ``u`` and ``v`` at a shared state, and run their insides in parallel."""
    ub, ut, vb, vt = _bottom(u), _top(u), _bottom(v), _top(v)
    if u.size + v.size - 1 <= max_nodes and u.labels[ut] == v.labels[vb]:
        yield pom.seq(u, v.restrict(i for i in v.nodes if i != vb))
    low = u.labels[ub].merge(v.labels[vb])
    high = u.labels[ut].merge(v.labels[vt])
    if u.size + v.size - 2 <= max_nodes and low is not None and high is not None:
        inner_u = u.restrict(i for i in u.nodes if i not in (ub, ut))
        inner_v = v.restrict(i for i in v.nodes if i not in (vb, vt))
        yield pom.seq(pom.seq(pom.singleton(low), pom.par(inner_u, inner_v)), pom.singleton(high))


# Paths, bottlenecks and necessary conditions
@dataclass(frozen=True)
class PathWitness:
    var: str
    nodes: tuple[int, ...]


def _covering(u: Pomset, i: int, upward: bool) -> list[int]:
    """State nodes immediately above (or below) ``i``."""
    near = u.above(i) if upward else u.below(i)
    result = []
    for j in near:
        between = u.above(i) & u.below(j) if upward else u.below(i) & u.above(j)
        if not between and isinstance(u.labels[j], State):
            result.append(j)
    return sorted(result)


def successor(u: Pomset, i: int) -> int | None:
    found = _covering(u, i, upward=True)
    return found[0] if len(found) == 1 else None


def predecessor(u: Pomset, i: int) -> int | None:
    found = _covering(u, i, upward=False)
    return found[0] if len(found) == 1 else None


def _next_value(action: StateAction, before: State, var: str) -> str | None:
    if action.var == var:
        if action.value is not None:
            return action.value
        if action.source in before.domain:
            return before.get(action.source)
    return before.get(var)


def find_path(u: Pomset, var: str, start: int, end: int) -> PathWitness | None:
    """A chain of actions explaining every change of ``var`` between two state nodes."""
    first, last = u.labels[start], u.labels[end]
    if not isinstance(first, State) or not isinstance(last, State) or not u.leq(start, end):
        raise ContractError("a path runs between two ordered state nodes")
    if var not in first.domain:
        return None
    if first == last:
        return PathWitness(var, (start,))
    actions = [
        a for a in u.topological if isinstance(u.labels[a], StateAction) and u.leq(start, a) and u.leq(a, end)
    ]

    def extend(q: int, trail: tuple[int, ...], after: int | None) -> PathWitness | None:
        for a in actions:
            if after is not None and not u.leq(after, a):
                continue
            if predecessor(u, a) != q:
                continue
            nxt = successor(u, a)
            if nxt is None:
                continue
            expected = _next_value(u.labels[a], u.labels[q], var)
            if expected is None or u.labels[nxt].get(var) != expected:
                continue
            path = trail + (a, nxt)
            if u.labels[nxt] == last:
                return PathWitness(var, path)
            found = extend(nxt, path, a)
            if found is not None:
                return found
        return None

    for q in u.topological:
        if u.labels[q] == first:
            found = extend(q, (q,), None)
            if found is not None:
                return found
    return None


def is_bottleneck(u: Pomset, u0: int, u1: int, u2: int) -> bool:
    if not (u.leq(u0, u1) and u.leq(u1, u2)):
        return False
    return all(u.comparable(u1, u3) for u3 in u.nodes if u.leq(u0, u3))


def check_a5(u: Pomset) -> bool:
    """Every value assignment is followed by a state holding the assigned value."""
    for i, lbl in enumerate(u.labels):
        if isinstance(lbl, StateAction) and lbl.value is not None:
            nxt = successor(u, i)
            if nxt is None or u.labels[nxt].get(lbl.var) != lbl.value:
                return False
    return True


def check_a7(u: Pomset) -> bool:
    """Every variable a state knows is traced back to the start or to an assignment of it."""
    for w, lbl in enumerate(u.labels):
        if not isinstance(lbl, State):
            continue
        for var in lbl.domain:
            sources = [s for s in u.nodes if isinstance(u.labels[s], State) and u.leq(s, w)]
            if not any(_explains(u, var, s, w) for s in sources):
                return False
    return True


def _explains(u: Pomset, var: str, s: int, w: int) -> bool:
    at_start = not u.below(s) and var in u.labels[s].domain
    after_write = any(
        isinstance(u.labels[a], StateAction) and u.labels[a].var == var and successor(u, a) == s for a in u.below(s)
    )
    return (at_start or after_write) and find_path(u, var, s, w) is not None


# The running example's ordering property
@dataclass(frozen=True)
class OrderProperty:
    """Labels that pin down two racing branches of a program.

    ``first``/``second`` are the only assignments to ``var``; ``early``/``late`` select the
    packet that must be recorded before (resp. after) the race.
    """

    var: str = "v"
    first: str = "0"
    second: str = "1"
    early: tuple[tuple[str, str], ...] = (("sw", "3"), ("type", "heart"))
    late: tuple[tuple[str, str], ...] = (("sw", "2"), ("type", "spade"))

    def mentions(self, label: Label, selector: tuple[tuple[str, str], ...]) -> bool:
        return isinstance(label, PacketSet) and any(all(pk[f] == n for f, n in selector) for pk in label)

    def exactly(self, label: Label, selector: tuple[tuple[str, str], ...]) -> bool:
        return isinstance(label, PacketSet) and len(label) == 1 and self.mentions(label, selector)

    def observes_second(self, label: Label) -> bool:
        allowed = allowed_states(label)
        return bool(allowed) and all(s.get(self.var) == self.second for s in allowed)


RUNNING_EXAMPLE = OrderProperty()


def has_property_p(u: Pomset, prop: OrderProperty = RUNNING_EXAMPLE) -> dict[str, int] | None:
    """Nodes ``u1..u5`` witnessing the ordering property, or None."""
    writes = [i for i, lbl in enumerate(u.labels) if isinstance(lbl, StateAction) and lbl.var == prop.var]
    firsts = [i for i in writes if u.labels[i].value == prop.first]
    seconds = [i for i in writes if u.labels[i].value == prop.second]
    for u1, u2 in itertools.product(firsts, seconds):
        if set(writes) - {u1, u2}:
            continue
        if not all(u.comparable(z, u1) for z in u.nodes):
            continue
        for u3, u4, u5 in itertools.product(u.nodes, u.nodes, u.nodes):
            if not (prop.observes_second(u.labels[u3]) and prop.exactly(u.labels[u4], prop.early)):
                continue
            if not prop.exactly(u.labels[u5], prop.late):
                continue
            if not (u.leq(u1, u3) and u.leq(u3, u5) and u.leq(u1, u4) and u.leq(u4, u2)):
                continue
            if any(prop.mentions(u.labels[z], prop.early) and not u.leq(u4, z) for z in u.nodes):
                continue
            if any(prop.mentions(u.labels[z], prop.late) and not u.leq(u5, z) for z in u.nodes):
                continue
            return {"u1": u1, "u2": u2, "u3": u3, "u4": u4, "u5": u5}
    return None


def verify_order(u: Pomset, prop: OrderProperty = RUNNING_EXAMPLE) -> bool:
    """For a guarded pomset with the ordering property, whether the second write precedes the observation.

    Raises:
        ContractError: The property fails or the store projection is not guarded.
    """
    found = has_property_p(u, prop)
    if found is None:
        raise ContractError("pomset lacks the ordering property")
    if is_guarded(u) is None:
        raise ContractError("pomset is not guarded")
    return u.leq(found["u2"], found["u3"])


@dataclass
class OrderReport:
    traces: int = 0
    instances: int = 0
    qualifying: int = 0
    guarded_members: int = 0
    violations: list[Pomset] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.violations


def present_subsets(pattern: Pomset) -> Iterator[Pomset]:
    """The pattern with each subset of its optional nodes dropped; choice labels stay."""
    optional = sorted(pattern.optional)
    for size in range(len(optional) + 1):
        for dropped in itertools.combinations(optional, size):
            kept = pattern.restrict(i for i in pattern.nodes if i not in dropped)
            yield Pomset(kept.labels, kept.less)


def order_analysis(
    pomsets: Iterable[Pomset], prop: OrderProperty = RUNNING_EXAMPLE, budget: int = 100_000
) -> OrderReport:
    """Check every guarded closure member of every qualifying trace against the ordering claim.

    A state that observes the second value and follows the first write must also follow
    the second write.
    """
    report = OrderReport()
    for pattern in pomsets:
        report.traces += 1
        for y in present_subsets(pattern):
            report.instances += 1
            if has_property_p(y, prop) is None:
                continue
            report.qualifying += 1
            x, projection = pom.project_state_with_map(y)
            writes = {
                y.labels[i].value: projection[i]
                for i in projection
                if isinstance(y.labels[i], StateAction) and y.labels[i].var == prop.var
            }
            for member in guarded_closure(x, budget):
                report.guarded_members += 1
                w, h = member.pomset, member.fibers
                first, second = h[writes[prop.first]], h[writes[prop.second]]
                for k, lbl in enumerate(w.labels):
                    if isinstance(lbl, State) and lbl.get(prop.var) == prop.second and w.leq(first, k):
                        if not w.leq(second, k):
                            report.violations.append(w)
                            break
    logger.info(
        "order_analysis_completed",
        traces=report.traces,
        qualifying=report.qualifying,
        guarded=report.guarded_members,
        violations=len(report.violations),
    )
    return report
