"""Trace semantics of programs, its closed variant, and bounded inclusion checks.

A program maps an input packet set to a set of traces ``u·b``: a pomset ``u`` of
global events and an output packet set ``b``. Unbounded pieces of the semantics
are cut at two knobs: ``star_bound`` unrollings of a star and ``pad_bound``
State nodes of padding on each side of an observation or action. Padding and
observation nodes are kept symbolic as (optional) choice nodes.
"""
from __future__ import annotations

import itertools
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass

import structlog
from pydantic import BaseModel, ConfigDict, Field

from cnetkat.domain.ast import (
    Abort,
    Complete,
    Dup,
    FieldAssign,
    Observe,
    Par,
    Pi,
    PacketLiteral,
    Program,
    Seq,
    Skip,
    Star,
    Test,
    Union,
    VarAssign,
    VarCopy,
)
from cnetkat.domain.enums import CheckMode, Verdict
from cnetkat.domain.errors import ClassificationError, ResourceBudgetError
from cnetkat.domain.models import Label, Packet, PacketSet, State, StateChoice, Universe, allowed_states, is_state_like
from cnetkat.services import pomset as pom
from cnetkat.services.observations import bsem, osem
from cnetkat.services.pomset import Pomset, PomsetLanguage
from cnetkat.services.syntax import contains_dup, is_packet_program, is_state_program

logger = structlog.get_logger(__name__)


class EvalConfig(BaseModel):
    """Bounds and budgets of an evaluation."""

    model_config = ConfigDict(frozen=True)

    star_bound: int = Field(default=3, ge=0, description="Unrollings of each star (K)")
    pad_bound: int = Field(default=1, ge=0, description="State padding nodes per side (P)")
    node_budget: int = Field(default=24, ge=1, description="Largest pomset allowed")
    closure_budget: int = Field(default=100_000, ge=1, description="Largest closure or search population")
    trace_budget: int = Field(default=100_000, ge=1, description="Largest trace set allowed")
    q_budget: int = Field(default=256, ge=1, description="Largest normal-form state space")

    @property
    def bounds_label(self) -> str:
        return f"up to K={self.star_bound},P={self.pad_bound}"


@dataclass(frozen=True)
class Trace:
    """One execution: global events and the packets it outputs.

    ``output`` is None for traces of store-only languages that carry no packets.
    """

    pomset: Pomset
    output: PacketSet | None

    def __str__(self) -> str:
        return f"{self.pomset}·{self.output if self.output is not None else '-'}"


def _output_key(output: PacketSet | None) -> tuple:
    return (-1,) if output is None else output.sort_key()


class TraceSet:
    """Traces deduplicated up to pomset isomorphism and output equality."""

    def __init__(
        self, traces: Iterable[Trace] = (), bounds_hit: bool = False, saturated: bool = True, padded: bool = False
    ):
        self._by_output: dict[PacketSet | None, PomsetLanguage] = {}
        self._size = 0
        self.bounds_hit = bounds_hit
        self.saturated = saturated
        self.padded = padded
        for t in traces:
            self.add(t)

    def add(self, trace: Trace) -> bool:
        added = self._by_output.setdefault(trace.output, PomsetLanguage()).add(trace.pomset)
        self._size += added
        return added

    def __contains__(self, trace: object) -> bool:
        if not isinstance(trace, Trace):
            return False
        return trace.output in self._by_output and trace.pomset in self._by_output[trace.output]

    def __iter__(self) -> Iterator[Trace]:
        for output in self.outputs():
            for u in self._by_output[output]:
                yield Trace(u, output)

    def __len__(self) -> int:
        return self._size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TraceSet):
            return NotImplemented
        return len(self) == len(other) and all(t in other for t in self)

    def outputs(self) -> list[PacketSet | None]:
        return sorted(self._by_output, key=_output_key)

    def pomsets_for(self, output: PacketSet | None) -> list[Pomset]:
        return list(self._by_output.get(output, ()))

    @property
    def bounded(self) -> bool:
        """Whether a verdict drawn from this set only holds up to the bounds."""
        return self.bounds_hit or self.padded

    def with_output(self, output: PacketSet | None) -> TraceSet:
        return TraceSet((Trace(t.pomset, output) for t in self), self.bounds_hit, self.saturated, self.padded)

    def materialize(self, trace_budget: int = 100_000) -> TraceSet:
        """Expand choice and optional nodes into concrete traces."""
        result = TraceSet(bounds_hit=self.bounds_hit, saturated=self.saturated, padded=self.padded)
        for t in self:
            for u in pom.instances(t.pomset):
                result.add(Trace(u, t.output))
                if len(result) > trace_budget:
                    raise ResourceBudgetError("trace", trace_budget, len(result))
        return result


class ClosedTraceSet:
    """Closure of a trace set under subsumption and contraction, kept implicit.

    Membership is decided against the generating patterns, never by expanding them.
    """

    def __init__(self, generators: TraceSet):
        self.generators = generators

    def __contains__(self, trace: object) -> bool:
        if not isinstance(trace, Trace):
            return False
        return included_in_closure(TraceSet([trace]), self.generators) is None

    def __iter__(self) -> Iterator[Trace]:
        return iter(self.generators)

    def __len__(self) -> int:
        return len(self.generators)

    @property
    def bounded(self) -> bool:
        return self.generators.bounded

    def issubset(self, other: ClosedTraceSet) -> bool:
        return included_in_closure(self.generators, other.generators) is None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ClosedTraceSet):
            return NotImplemented
        return self.issubset(other) and other.issubset(self)

    def materialize(self, cfg: EvalConfig) -> TraceSet:
        """Every concrete member, as an explicit trace set."""
        result = TraceSet(bounds_hit=self.generators.bounds_hit, padded=self.generators.padded)
        for t in self.generators.materialize(cfg.trace_budget):
            for u in pom.close([t.pomset], cfg.node_budget, cfg.closure_budget):
                result.add(Trace(u, t.output))
                if len(result) > cfg.trace_budget:
                    raise ResourceBudgetError("trace", cfg.trace_budget, len(result))
        return result


def _state_node(states: frozenset[State]) -> Label:
    if len(states) == 1:
        return next(iter(states))
    return StateChoice(states)


class Evaluator:
    """Compositional evaluator for one universe and configuration; memoizes per (program, input)."""

    def __init__(self, universe: Universe, cfg: EvalConfig):
        self.universe = universe
        self.cfg = cfg
        self.bounds_hit = False
        self.saturated = True
        self.padded = False
        self._memo: dict[tuple[Program, PacketSet], TraceSet] = {}
        self._pad = _state_node(frozenset(universe.states))

    def run(self, p: Program, a: PacketSet) -> TraceSet:
        traces = self.eval(p, a)
        return TraceSet(traces, bounds_hit=self.bounds_hit, saturated=self.saturated, padded=self.padded)

    def _collect(self, traces: Iterable[Trace]) -> TraceSet:
        result = TraceSet()
        for t in traces:
            if t.pomset.size > self.cfg.node_budget:
                raise ResourceBudgetError("node", self.cfg.node_budget, t.pomset.size)
            result.add(t)
            if len(result) > self.cfg.trace_budget:
                raise ResourceBudgetError("trace", self.cfg.trace_budget, len(result))
        return result

    def padded_node(self, label: Label) -> Pomset:
        """``label`` between two runs of up to ``pad_bound`` arbitrary states."""
        self.padded = True
        k = self.cfg.pad_bound
        line = pom.chain((self._pad,) * k + (label,) + (self._pad,) * k)
        return Pomset(line.labels, line.less, frozenset(i for i in line.nodes if i != k))

    def eval(self, p: Program, a: PacketSet) -> TraceSet:
        key = (p, a)
        if key not in self._memo:
            self._memo[key] = self._eval(p, a)
        return self._memo[key]

    def _then(self, traces: Iterable[Trace], q: Program) -> Iterator[Trace]:
        for t in traces:
            for s in self.eval(q, t.output):
                yield Trace(pom.seq(t.pomset, s.pomset), s.output)

    def _eval(self, p: Program, a: PacketSet) -> TraceSet:
        one = Trace(pom.empty(), a)
        if not a:
            return self._collect([one])
        match p:
            case Abort():
                return TraceSet()
            case Skip():
                return self._collect([one])
            case Test(pred=t):
                return self._collect([Trace(pom.empty(), bsem(t, a))])
            case FieldAssign(field=f, value=n):
                return self._collect([Trace(pom.empty(), a.update(f, n))])
            case Observe(obs=o):
                states = osem(o, self.universe)
                if not states:
                    return TraceSet()
                return self._collect([Trace(self.padded_node(_state_node(states)), a)])
            case VarAssign() | VarCopy():
                return self._collect([Trace(self.padded_node(p.action), a)])
            case Dup():
                return self._collect([Trace(pom.singleton(a), a)])
            case PacketLiteral(packets=b):
                return self._collect([Trace(pom.singleton(b), a)])
            case Complete(atom=atom):
                if atom.is_test:
                    return self._collect([Trace(pom.empty(), a & PacketSet.of([atom.packet]))])
                return self._collect([Trace(pom.empty(), PacketSet.of([atom.packet]))])
            case Pi(expr=expr):
                return self._collect([Trace(pom.empty(), expr.packet_set)])
            case Union(left=left, right=right):
                return self._collect(itertools.chain(self.eval(left, a), self.eval(right, a)))
            case Seq(left=left, right=right):
                return self._collect(self._then(self.eval(left, a), right))
            case Par(left=left, right=right):
                return self._collect(
                    Trace(pom.par(t.pomset, s.pomset), t.output | s.output)
                    for t in self.eval(left, a)
                    for s in self.eval(right, a)
                )
            case Star(body=body):
                return self._star(body, a)
        raise TypeError(f"not a program: {p!r}")

    def _star(self, body: Program, a: PacketSet) -> TraceSet:
        result = self._collect([Trace(pom.empty(), a)])
        frontier = list(result)
        for _ in range(self.cfg.star_bound):
            fresh = [t for t in self._collect(self._then(frontier, body)) if result.add(t)]
            if len(result) > self.cfg.trace_budget:
                raise ResourceBudgetError("trace", self.cfg.trace_budget, len(result))
            frontier = fresh
            if not frontier:
                return result
        # One more unrolling, only to learn whether the bound cut anything off.
        known_outputs = {t.output for t in result}
        try:
            extra = [t for t in self._collect(self._then(frontier, body)) if t not in result]
        except ResourceBudgetError:
            self.bounds_hit = True
            self.saturated = False
            return result
        if extra:
            self.bounds_hit = True
        if any(t.output not in known_outputs for t in extra):
            self.saturated = False
        return result


def evaluate(p: Program, a: PacketSet, cfg: EvalConfig, universe: Universe) -> TraceSet:
    """Trace set of ``p`` on input ``a`` at the bounds of ``cfg``.

    Raises:
        ResourceBudgetError: A pomset or the trace set outgrew its budget.
    """
    try:
        result = Evaluator(universe, cfg).run(p, a)
    except ResourceBudgetError as e:
        logger.error("eval_failed", error=str(e))
        raise
    logger.debug("eval_completed", traces=len(result), bounds_hit=result.bounds_hit, saturated=result.saturated)
    return result


def eval_closed(p: Program, a: PacketSet, cfg: EvalConfig, universe: Universe) -> ClosedTraceSet:
    return ClosedTraceSet(evaluate(p, a, cfg, universe))


def star_iterations(body: Program, a: PacketSet, cfg: EvalConfig, universe: Universe) -> list[list[PacketSet]]:
    """Output sets reached after each unrolling of ``body*`` on ``a``, starting with ``a`` itself."""
    evaluator = Evaluator(universe, cfg)
    layers: list[list[PacketSet]] = [[a]]
    current = {a}
    for _ in range(cfg.star_bound):
        current = {t.output for b in current for t in evaluator.eval(body, b)}
        layers.append(sorted(current, key=PacketSet.sort_key))
    return layers


def eval_netkat(p: Program, pk: Packet) -> PacketSet:
    """Single-packet semantics of a parallel-free packet program."""
    match p:
        case Test(pred=t):
            return bsem(t, PacketSet.of([pk]))
        case FieldAssign(field=f, value=n):
            return PacketSet.of([pk.update(f, n)])
        case Complete(atom=atom):
            if atom.is_test:
                return PacketSet.of([pk]) if pk == atom.packet else PacketSet()
            return PacketSet.of([atom.packet])
        case Pi(expr=expr) if len(expr.packets) <= 1:
            return expr.packet_set
        case Union(left=left, right=right):
            return eval_netkat(left, pk) | eval_netkat(right, pk)
        case Seq(left=left, right=right):
            result = PacketSet()
            for mid in eval_netkat(left, pk):
                result = result | eval_netkat(right, mid)
            return result
        case Star(body=body):
            reached = {pk}
            work = [pk]
            while work:
                for nxt in eval_netkat(body, work.pop()):
                    if nxt not in reached:
                        reached.add(nxt)
                        work.append(nxt)
            return PacketSet.of(reached)
    raise ClassificationError(f"not a NetKAT term: {type(p).__name__}")


class PockaEvaluator:
    """Pomset-language semantics of store-only programs, with packet sets as plain letters."""

    def __init__(self, universe: Universe, cfg: EvalConfig):
        self.universe = universe
        self.cfg = cfg
        self.bounds_hit = False
        self.padded = False
        self._helper = Evaluator(universe, cfg)
        self._memo: dict[Program, PomsetLanguage] = {}

    def _language(self, pomsets: Iterable[Pomset]) -> PomsetLanguage:
        result = PomsetLanguage()
        for u in pomsets:
            if u.size > self.cfg.node_budget:
                raise ResourceBudgetError("node", self.cfg.node_budget, u.size)
            result.add(u)
            if len(result) > self.cfg.trace_budget:
                raise ResourceBudgetError("trace", self.cfg.trace_budget, len(result))
        return result

    def eval(self, s: Program) -> PomsetLanguage:
        if s not in self._memo:
            self._memo[s] = self._eval(s)
        return self._memo[s]

    def _eval(self, s: Program) -> PomsetLanguage:
        match s:
            case Abort():
                return PomsetLanguage()
            case Skip():
                return PomsetLanguage([pom.empty()])
            case Observe(obs=o):
                states = osem(o, self.universe)
                return self._language([self._padded(_state_node(states))] if states else [])
            case VarAssign() | VarCopy():
                return self._language([self._padded(s.action)])
            case PacketLiteral(packets=b):
                return PomsetLanguage([pom.singleton(b)])
            case Union(left=left, right=right):
                return self._language(itertools.chain(self.eval(left), self.eval(right)))
            case Seq(left=left, right=right):
                return self._language(pom.seq(u, v) for u in self.eval(left) for v in self.eval(right))
            case Par(left=left, right=right):
                return self._language(pom.par(u, v) for u in self.eval(left) for v in self.eval(right))
            case Star(body=body):
                result = PomsetLanguage([pom.empty()])
                frontier = list(result)
                for _ in range(self.cfg.star_bound):
                    step = self._language(pom.seq(u, v) for u in frontier for v in self.eval(body))
                    frontier = [w for w in step if result.add(w)]
                    if not frontier:
                        return result
                if any(pom.seq(u, v) not in result for u in frontier for v in self.eval(body)):
                    self.bounds_hit = True
                return result
        raise ClassificationError(f"not a store-only program: {type(s).__name__}")

    def _padded(self, label: Label) -> Pomset:
        self.padded = True
        return self._helper.padded_node(label)


def eval_pocka(s: Program, cfg: EvalConfig, universe: Universe) -> TraceSet:
    """Language of a dup-free state program, as traces without output.

    Raises:
        ClassificationError: ``s`` is not a dup-free state program.
    """
    if not is_state_program(s) or contains_dup(s):
        raise ClassificationError("POCKA semantics needs a dup-free state program")
    evaluator = PockaEvaluator(universe, cfg)
    language = evaluator.eval(s)
    return TraceSet((Trace(u, None) for u in language), bounds_hit=evaluator.bounds_hit, padded=evaluator.padded)


# Inclusion of closed trace sets
def _profiles(rights: Sequence[Pomset]) -> list[frozenset[State]]:
    sets = {allowed_states(lbl) for r in rights for lbl in r.labels if is_state_like(lbl)}
    return sorted(sets, key=lambda z: sorted(s.items for s in z))


def _representatives(rights: Sequence[Pomset]):
    """One state per class of states that no choice set on the right tells apart."""
    profiles = _profiles(rights)

    def pick(states: frozenset[State]) -> list[State]:
        chosen: dict[tuple[bool, ...], State] = {}
        for s in sorted(states, key=State.sort_key):
            chosen.setdefault(tuple(s in z for z in profiles), s)
        return list(chosen.values())

    return pick


def _uncovered_instance(left: Pomset, rights: Sequence[Pomset]) -> Pomset | None:
    """An instance of ``left`` outside the closure of every right pattern, if any."""
    if any(pom.find_cover(r, left) is not None for r in rights):
        return None
    for inst in pom.instances(left, _representatives(rights)):
        if not any(pom.find_cover(r, inst) is not None for r in rights):
            return inst
    return None


def included_in_closure(left: TraceSet, right: TraceSet) -> Trace | None:
    """Check that every trace of ``left`` lies in the closure of ``right``.

    Returns:
        None when included, otherwise a concrete counterexample trace.
    """
    for t in left:
        rights = right.pomsets_for(t.output)
        missing = _uncovered_instance(t.pomset, rights)
        if missing is not None:
            return Trace(missing, t.output)
    return None


@dataclass(frozen=True)
class ComparisonResult:
    input: PacketSet
    holds: bool
    bounded: bool
    mode: CheckMode
    counterexample: Trace | None = None
    direction: str | None = None

    @property
    def verdict(self) -> Verdict:
        if self.mode is CheckMode.INCLUSION:
            return Verdict.INCLUDED if self.holds else Verdict.NOT_INCLUDED
        return Verdict.EQUIVALENT if self.holds else Verdict.NOT_EQUIVALENT

    def describe(self, cfg: EvalConfig) -> str:
        text = self.verdict.value
        if self.bounded:
            text += f" ({cfg.bounds_label})"
        return text


def check_inclusion(
    p: Program,
    q: Program,
    inputs: Iterable[PacketSet],
    cfg: EvalConfig,
    universe: Universe,
    rhs_cfg: EvalConfig | None = None,
) -> list[ComparisonResult]:
    """Per input ``a``, whether the closed semantics of ``p`` is included in that of ``q``.

    Only the right side is closed: a trace set is included in a closed set iff its
    closure is. ``rhs_cfg`` evaluates ``q`` at different bounds.
    """
    results = []
    for a in inputs:
        lhs = evaluate(p, a, cfg, universe)
        rhs = evaluate(q, a, rhs_cfg or cfg, universe)
        missing = included_in_closure(lhs, rhs)
        results.append(ComparisonResult(a, missing is None, lhs.bounded or rhs.bounded, CheckMode.INCLUSION, missing))
        logger.debug("inclusion_checked", input=str(a), included=missing is None)
    return results


def check_equiv(
    p: Program, q: Program, inputs: Iterable[PacketSet], cfg: EvalConfig, universe: Universe
) -> list[ComparisonResult]:
    """Per input, whether ``p`` and ``q`` have the same closed semantics."""
    results = []
    for a in inputs:
        lhs = evaluate(p, a, cfg, universe)
        rhs = evaluate(q, a, cfg, universe)
        bounded = lhs.bounded or rhs.bounded
        missing = included_in_closure(lhs, rhs)
        if missing is not None:
            results.append(ComparisonResult(a, False, bounded, CheckMode.EQUIVALENCE, missing, "left"))
            continue
        missing = included_in_closure(rhs, lhs)
        direction = "right" if missing else None
        results.append(ComparisonResult(a, missing is None, bounded, CheckMode.EQUIVALENCE, missing, direction))
    return results


def netkat_outputs(p: Program, pk: Packet, cfg: EvalConfig, universe: Universe) -> PacketSet:
    """Packets output by traces with an empty pomset; agrees with ``eval_netkat`` on NetKAT terms."""
    if not is_packet_program(p):
        raise ClassificationError("not a packet program")
    result = PacketSet()
    for t in evaluate(p, PacketSet.of([pk]), cfg, universe):
        if t.pomset.size == 0:
            result = result | t.output
    return result

