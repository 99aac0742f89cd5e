"""Executable analyses of the bundled example networks."""
from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass, field
from pathlib import Path

import structlog

from cnetkat.domain.ast import Par, Program, Seq, Star, Union
from cnetkat.domain.errors import DomainError
from cnetkat.domain.models import PacketSet, StateAction, Universe
from cnetkat.services import pomset as pom
from cnetkat.services.guard import (
    GuardWitness,
    OrderReport,
    guarded_closure,
    lift_projection,
    order_analysis,
    present_subsets,
)
from cnetkat.services.pomset import Pomset
from cnetkat.services.semantics import (
    ClosedTraceSet,
    EvalConfig,
    Trace,
    TraceSet,
    check_inclusion,
    evaluate,
    star_iterations,
)
from cnetkat.services.syntax import Module, parse_module

logger = structlog.get_logger(__name__)

PROGRAMS_DIR = Path(__file__).resolve().parent.parent / "programs"


def bundled_programs() -> list[str]:
    return sorted(p.name for p in PROGRAMS_DIR.glob("*.cnk"))


def load_program(name: str) -> Module:
    """Parse a program shipped with the package, by file name."""
    path = PROGRAMS_DIR / name
    if not path.is_file():
        raise DomainError(f"no bundled program named '{name}'")
    return parse_module(path.read_text(encoding="utf-8"))


def first_star(p: Program) -> Program | None:
    """Body of the leftmost outermost star in ``p``."""
    match p:
        case Star(body=body):
            return body
        case Seq(left=left, right=right) | Union(left=left, right=right) | Par(left=left, right=right):
            return first_star(left) or first_star(right)
    return None


def running_input(universe: Universe) -> PacketSet:
    return universe.packet_set({"sw": 1, "type": "heart"}, {"sw": 1, "type": "spade"})


def running_output(universe: Universe) -> PacketSet:
    return universe.packet_set({"sw": 4, "type": "heart"}, {"sw": 4, "type": "spade"})


def overview_pomset(universe: Universe) -> Pomset:
    """The run in which the heart packet reaches switch 3 before the spade packet reaches switch 2."""

    def at(*places: tuple[int, str]) -> PacketSet:
        return universe.packet_set(*({"sw": sw, "type": kind} for sw, kind in places))

    labels = [
        StateAction("v", value="0"),
        at((1, "heart"), (1, "spade")),
        at((1, "heart")),
        at((3, "heart")),
        StateAction("v", value="1"),
        universe.state(v=1),
        at((1, "spade")),
        at((2, "spade")),
        at((2, "spade")),
        at((3, "heart")),
        at((4, "spade")),
        at((4, "heart")),
        at((4, "heart"), (4, "spade")),
    ]
    pairs = [(i, i + 1) for i in range(7)] + [(7, 8), (7, 9), (8, 10), (9, 11), (10, 12), (11, 12)]
    return pom.make(labels, pairs)


@dataclass
class RunningExampleReport:
    star_bound: int
    pad_bound: int
    iterations: list[list[PacketSet]]
    outputs: list[PacketSet]
    bounds_hit: bool
    saturated: bool
    contains_overview: bool
    q_included: bool
    order: OrderReport

    @property
    def passed(self) -> bool:
        return self.contains_overview and self.q_included and self.order.holds


def running_example_report(star_bound: int = 3, pad_bound: int = 1, order_star_bound: int = 2) -> RunningExampleReport:
    """Outputs, the overview run, the inclusion of ``q`` and the ordering claim for the running example."""
    module = load_program("running_sw4.cnk")
    universe, p = module.universe, module.program
    cfg = EvalConfig(star_bound=star_bound, pad_bound=pad_bound)
    a = running_input(universe)

    traces = evaluate(p, a, cfg, universe)
    overview = Trace(overview_pomset(universe), running_output(universe))
    q = load_program("q.cnk").program
    [inclusion] = check_inclusion(q, p, [a], cfg, universe)

    plain = load_program("running.cnk").program
    order_cfg = EvalConfig(star_bound=order_star_bound, pad_bound=pad_bound)
    order = order_analysis((t.pomset for t in evaluate(plain, a, order_cfg, universe)), budget=cfg.closure_budget)

    report = RunningExampleReport(
        star_bound=star_bound,
        pad_bound=pad_bound,
        iterations=star_iterations(first_star(p), a, cfg, universe),
        outputs=[b for b in traces.outputs() if b is not None],
        bounds_hit=traces.bounds_hit,
        saturated=traces.saturated,
        contains_overview=overview in ClosedTraceSet(traces),
        q_included=inclusion.holds,
        order=order,
    )
    logger.info("running_example_analyzed", passed=report.passed, outputs=len(report.outputs))
    return report


@dataclass
class RaceReport:
    """A guarded run of a composed program ending in the racy output, if one exists."""

    name: str
    input: PacketSet
    output: PacketSet
    traces: int
    trace: Pomset | None = None
    guarded: Pomset | None = None
    witness: GuardWitness | None = field(default=None, repr=False)

    @property
    def found(self) -> bool:
        return self.guarded is not None


@dataclass(frozen=True)
class GuardedTrace:
    """A guarded member of the closure of ``source``, packet nodes put back in place."""

    source: Trace
    trace: Trace
    witness: GuardWitness


def iter_guarded(
    traces: TraceSet, budget: int = 100_000, output: PacketSet | None = None
) -> Iterator[GuardedTrace]:
    """Guarded closure members of every trace, optionally only those ending in ``output``."""
    for t in traces:
        if output is not None and t.output != output:
            continue
        for y in present_subsets(t.pomset):
            x, projection = pom.project_state_with_map(y)
            if not x.size:
                continue
            for member in guarded_closure(x, budget):
                lifted = lift_projection(y, projection, member)
                if lifted is not None:
                    yield GuardedTrace(Trace(y, t.output), Trace(lifted, t.output), member.witness)


def guarded_traces(traces: TraceSet, budget: int = 100_000) -> list[GuardedTrace]:
    """Distinct guarded traces in the closure of ``traces``."""
    seen = TraceSet()
    return [g for g in iter_guarded(traces, budget) if seen.add(g.trace)]


def _race(name: str, first: str, second: str, a: PacketSet, output: PacketSet, cfg: EvalConfig) -> RaceReport:
    left, right = load_program(first), load_program(second)
    universe = left.universe
    traces = evaluate(Seq(left.program, right.program), a, cfg, universe)
    report = RaceReport(name, a, output, len(traces))
    found = next(iter_guarded(traces, cfg.closure_budget, output), None)
    if found is not None:
        report.trace, report.guarded, report.witness = found.source.pomset, found.trace.pomset, found.witness
    logger.info("race_analyzed", race=name, found=report.found, traces=report.traces)
    return report


def _network_universe() -> Universe:
    return load_program("firewall.cnk").universe


def load_balancer_race(cfg: EvalConfig | None = None) -> RaceReport:
    """Two requests from ``l1`` both sent to server ``sl``: the balancer reads ``r`` before either write lands."""
    u = _network_universe()
    a = u.packet_set(
        {"src": "l1", "dst": "firewall", "type": "heart"}, {"src": "l1", "dst": "firewall", "type": "spade"}
    )
    output = u.packet_set({"src": "l1", "dst": "sl", "type": "heart"}, {"src": "l1", "dst": "sl", "type": "spade"})
    return _race("load balancer", "firewall.cnk", "loadbalancer.cnk", a, output, cfg or EvalConfig(star_bound=0))


def cache_race(cfg: EvalConfig | None = None) -> RaceReport:
    """Replies from ``sh`` and ``sl`` both delivered to the low priority host ``l1``."""
    u = _network_universe()
    a = u.packet_set(
        {"src": "sh", "dst": "firewall", "type": "spade"}, {"src": "sl", "dst": "firewall", "type": "heart"}
    )
    output = u.packet_set({"src": "sh", "dst": "l1", "type": "spade"}, {"src": "sl", "dst": "l1", "type": "heart"})
    return _race("cache", "firewall.cnk", "cache.cnk", a, output, cfg or EvalConfig(star_bound=0))


@dataclass
class ComponentRun:
    program: str
    input: PacketSet
    traces: int
    outputs: list[PacketSet]


def firewall_overview(cfg: EvalConfig | None = None) -> list[ComponentRun]:
    """Each of the cache, firewall and load balancer run alone on a packet from every source."""
    cfg = cfg or EvalConfig(star_bound=0)
    runs = []
    for name in ("cache.cnk", "firewall.cnk", "loadbalancer.cnk"):
        module = load_program(name)
        u = module.universe
        for src in u.field_values("src"):
            a = u.packet_set({"src": src, "dst": "firewall", "type": "heart"})
            traces = evaluate(module.program, a, cfg, u)
            runs.append(ComponentRun(name, a, len(traces), [b for b in traces.outputs() if b is not None]))
    return runs
