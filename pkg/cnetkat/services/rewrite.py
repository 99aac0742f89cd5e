"""Normal forms: every program, run on a fixed packet set, is a sum of store programs each
followed by the parallel composition of complete assignments naming its output.

``normalize(a, p)`` builds ``Π_a ; Σ_j (u_j ; Π_{b_j})`` by structural recursion. Stars
go through a matrix over store programs indexed by the packet sets reachable from ``a``.
Normal forms are syntax; their meaning is checked against the evaluator.
"""
from __future__ import annotations

from dataclasses import dataclass

import structlog

from cnetkat.domain.ast import (
    DROP,
    Abort,
    Complete,
    Dup,
    FieldAssign,
    Observe,
    PacketLiteral,
    Par,
    Pi,
    Program,
    Seq,
    Skip,
    Star,
    Test,
    Union,
    VarAssign,
    VarCopy,
)
from cnetkat.domain.enums import Verdict
from cnetkat.domain.errors import ResourceBudgetError
from cnetkat.domain.models import PacketSet, PiExpr, Universe
from cnetkat.services.observations import bsem
from cnetkat.services.semantics import EvalConfig, Trace, eval_pocka, included_in_closure
from cnetkat.services.syntax import print_program

logger = structlog.get_logger(__name__)


# Smart constructors over store programs: only the unit and zero laws are applied.
def seq(p: Program, q: Program) -> Program:
    if isinstance(p, Abort) or isinstance(q, Abort):
        return Abort()
    if isinstance(p, Skip):
        return q
    if isinstance(q, Skip):
        return p
    return Seq(p, q)


def union(p: Program, q: Program) -> Program:
    if isinstance(p, Abort):
        return q
    if isinstance(q, Abort):
        return p
    return Union(p, q)


def par(p: Program, q: Program) -> Program:
    if isinstance(p, Abort) or isinstance(q, Abort):
        return Abort()
    if isinstance(p, Skip):
        return q
    if isinstance(q, Skip):
        return p
    return Par(p, q)


def star(p: Program) -> Program:
    if isinstance(p, (Abort, Skip)):
        return Skip()
    return Star(p)


def sum_of(programs: list[Program]) -> Program:
    result: Program = Abort()
    for p in programs:
        result = union(result, p)
    return result


# Reduced axioms
def _flatten(p: Program) -> list[Program]:
    if isinstance(p, Seq):
        return _flatten(p.left) + _flatten(p.right)
    return [p]


def _assigned(p: Program):
    if isinstance(p, Complete) and not p.atom.is_test:
        return p.atom.packet
    return None


def _tested(p: Program):
    if isinstance(p, Complete) and p.atom.is_test:
        return p.atom.packet
    return None


def _reduce_pair(left: Program, right: Program) -> list[Program] | None:
    """Rewrite two adjacent factors, or None when no reduced axiom applies."""
    pi_out, alpha_in = _assigned(left), _tested(right)
    if pi_out is not None and alpha_in == pi_out:
        return [left]
    alpha_out, pi_in = _tested(left), _assigned(right)
    if alpha_out is not None and pi_in == alpha_out:
        return [left]
    if pi_out is not None and pi_in is not None:
        return [right]
    if alpha_out is not None and alpha_in is not None and alpha_out != alpha_in:
        return [DROP]
    if isinstance(left, Pi) and isinstance(right, Pi) and not left.expr.is_drop:
        return [right]
    return None


def _reduce_chain(factors: list[Program]) -> list[Program]:
    changed = True
    while changed:
        changed = False
        for i in range(len(factors) - 1):
            replacement = _reduce_pair(factors[i], factors[i + 1])
            if replacement is not None:
                factors = factors[:i] + replacement + factors[i + 2 :]
                changed = True
                break
    return factors


def reduce_atoms(p: Program) -> Program:
    """Apply the reduced axioms on complete tests and assignments, left to right, to a fixpoint.

    ``π;α_π → π``, ``α;π_α → α``, ``π;π' → π'``, ``α;β → drop`` for ``α ≠ β`` and
    ``Π_a;Π_b → Π_b`` for non-empty ``a``. Each rule shortens a sequence, so this terminates.
    """
    match p:
        case Seq():
            factors = _reduce_chain([reduce_atoms(f) for f in _flatten(p)])
            result = factors[0]
            for f in factors[1:]:
                result = Seq(result, f)
            return result
        case Union(left=left, right=right):
            return Union(reduce_atoms(left), reduce_atoms(right))
        case Par(left=left, right=right):
            return Par(reduce_atoms(left), reduce_atoms(right))
        case Star(body=body):
            return Star(reduce_atoms(body))
    return p


@dataclass(frozen=True)
class Summand:
    state_program: Program
    output_pi: PiExpr


@dataclass(frozen=True)
class NormalForm:
    """``Π_a ; Σ_j (u_j ; Π_{b_j})``; the empty sum is abort."""

    input_set: PacketSet
    summands: tuple[Summand, ...] = ()

    @property
    def outputs(self) -> list[PacketSet]:
        return [s.output_pi.packet_set for s in self.summands]

    @property
    def is_merged(self) -> bool:
        outputs = [s.output_pi for s in self.summands]
        return len(outputs) == len(set(outputs))

    def summand_for(self, output: PiExpr) -> Summand | None:
        for s in self.summands:
            if s.output_pi == output:
                return s
        return None


@dataclass(frozen=True)
class StateMatrix:
    """Square matrix of store programs indexed by output expressions; ``Abort`` is zero."""

    index: tuple[PiExpr, ...]
    entries: tuple[tuple[Program, ...], ...]

    @property
    def size(self) -> int:
        return len(self.index)

    def __getitem__(self, key: tuple[PiExpr, PiExpr]) -> Program:
        row, col = key
        return self.entries[self.index.index(row)][self.index.index(col)]


Block = list[list[Program]]


def _add(m: Block, n: Block) -> Block:
    return [[union(x, y) for x, y in zip(row_m, row_n)] for row_m, row_n in zip(m, n)]


def _mul(m: Block, n: Block) -> Block:
    inner = len(n)
    cols = len(n[0]) if n else 0
    return [[sum_of([seq(row[k], n[k][j]) for k in range(inner)]) for j in range(cols)] for row in m]


def _star_block(m: Block) -> Block:
    size = len(m)
    if size == 0:
        return []
    if size == 1:
        return [[star(m[0][0])]]
    k = 1
    a = [row[:k] for row in m[:k]]
    b = [row[k:] for row in m[:k]]
    c = [row[:k] for row in m[k:]]
    d = [row[k:] for row in m[k:]]
    d_star = _star_block(d)
    f_star = _star_block(_add(a, _mul(_mul(b, d_star), c)))
    top_right = _mul(_mul(f_star, b), d_star)
    bottom_left = _mul(_mul(d_star, c), f_star)
    bottom_right = _add(d_star, _mul(bottom_left, _mul(b, d_star)))
    top = [fl + tr for fl, tr in zip(f_star, top_right)]
    bottom = [bl + br for bl, br in zip(bottom_left, bottom_right)]
    return top + bottom


def matrix_star(m: StateMatrix) -> StateMatrix:
    """Kleene star of a matrix of store programs, by splitting off the first row and column.

    With ``M = [[A, B], [C, D]]`` and ``F = A + B D* C``::

        M* = [[F*, F* B D*], [D* C F*, D* + D* C F* B D*]]
    """
    entries = _star_block([list(row) for row in m.entries])
    return StateMatrix(m.index, tuple(tuple(row) for row in entries))


def merge_summands(nf: NormalForm) -> NormalForm:
    """Sum the store programs of summands sharing an output; first occurrence fixes the order."""
    grouped: dict[PiExpr, Program] = {}
    for s in nf.summands:
        grouped[s.output_pi] = union(grouped.get(s.output_pi, Abort()), s.state_program)
    return NormalForm(nf.input_set, tuple(Summand(u, b) for b, u in grouped.items()))


class Normalizer:
    """Normal forms of programs on packet sets; memoizes per (program, input)."""

    def __init__(self, q_budget: int = 256):
        self.q_budget = q_budget
        self._memo: dict[tuple[Program, PacketSet], tuple[Summand, ...]] = {}

    def summands(self, p: Program, a: PacketSet) -> tuple[Summand, ...]:
        key = (p, a)
        if key not in self._memo:
            self._memo[key] = tuple(s for s in self._summands(p, a) if not isinstance(s.state_program, Abort))
        return self._memo[key]

    def _summands(self, p: Program, a: PacketSet) -> list[Summand]:
        if not a:
            return []
        here = PiExpr.of_set(a)
        match p:
            case Abort():
                return []
            case Skip():
                return [Summand(Skip(), here)]
            case Test(pred=t):
                return [Summand(Skip(), PiExpr.of_set(bsem(t, a)))]
            case FieldAssign(field=f, value=n):
                return [Summand(Skip(), PiExpr.of_set(a.update(f, n)))]
            case Complete(atom=atom):
                if atom.is_test:
                    return [Summand(Skip(), PiExpr.of_set(a & PacketSet.of([atom.packet])))]
                return [Summand(Skip(), PiExpr.of_set(PacketSet.of([atom.packet])))]
            case Pi(expr=expr):
                return [Summand(Skip(), expr)]
            case Observe() | VarAssign() | VarCopy() | PacketLiteral():
                return [Summand(p, here)]
            case Dup():
                return [Summand(PacketLiteral(a), here)]
            case Union(left=left, right=right):
                return [*self.summands(left, a), *self.summands(right, a)]
            case Par(left=left, right=right):
                return [
                    Summand(par(u.state_program, v.state_program), PiExpr(u.output_pi.packets | v.output_pi.packets))
                    for u in self.summands(left, a)
                    for v in self.summands(right, a)
                ]
            case Seq(left=left, right=right):
                result = []
                for u in self.summands(left, a):
                    if u.output_pi.is_drop:
                        result.append(u)
                        continue
                    for v in self.summands(right, u.output_pi.packet_set):
                        result.append(Summand(seq(u.state_program, v.state_program), v.output_pi))
                return result
            case Star(body=body):
                m = matrix_star(self.matrix(a, body))
                return [Summand(entry, r) for r, entry in zip(m.index, m.entries[0])]
        raise TypeError(f"not a program: {p!r}")

    def matrix(self, a: PacketSet, p: Program) -> StateMatrix:
        """One-step transition matrix of ``p`` over the packet sets reachable from ``a``."""
        index = [PiExpr.of_set(a)]
        rows: dict[PiExpr, dict[PiExpr, Program]] = {}
        pending = 0
        while pending < len(index):
            r = index[pending]
            pending += 1
            row: dict[PiExpr, Program] = {}
            for s in self.summands(p, r.packet_set):
                row[s.output_pi] = union(row.get(s.output_pi, Abort()), s.state_program)
                if s.output_pi not in index:
                    index.append(s.output_pi)
                    if len(index) > self.q_budget:
                        raise ResourceBudgetError("normal-form state space", self.q_budget, len(index))
            rows[r] = row
        entries = tuple(tuple(rows[r].get(c, Abort()) for c in index) for r in index)
        return StateMatrix(tuple(index), entries)


def normalize(a: PacketSet, p: Program, cfg: EvalConfig | None = None) -> NormalForm:
    """Normal form of ``Π_a ; p``.

    Raises:
        ResourceBudgetError: A star reaches more packet sets than ``cfg.q_budget``.
    """
    q_budget = (cfg or EvalConfig()).q_budget
    try:
        summands = Normalizer(q_budget).summands(p, a)
    except ResourceBudgetError as e:
        logger.error("normalize_failed", error=str(e))
        raise
    logger.debug("normal_form_built", input=str(a), summands=len(summands))
    return NormalForm(a, summands)


def build_matrix(a: PacketSet, p: Program, cfg: EvalConfig | None = None) -> StateMatrix:
    return Normalizer((cfg or EvalConfig()).q_budget).matrix(a, p)


def denote(nf: NormalForm) -> Program:
    """The program a normal form stands for."""
    body = sum_of([seq(s.state_program, Pi(s.output_pi)) for s in nf.summands])
    return Seq(Pi(PiExpr.of_set(nf.input_set)), body)


def print_normal_form(nf: NormalForm) -> str:
    lines = [f"{PiExpr.of_set(nf.input_set)} ;"]
    if not nf.summands:
        lines.append("  abort")
    for i, s in enumerate(nf.summands):
        joiner = "  " if i == 0 else "+ "
        lines.append(f"{joiner}{print_program(seq(s.state_program, Pi(s.output_pi)), level=1)}")
    return "\n".join(lines)


@dataclass(frozen=True)
class NormalFormComparison:
    holds: bool
    bounded: bool
    output: PacketSet | None = None
    counterexample: Trace | None = None

    @property
    def verdict(self) -> Verdict:
        return Verdict.EQUIVALENT if self.holds else Verdict.NOT_EQUIVALENT

    def describe(self, cfg: EvalConfig) -> str:
        text = self.verdict.value
        if self.bounded:
            text += f" ({cfg.bounds_label})"
        return text


def nf_equiv(nf1: NormalForm, nf2: NormalForm, cfg: EvalConfig, universe: Universe) -> NormalFormComparison:
    """Compare two merged normal forms summand by summand.

    An output reached by only one side makes them inequivalent outright. Matched store
    programs are compared by their closed languages, at the bounds of ``cfg``.
    """
    left = {s.output_pi: s.state_program for s in merge_summands(nf1).summands}
    right = {s.output_pi: s.state_program for s in merge_summands(nf2).summands}
    unmatched = sorted(left.keys() ^ right.keys(), key=lambda e: e.packet_set.sort_key())
    if unmatched:
        return NormalFormComparison(False, False, unmatched[0].packet_set)
    bounded = False
    for b in sorted(left, key=lambda e: e.packet_set.sort_key()):
        lhs = eval_pocka(left[b], cfg, universe)
        rhs = eval_pocka(right[b], cfg, universe)
        bounded = bounded or lhs.bounded or rhs.bounded
        missing = included_in_closure(lhs, rhs) or included_in_closure(rhs, lhs)
        if missing is not None:
            return NormalFormComparison(False, bounded, b.packet_set, missing)
    return NormalFormComparison(True, bounded)
