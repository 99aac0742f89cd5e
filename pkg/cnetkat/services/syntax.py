"""Concrete syntax: parser, printer and fragment classification.

Program files start with an optional header declaring the universe::

    fields sw: 1 2 3 4, type: heart spade;
    vars v: 0 1;

followed by a program. Operators bind ``*`` tighter than ``;``, then ``||``, then ``+``.
Packet predicates use ``and or not``; state observations use ``/\\ \\/ ~``.
"""
from __future__ import annotations

from dataclasses import dataclass
from threading import Lock

import structlog
from arpeggio import EOF, NoMatch, OneOrMore, Optional, ParserPython, PTNodeVisitor, ZeroOrMore, visit_parse_tree
from arpeggio import RegExMatch as _

from cnetkat.domain.ast import (
    Abort,
    Complete,
    Dup,
    FieldAssign,
    FieldTest,
    OAnd,
    OBot,
    Observation,
    Observe,
    ONot,
    OOr,
    OTop,
    PAnd,
    Par,
    PFalse,
    Pi,
    PNot,
    POr,
    PTrue,
    PacketLiteral,
    Predicate,
    Program,
    Seq,
    Skip,
    Star,
    Test,
    Union,
    VarAssign,
    VarCopy,
    VarTest,
)
from cnetkat.domain.enums import AtomFlavor
from cnetkat.domain.errors import DomainError, ParseError, UndeclaredIdentifierError
from cnetkat.domain.models import CompleteAtom, Packet, PacketSet, PiExpr, Universe

logger = structlog.get_logger(__name__)

KEYWORDS = r"(abort|skip|drop|pass|dup|top|bot|and|or|not|fields|vars)\b"


# Grammar
def comment():
    return _(r"#[^\n]*")


def ident():
    return _(rf"(?!{KEYWORDS})[A-Za-z_][A-Za-z0-9_]*")


def value():
    return _(r"[A-Za-z0-9_]+")


def decl():
    return ident, ":", OneOrMore(value)


def fields_decl():
    return _(r"fields\b"), decl, ZeroOrMore(",", decl), ";"


def vars_decl():
    return _(r"vars\b"), decl, ZeroOrMore(",", decl), ";"


def header():
    return fields_decl, Optional(vars_decl)


def orop():
    return _(r"or\b|\\/")


def andop():
    return _(r"and\b|/\\")


def negop():
    return _(r"not\b|~")


def lconst():
    return _(r"(drop|pass|top|bot)\b")


def test():
    return ident, "=", value


def latom():
    return [("(", disj, ")"), test, lconst]


def neg():
    return [(negop, neg), latom]


def conj():
    return neg, ZeroOrMore(andop, neg)


def disj():
    return conj, ZeroOrMore(orop, conj)


def logic():
    return disj


def binding():
    return ident, "=", value


def packet():
    return "[", binding, ZeroOrMore(",", binding), "]"


def packet_set():
    return "{", Optional(packet, ZeroOrMore(",", packet)), "}"


def complete_test():
    return "?", packet


def complete_assign():
    return "!", packet


def pi_set():
    return "!", packet_set


def assignment():
    return ident, "<-", value


def prog_keyword():
    return _(r"(abort|skip|dup)\b")


def primary():
    return [logic, ("(", union, ")"), assignment, packet_set, complete_test, complete_assign, pi_set, prog_keyword]


def starop():
    return _(r"\*")


def star():
    return primary, ZeroOrMore(starop)


def seq():
    return star, ZeroOrMore(";", star)


def par():
    return seq, ZeroOrMore("||", seq)


def union():
    return par, ZeroOrMore("+", par)


def module():
    return Optional(header), union, EOF


_PARSER: ParserPython | None = None
_PARSER_LOCK = Lock()


def _get_parser() -> ParserPython:
    global _PARSER
    with _PARSER_LOCK:
        if _PARSER is None:
            _PARSER = ParserPython(module, comment_def=comment)
    return _PARSER


# Visitor helpers
@dataclass(frozen=True)
class _Token:
    text: str
    position: int


@dataclass(frozen=True)
class _Ident(_Token):
    pass


@dataclass(frozen=True)
class _Value(_Token):
    pass


@dataclass(frozen=True)
class _Op(_Token):
    pass


@dataclass(frozen=True)
class _Decl:
    name: str
    values: tuple[str, ...]


@dataclass(frozen=True)
class _DeclGroup:
    kind: str
    decls: tuple[_Decl, ...]


@dataclass(frozen=True)
class _Binding:
    name: _Ident
    value: _Value


@dataclass(frozen=True)
class _Logic:
    """A predicate or an observation, before it becomes a program."""

    kind: str
    term: Predicate | Observation
    position: int


def _items(children) -> list:
    flat: list = []
    for child in children:
        if isinstance(child, (list, tuple)):
            flat.extend(_items(child))
        elif child is not None and not isinstance(child, str):
            flat.append(child)
    return flat


@dataclass(frozen=True)
class Module:
    universe: Universe
    program: Program


class ProgramVisitor(PTNodeVisitor):
    def __init__(self, parser: ParserPython, universe: Universe | None, **kwargs):
        super().__init__(**kwargs)
        self.parser = parser
        self.universe = universe
        self.declared: Universe | None = None

    def _where(self, position: int) -> tuple[int, int]:
        return self.parser.pos_to_linecol(position)

    def _universe(self, position: int) -> Universe:
        if self.universe is None:
            line, col = self._where(position)
            raise ParseError("program has no header and no universe was given", line, col)
        return self.universe

    def _check(self, action, position: int):
        try:
            return action()
        except DomainError as e:
            line, col = self._where(position)
            raise ParseError(e.message, line, col) from e

    # Tokens
    def visit_ident(self, node, children):
        return _Ident(node.value, node.position)

    def visit_value(self, node, children):
        return _Value(node.value, node.position)

    def visit_orop(self, node, children):
        return _Op(node.value, node.position)

    def visit_andop(self, node, children):
        return _Op(node.value, node.position)

    def visit_negop(self, node, children):
        return _Op(node.value, node.position)

    def visit_starop(self, node, children):
        return _Op(node.value, node.position)

    # Header
    def visit_decl(self, node, children):
        items = _items(children)
        return _Decl(items[0].text, tuple(v.text for v in items[1:]))

    def visit_fields_decl(self, node, children):
        return _DeclGroup("fields", tuple(_items(children)))

    def visit_vars_decl(self, node, children):
        return _DeclGroup("vars", tuple(_items(children)))

    def visit_header(self, node, children):
        groups = {g.kind: g.decls for g in _items(children)}
        declared = self._check(
            lambda: Universe(
                fields=tuple((d.name, d.values) for d in groups["fields"]),
                vars=tuple((d.name, d.values) for d in groups.get("vars", ())),
            ),
            node.position,
        )
        if self.universe is not None and self.universe != declared:
            line, col = self._where(node.position)
            raise ParseError("header disagrees with the given universe", line, col)
        self.universe = declared
        self.declared = declared
        return None

    # Logic
    def visit_test(self, node, children):
        name, val = _items(children)
        universe = self._universe(node.position)
        if universe.is_field(name.text):
            self._check(lambda: universe.check_field(name.text, val.text), val.position)
            return _Logic("pred", FieldTest(name.text, val.text), node.position)
        if universe.is_var(name.text):
            self._check(lambda: universe.check_var(name.text, val.text), val.position)
            return _Logic("obs", VarTest(name.text, val.text), node.position)
        line, col = self._where(name.position)
        raise UndeclaredIdentifierError(name.text, "field or variable", line, col)

    def visit_lconst(self, node, children):
        term = {"drop": ("pred", PFalse()), "pass": ("pred", PTrue()), "top": ("obs", OTop()), "bot": ("obs", OBot())}
        kind, value = term[node.value]
        return _Logic(kind, value, node.position)

    def visit_latom(self, node, children):
        return _items(children)[0]

    def visit_neg(self, node, children):
        items = _items(children)
        if len(items) == 1:
            return items[0]
        op, operand = items
        if op.text == "not" and operand.kind == "pred":
            return _Logic("pred", PNot(operand.term), node.position)
        if op.text == "~" and operand.kind == "obs":
            return _Logic("obs", ONot(operand.term), node.position)
        line, col = self._where(op.position)
        kind = "predicate" if operand.kind == "pred" else "observation"
        raise ParseError(f"'{op.text}' cannot negate a {kind}", line, col)

    def _fold(self, children, pred_op: str, pred_cls, obs_cls) -> _Logic:
        items = _items(children)
        result = items[0]
        for op, right in zip(items[1::2], items[2::2]):
            if result.kind != right.kind:
                line, col = self._where(op.position)
                raise ParseError("predicates and observations cannot be combined", line, col)
            is_pred = op.text == pred_op
            if is_pred != (result.kind == "pred"):
                line, col = self._where(op.position)
                kind = "predicate" if result.kind == "pred" else "observation"
                raise ParseError(f"'{op.text}' does not apply to a {kind}", line, col)
            cls = pred_cls if is_pred else obs_cls
            result = _Logic(result.kind, cls(result.term, right.term), result.position)
        return result

    def visit_conj(self, node, children):
        return self._fold(children, "and", PAnd, OAnd)

    def visit_disj(self, node, children):
        return self._fold(children, "or", POr, OOr)

    def visit_logic(self, node, children):
        item = _items(children)[0]
        return Test(item.term) if item.kind == "pred" else Observe(item.term)

    # Packets
    def visit_binding(self, node, children):
        name, val = _items(children)
        return _Binding(name, val)

    def visit_packet(self, node, children):
        universe = self._universe(node.position)
        assignment: dict[str, str] = {}
        for b in _items(children):
            if not universe.is_field(b.name.text):
                line, col = self._where(b.name.position)
                raise UndeclaredIdentifierError(b.name.text, "field", line, col)
            if b.name.text in assignment:
                line, col = self._where(b.name.position)
                raise ParseError(f"field '{b.name.text}' assigned twice", line, col)
            assignment[b.name.text] = b.value.text
        return self._check(lambda: universe.packet(**assignment), node.position)

    def visit_packet_set(self, node, children):
        return PacketLiteral(PacketSet.of(_items(children)))

    def visit_complete_test(self, node, children):
        return Complete(CompleteAtom(_items(children)[0], AtomFlavor.TEST))

    def visit_complete_assign(self, node, children):
        return Complete(CompleteAtom(_items(children)[0], AtomFlavor.ASSIGNMENT))

    def visit_pi_set(self, node, children):
        return Pi(PiExpr.of_set(_items(children)[0].packets))

    # Programs
    def visit_assignment(self, node, children):
        name, val = _items(children)
        universe = self._universe(node.position)
        if universe.is_var(name.text):
            if universe.is_var(val.text):
                return VarCopy(name.text, val.text)
            self._check(lambda: universe.check_var(name.text, val.text), val.position)
            return VarAssign(name.text, val.text)
        if universe.is_field(name.text):
            self._check(lambda: universe.check_field(name.text, val.text), val.position)
            return FieldAssign(name.text, val.text)
        line, col = self._where(name.position)
        raise UndeclaredIdentifierError(name.text, "field or variable", line, col)

    def visit_prog_keyword(self, node, children):
        return {"abort": Abort, "skip": Skip, "dup": Dup}[node.value]()

    def visit_primary(self, node, children):
        return _items(children)[0]

    def visit_star(self, node, children):
        items = _items(children)
        result = items[0]
        for _op in items[1:]:
            result = Star(result)
        return result

    def _chain(self, children, cls):
        items = _items(children)
        result = items[0]
        for right in items[1:]:
            result = cls(result, right)
        return result

    def visit_seq(self, node, children):
        return self._chain(children, Seq)

    def visit_par(self, node, children):
        return self._chain(children, Par)

    def visit_union(self, node, children):
        return self._chain(children, Union)

    def visit_module(self, node, children):
        return _items(children)[0]


def parse_module(source: str, universe: Universe | None = None) -> Module:
    """Parse a program file, header included.

    Args:
        source: Program text.
        universe: Universe to use when the text has no header.

    Returns:
        The declared (or given) universe and the program.

    Raises:
        ParseError: Syntax error, undeclared identifier or value out of range.
    """
    parser = _get_parser()
    try:
        tree = parser.parse(source)
    except NoMatch as e:
        logger.debug("parse_failed", line=e.line, col=e.col)
        raise ParseError("syntax error", e.line, e.col) from e
    visitor = ProgramVisitor(parser, universe)
    program = visit_parse_tree(tree, visitor)
    return Module(visitor.universe, program)


def parse(source: str, universe: Universe | None = None) -> Program:
    return parse_module(source, universe).program


# Printer
_UNION, _PAR, _SEQ, _STAR, _ATOM = range(5)


def _pred_text(t: Predicate, level: int = 0) -> str:
    match t:
        case PFalse():
            return "drop"
        case PTrue():
            return "pass"
        case FieldTest(field=f, value=n):
            return f"{f}={n}"
        case POr(left=left, right=right):
            text, own = f"{_pred_text(left, 0)} or {_pred_text(right, 1)}", 0
        case PAnd(left=left, right=right):
            text, own = f"{_pred_text(left, 1)} and {_pred_text(right, 2)}", 1
        case PNot(operand=operand):
            text, own = f"not {_pred_text(operand, 2)}", 2
        case _:
            raise TypeError(f"not a predicate: {t!r}")
    return f"({text})" if own < level else text


def _obs_text(o: Observation, level: int = 0) -> str:
    match o:
        case OBot():
            return "bot"
        case OTop():
            return "top"
        case VarTest(var=v, value=n):
            return f"{v}={n}"
        case OOr(left=left, right=right):
            text, own = f"{_obs_text(left, 0)} \\/ {_obs_text(right, 1)}", 0
        case OAnd(left=left, right=right):
            text, own = f"{_obs_text(left, 1)} /\\ {_obs_text(right, 2)}", 1
        case ONot(operand=operand):
            text, own = f"~{_obs_text(operand, 2)}", 2
        case _:
            raise TypeError(f"not an observation: {o!r}")
    return f"({text})" if own < level else text


def _is_compound_logic(p: Program) -> bool:
    if isinstance(p, Test):
        return isinstance(p.pred, (PAnd, POr, PNot))
    if isinstance(p, Observe):
        return isinstance(p.obs, (OAnd, OOr, ONot))
    return False


def print_program(p: Program, level: int = _UNION) -> str:
    """Render ``p`` with minimal parentheses; parsing the text gives ``p`` back."""
    match p:
        case Abort():
            return "abort"
        case Skip():
            return "skip"
        case Dup():
            return "dup"
        case Test(pred=t):
            text = _pred_text(t)
            return f"({text})" if level >= _ATOM and _is_compound_logic(p) else text
        case Observe(obs=o):
            text = _obs_text(o)
            return f"({text})" if level >= _ATOM and _is_compound_logic(p) else text
        case FieldAssign(field=f, value=n):
            return f"{f}<-{n}"
        case VarAssign(var=v, value=n):
            return f"{v}<-{n}"
        case VarCopy(var=v, source=w):
            return f"{v}<-{w}"
        case PacketLiteral(packets=a):
            return str(a)
        case Complete(atom=atom):
            return str(atom)
        case Pi(expr=expr):
            return str(expr)
        case Union(left=left, right=right):
            text, own = f"{print_program(left, _UNION)} + {print_program(right, _PAR)}", _UNION
        case Par(left=left, right=right):
            text, own = f"{print_program(left, _PAR)} || {print_program(right, _SEQ)}", _PAR
        case Seq(left=left, right=right):
            text, own = f"{print_program(left, _SEQ)} ; {print_program(right, _STAR)}", _SEQ
        case Star(body=body):
            text, own = f"{print_program(body, _ATOM)}*", _STAR
        case _:
            raise TypeError(f"not a program: {p!r}")
    return f"({text})" if own < level else text


def print_module(universe: Universe, p: Program) -> str:
    return f"{universe.describe()}\n{print_program(p)}\n"


# Classification
@dataclass(frozen=True)
class ProgramClass:
    is_packet_program: bool
    is_state_program: bool
    is_det_packet_program: bool


def is_packet_program(p: Program) -> bool:
    match p:
        case Test() | FieldAssign() | Complete() | Pi():
            return True
        case Union(left=left, right=right) | Seq(left=left, right=right) | Par(left=left, right=right):
            return is_packet_program(left) and is_packet_program(right)
        case Star(body=body):
            return is_packet_program(body)
    return False


def is_det_packet_program(p: Program) -> bool:
    match p:
        case Test() | FieldAssign() | Complete() | Pi():
            return True
        case Seq(left=left, right=right) | Par(left=left, right=right):
            return is_det_packet_program(left) and is_det_packet_program(right)
    return False


def is_state_program(p: Program) -> bool:
    match p:
        case Abort() | Skip() | Observe() | VarAssign() | VarCopy() | PacketLiteral() | Dup():
            return True
        case Union(left=left, right=right) | Seq(left=left, right=right) | Par(left=left, right=right):
            return is_state_program(left) and is_state_program(right)
        case Star(body=body):
            return is_state_program(body)
    return False


def contains_dup(p: Program) -> bool:
    match p:
        case Dup():
            return True
        case Union(left=left, right=right) | Seq(left=left, right=right) | Par(left=left, right=right):
            return contains_dup(left) or contains_dup(right)
        case Star(body=body):
            return contains_dup(body)
    return False


def classify(p: Program) -> ProgramClass:
    return ProgramClass(
        is_packet_program=is_packet_program(p),
        is_state_program=is_state_program(p),
        is_det_packet_program=is_det_packet_program(p),
    )
