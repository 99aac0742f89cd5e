"""Tests for the parser, printer and fragment classification."""
import pytest
from hypothesis import given, settings

from cnetkat.domain.ast import (
    Abort,
    Complete,
    Dup,
    FieldAssign,
    FieldTest,
    OAnd,
    Observe,
    ONot,
    OTop,
    PAnd,
    Par,
    PFalse,
    Pi,
    PNot,
    PTrue,
    PacketLiteral,
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
from cnetkat.domain.errors import ParseError, UndeclaredIdentifierError
from cnetkat.domain.models import CompleteAtom, PacketSet, PiExpr
from cnetkat.services.syntax import (
    classify,
    contains_dup,
    is_det_packet_program,
    is_packet_program,
    is_state_program,
    parse,
    parse_module,
    print_module,
    print_program,
)
from tests.conftest import ROUND_TRIP_EXAMPLES
from tests.strategies import SMALL, STORE, programs, state_programs

SW1 = Test(FieldTest("sw", "1"))


class TestParse:
    def test_test_then_dup(self, small):
        assert parse("sw=1 ; dup", small) == Seq(SW1, Dup())

    def test_variable_assignment_then_observation(self, small):
        assert parse("v<-1 ; v=1", small) == Seq(VarAssign("v", "1"), Observe(VarTest("v", "1")))

    def test_precedence(self, small):
        p = parse("sw<-1 + sw<-2 || dup ; skip*", small)
        assert p == Union(FieldAssign("sw", "1"), Par(FieldAssign("sw", "2"), Seq(Dup(), Star(Skip()))))

    def test_left_associative(self, small):
        assert parse("dup ; skip ; abort", small) == Seq(Seq(Dup(), Skip()), Abort())

    def test_logic(self, small):
        assert parse("not (sw=1 and type=heart)", small) == Test(
            PNot(PAnd(FieldTest("sw", "1"), FieldTest("type", "heart")))
        )
        assert parse("~(v=0 /\\ top)", small) == Observe(ONot(OAnd(VarTest("v", "0"), OTop())))

    def test_constants(self, small):
        assert parse("drop", small) == Test(PFalse())
        assert parse("pass", small) == Test(PTrue())
        assert parse("skip", small) == Skip()
        assert parse("abort", small) == Abort()

    def test_packet_forms(self, small, heart):
        a = PacketSet.of([heart])
        assert parse("{[sw=1,type=heart]}", small) == PacketLiteral(a)
        assert parse("?[sw=1,type=heart]", small) == Complete(CompleteAtom(heart, AtomFlavor.TEST))
        assert parse("![type=heart,sw=1]", small) == Complete(CompleteAtom(heart, AtomFlavor.ASSIGNMENT))
        assert parse("!{[sw=1,type=heart]}", small) == Pi(PiExpr.of_set(a))
        assert parse("!{}", small) == Pi(PiExpr())

    def test_copy_between_variables(self, store):
        assert parse("v<-w", store) == VarCopy("v", "w")
        assert parse("v<-1", store) == VarAssign("v", "1")

    def test_comments(self, small):
        assert parse("# leading\nskip # trailing", small) == Skip()

    def test_header_declares_universe(self, small):
        module = parse_module("fields sw: 1 2, type: heart spade;\nvars v: 0 1;\nsw<-2 ; v<-1")
        assert module.universe == small
        assert module.program == Seq(FieldAssign("sw", "2"), VarAssign("v", "1"))


class TestParseErrors:
    def test_undeclared_identifier(self, small):
        with pytest.raises(UndeclaredIdentifierError) as exc:
            parse("skip ;\nport=1", small)
        assert exc.value.name == "port"
        assert (exc.value.line, exc.value.col) == (2, 1)

    def test_undeclared_field_in_packet(self, small):
        with pytest.raises(UndeclaredIdentifierError):
            parse("{[port=1]}", small)

    def test_value_out_of_range(self, small):
        with pytest.raises(ParseError, match="out of range"):
            parse("sw=3", small)

    def test_incomplete_packet(self, small):
        with pytest.raises(ParseError):
            parse("?[sw=1]", small)

    def test_missing_header(self):
        with pytest.raises(ParseError, match="no header"):
            parse("sw=1")

    def test_header_disagreeing_with_universe(self, small):
        with pytest.raises(ParseError, match="disagrees"):
            parse("fields sw: 1 2 3;\nskip", small)

    def test_mixing_predicates_and_observations(self, small):
        with pytest.raises(ParseError, match="cannot be combined"):
            parse("sw=1 and v=0", small)
        with pytest.raises(ParseError):
            parse("sw=1 /\\ type=heart", small)
        with pytest.raises(ParseError, match="cannot negate"):
            parse("~sw=1", small)

    def test_syntax_error(self, small):
        with pytest.raises(ParseError) as exc:
            parse("sw<-1 ;", small)
        assert exc.value.line == 1


class TestPrint:
    def test_minimal_parentheses(self, small):
        p = Seq(Union(FieldAssign("sw", "1"), Dup()), Star(Seq(Dup(), Skip())))
        assert print_program(p) == "(sw<-1 + dup) ; (dup ; skip)*"

    def test_compound_test_under_star(self):
        p = Star(Test(PNot(FieldTest("sw", "1"))))
        assert print_program(p) == "(not sw=1)*"

    def test_module(self, small):
        p = Seq(FieldAssign("sw", "2"), VarAssign("v", "1"))
        text = print_module(small, p)
        assert text == "fields sw: 1 2, type: heart spade;\nvars v: 0 1;\nsw<-2 ; v<-1\n"
        assert parse_module(text).program == p

    @settings(max_examples=ROUND_TRIP_EXAMPLES)
    @given(programs(SMALL, max_leaves=6))
    def test_round_trip(self, p):
        assert parse(print_program(p), SMALL) == p

    @given(state_programs(STORE, max_leaves=4, copies=True, dup=True))
    def test_round_trip_with_copies(self, p):
        assert parse(print_program(p), STORE) == p


class TestClassify:
    def test_packet_programs(self, heart):
        atom = Complete(CompleteAtom(heart, AtomFlavor.TEST))
        assert is_packet_program(Star(Union(SW1, FieldAssign("sw", "2"))))
        assert is_packet_program(Par(atom, Pi(PiExpr())))
        assert not is_packet_program(Skip())
        assert not is_packet_program(Seq(SW1, Dup()))

    def test_state_programs(self, heart):
        assert is_state_program(Seq(VarAssign("v", "1"), Star(Observe(VarTest("v", "1")))))
        assert is_state_program(Par(Dup(), PacketLiteral(PacketSet.of([heart]))))
        assert is_state_program(Union(Skip(), Abort()))
        assert not is_state_program(Seq(Skip(), SW1))

    def test_deterministic_packet_programs(self):
        assert is_det_packet_program(Par(SW1, FieldAssign("sw", "2")))
        assert not is_det_packet_program(Union(SW1, SW1))
        assert not is_det_packet_program(Star(SW1))

    def test_classify(self):
        result = classify(Seq(SW1, FieldAssign("sw", "2")))
        assert result.is_packet_program
        assert result.is_det_packet_program
        assert not result.is_state_program

    def test_contains_dup(self):
        assert contains_dup(Star(Par(Skip(), Dup())))
        assert not contains_dup(Seq(SW1, Skip()))

    @given(programs(SMALL, max_leaves=5))
    def test_fragments(self, p):
        kinds = classify(p)
        assert not (kinds.is_packet_program and kinds.is_state_program)
        if kinds.is_det_packet_program:
            assert kinds.is_packet_program
