"""Tests for trace semantics, closed comparison and the embedded NetKAT and POCKA semantics."""
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from cnetkat.domain.ast import (
    Abort,
    Dup,
    FieldAssign,
    FieldTest,
    OAnd,
    OBot,
    Observe,
    Par,
    PFalse,
    Pi,
    PTrue,
    Seq,
    Skip,
    Star,
    Test,
    Union,
    VarAssign,
    VarTest,
)
from cnetkat.domain.errors import ClassificationError, ResourceBudgetError
from cnetkat.domain.models import PacketSet, PiExpr, StateAction
from cnetkat.services import pomset as pom
from cnetkat.services.semantics import (
    ClosedTraceSet,
    EvalConfig,
    Trace,
    check_equiv,
    check_inclusion,
    eval_closed,
    eval_netkat,
    eval_pocka,
    evaluate,
    netkat_outputs,
    star_iterations,
)
from cnetkat.services.syntax import contains_dup, is_packet_program, is_state_program
from tests.conftest import NETKAT_EXAMPLES, POCKA_EXAMPLES
from tests.strategies import (
    SMALL,
    det_packet_programs,
    netkat_terms,
    packet_programs,
    packet_sets,
    packets,
    state_programs,
)

SW1 = Test(FieldTest("sw", "1"))
DROP = Test(PFalse())


def equivalent(p, q, universe, cfg, inputs=None) -> bool:
    return all(r.holds for r in check_equiv(p, q, inputs or universe.packet_sets, cfg, universe))


class TestEvaluate:
    def test_empty_input_gives_the_empty_trace(self, small, padded):
        for p in (Abort(), Dup(), VarAssign("v", "1"), Star(Dup())):
            traces = evaluate(p, PacketSet(), padded, small)
            assert list(traces) == [Trace(pom.empty(), PacketSet())]

    def test_parallel_tests_union_their_outputs(self, small, exact, heart, spade):
        a = PacketSet.of([heart, spade])
        p = Par(Test(FieldTest("type", "heart")), Test(FieldTest("type", "spade")))
        assert evaluate(p, a, exact, small).outputs() == [a]

    def test_union_keeps_alternatives_apart(self, small, exact, heart, spade):
        a = PacketSet.of([heart, spade])
        p = Union(Test(FieldTest("type", "heart")), Test(FieldTest("type", "spade")))
        traces = evaluate(p, a, exact, small)
        assert len(traces) == 2
        assert set(traces.outputs()) == {PacketSet.of([heart]), PacketSet.of([spade])}

    def test_pi_then_dup_records_the_new_packets(self, small, exact, heart, spade):
        b = PacketSet.of([spade])
        traces = evaluate(Seq(Pi(PiExpr.of_set(b)), Dup()), PacketSet.of([heart]), exact, small)
        assert list(traces) == [Trace(pom.singleton(b), b)]

    def test_padding_surrounds_actions(self, small, heart):
        cfg = EvalConfig(star_bound=0, pad_bound=1)
        traces = evaluate(VarAssign("v", "1"), PacketSet.of([heart]), cfg, small)
        assert len(traces) == 1
        assert traces.padded
        assert len(traces.materialize()) == 16

    def test_star_that_converges(self, small, heart):
        traces = evaluate(Star(FieldAssign("sw", "2")), PacketSet.of([heart]), EvalConfig(star_bound=3), small)
        assert len(traces) == 2
        assert not traces.bounds_hit

    def test_star_cut_off_by_its_bound(self, small, heart):
        traces = evaluate(Star(Dup()), PacketSet.of([heart]), EvalConfig(star_bound=3), small)
        assert len(traces) == 4
        assert traces.bounds_hit
        assert traces.saturated
        assert traces.bounded

    def test_node_budget(self, small, heart):
        with pytest.raises(ResourceBudgetError) as exc:
            evaluate(Star(Dup()), PacketSet.of([heart]), EvalConfig(star_bound=3, node_budget=2), small)
        assert exc.value.budget == "node"

    def test_trace_budget(self, small, heart):
        p = Star(Union(Dup(), Seq(Dup(), Dup())))
        with pytest.raises(ResourceBudgetError):
            evaluate(p, PacketSet.of([heart]), EvalConfig(star_bound=3, trace_budget=3), small)

    def test_star_iterations(self, small, heart):
        a = PacketSet.of([heart])
        layers = star_iterations(FieldAssign("sw", "2"), a, EvalConfig(star_bound=2), small)
        h2 = PacketSet.of([heart.update("sw", "2")])
        assert layers == [[a], [h2], [h2]]

    def test_closed_membership(self, small, exact, heart):
        a = PacketSet.of([heart])
        zero, one = StateAction("v", value="0"), StateAction("v", value="1")
        closed = eval_closed(Par(VarAssign("v", "0"), VarAssign("v", "1")), a, exact, small)
        assert Trace(pom.chain([zero, one]), a) in closed
        assert Trace(pom.chain([one, zero]), a) in closed
        assert Trace(pom.singleton(zero), a) not in closed
        assert len(closed.materialize(exact)) == 3

    def test_config_validation(self):
        with pytest.raises(ValidationError):
            EvalConfig(star_bound=-1)
        assert EvalConfig(star_bound=2, pad_bound=0).bounds_label == "up to K=2,P=0"


class TestUnits:
    def test_drop_then_abort_is_drop(self, small, exact):
        assert equivalent(Seq(DROP, Abort()), DROP, small, exact)

    def test_abort_then_drop_is_abort(self, small, exact):
        assert equivalent(Seq(Abort(), DROP), Abort(), small, exact)

    def test_abort_then_drop_is_not_drop(self, small, exact, heart):
        results = check_equiv(Seq(Abort(), DROP), DROP, [PacketSet.of([heart])], exact, small)
        assert not results[0].holds

    def test_skip_plus_drop_is_not_skip(self, small, exact, heart):
        (result,) = check_equiv(Union(Skip(), DROP), Skip(), [PacketSet.of([heart])], exact, small)
        assert not result.holds
        assert result.counterexample == Trace(pom.empty(), PacketSet())
        assert result.direction == "left"

    def test_drop_is_the_parallel_unit(self, small, padded):
        p = Seq(SW1, VarAssign("v", "1"))
        assert equivalent(Par(p, DROP), p, small, padded)

    def test_conflicting_tests(self, small, exact):
        p = Seq(Test(FieldTest("sw", "1")), Test(FieldTest("sw", "2")))
        assert equivalent(p, DROP, small, exact)

    def test_constants(self, small, padded):
        assert equivalent(Observe(OAnd(VarTest("v", "0"), VarTest("v", "1"))), Observe(OBot()), small, padded)
        assert equivalent(Skip(), Test(PTrue()), small, padded)
        assert equivalent(Abort(), Observe(OBot()), small, padded)

    def test_inclusion(self, small, exact, heart):
        a = [PacketSet.of([heart])]
        p, q = Seq(VarAssign("v", "0"), VarAssign("v", "1")), Par(VarAssign("v", "0"), VarAssign("v", "1"))
        assert check_inclusion(p, q, a, exact, small)[0].holds
        (result,) = check_inclusion(q, p, a, exact, small)
        assert not result.holds
        assert result.counterexample is not None


class TestEmbeddings:
    @settings(max_examples=NETKAT_EXAMPLES)
    @given(netkat_terms(SMALL), packets(SMALL))
    def test_netkat_conservativity(self, p, pk):
        assert netkat_outputs(p, pk, EvalConfig(star_bound=3, pad_bound=0), SMALL) == eval_netkat(p, pk)

    @settings(max_examples=POCKA_EXAMPLES)
    @given(state_programs(SMALL, max_leaves=3), packet_sets(SMALL, min_size=1), st.sampled_from([0, 1]))
    def test_pocka_conservativity(self, s, a, pad):
        cfg = EvalConfig(star_bound=2, pad_bound=pad)
        expected = ClosedTraceSet(eval_pocka(s, cfg, SMALL).with_output(a))
        assert eval_closed(s, a, cfg, SMALL) == expected

    def test_netkat_rejects_parallel(self, heart):
        with pytest.raises(ClassificationError):
            eval_netkat(Par(SW1, SW1), heart)

    def test_netkat_outputs_needs_a_packet_program(self, small, exact, heart):
        with pytest.raises(ClassificationError):
            netkat_outputs(Dup(), heart, exact, small)

    def test_pocka_needs_a_dup_free_state_program(self, small, exact):
        with pytest.raises(ClassificationError):
            eval_pocka(Dup(), exact, small)
        with pytest.raises(ClassificationError):
            eval_pocka(FieldAssign("sw", "1"), exact, small)


class TestFragments:
    @given(packet_programs(SMALL), packet_sets(SMALL))
    def test_packet_programs_touch_no_state(self, y, a):
        assert is_packet_program(y)
        for t in evaluate(y, a, EvalConfig(star_bound=2, pad_bound=1), SMALL):
            assert t.pomset.size == 0

    @given(state_programs(SMALL, dup=True), packet_sets(SMALL, min_size=1))
    def test_state_programs_keep_packets(self, s, a):
        assert is_state_program(s)
        for t in evaluate(s, a, EvalConfig(star_bound=2, pad_bound=1), SMALL):
            assert t.output == a

    @given(state_programs(SMALL), packet_sets(SMALL, min_size=1), packet_sets(SMALL, min_size=1))
    def test_dup_free_state_programs_ignore_their_input(self, s, a, b):
        assert not contains_dup(s)
        cfg = EvalConfig(star_bound=2, pad_bound=0)
        assert evaluate(s, a, cfg, SMALL).with_output(None) == evaluate(s, b, cfg, SMALL).with_output(None)

    @given(det_packet_programs(SMALL), packet_sets(SMALL, min_size=1), packet_sets(SMALL, min_size=1))
    def test_deterministic_packet_programs_split(self, x, a, b):
        cfg = EvalConfig(star_bound=0, pad_bound=0)
        (whole,) = evaluate(x, a | b, cfg, SMALL).outputs()
        (left,) = evaluate(x, a, cfg, SMALL).outputs()
        (right,) = evaluate(x, b, cfg, SMALL).outputs()
        assert whole == left | right
