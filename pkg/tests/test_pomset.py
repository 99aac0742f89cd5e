"""Tests for pomset composition, comparison and closure."""
import pytest

from cnetkat.domain.errors import DomainError, ResourceBudgetError
from cnetkat.domain.models import PacketSet, State, StateAction, StateChoice
from cnetkat.services import pomset as pom
from cnetkat.services.pomset import Pomset, PomsetLanguage
from tests.strategies import population

A = StateAction("v", value="0")
B = StateAction("v", value="1")
ALPHA = State()
BETA = State((("v", "0"),))
GAMMA = State((("v", "1"),))


def orders_below(u: Pomset, members: list[Pomset]) -> list[Pomset]:
    return [w for w in members if pom.subsumed_by(w, u)]


class TestComposition:
    def test_empty_is_a_unit(self):
        u = pom.chain([A, ALPHA])
        assert pom.iso(pom.seq(pom.empty(), u), u)
        assert pom.iso(pom.seq(u, pom.empty()), u)
        assert pom.iso(pom.par(pom.empty(), u), u)

    def test_seq_orders_everything(self):
        u = pom.seq(pom.par(pom.singleton(A), pom.singleton(B)), pom.singleton(ALPHA))
        assert u.less == frozenset({(0, 2), (1, 2)})
        assert not u.comparable(0, 1)

    def test_par_keeps_duplicates(self):
        u = pom.par(pom.singleton(A), pom.singleton(A))
        assert u.size == 2
        assert not u.less

    def test_associative_and_commutative(self):
        x, y, z = pom.singleton(A), pom.chain([B, ALPHA]), pom.singleton(GAMMA)
        assert pom.iso(pom.seq(pom.seq(x, y), z), pom.seq(x, pom.seq(y, z)))
        assert pom.iso(pom.par(pom.par(x, y), z), pom.par(x, pom.par(y, z)))
        assert pom.iso(pom.par(x, y), pom.par(y, x))

    def test_make_rejects_cycles(self):
        with pytest.raises(DomainError, match="cycle"):
            pom.make([A, B], [(0, 1), (1, 0)])

    def test_hasse_edges_skip_implied_pairs(self):
        assert pom.chain([A, B, ALPHA]).hasse_edges() == [(0, 1), (1, 2)]

    def test_to_dot(self):
        dot = pom.to_dot(pom.chain([A, ALPHA]), name="u")
        assert dot.splitlines()[0] == "digraph u {"
        assert '  n0 [label="v<-0"];' in dot
        assert "  n0 -> n1;" in dot


class TestComparisons:
    def test_iso(self):
        ab, ba = pom.chain([A, B]), pom.chain([B, A])
        assert pom.iso(ab, ab)
        assert not pom.iso(ab, ba)
        assert pom.iso(pom.par(pom.singleton(A), pom.singleton(B)), pom.par(pom.singleton(B), pom.singleton(A)))

    def test_subsumption(self):
        ab = pom.chain([A, B])
        a_b = pom.par(pom.singleton(A), pom.singleton(B))
        assert pom.subsumed_by(ab, a_b)
        assert not pom.subsumed_by(a_b, ab)
        assert pom.subsumed_by(ab, ab)

    def test_contraction_of_equal_states(self):
        # a -> (alpha . alpha || b) -> c, both alphas merged
        v = pom.make([A, BETA, BETA, GAMMA, B], [(0, 1), (1, 2), (0, 3), (2, 4), (3, 4)])
        u = pom.make([A, BETA, GAMMA, B], [(0, 1), (0, 2), (1, 3), (2, 3)])
        assert pom.contracts_to(u, v)
        assert pom.contracts_to(v, v)

    def test_no_contraction_of_different_states(self):
        v = pom.chain([BETA, GAMMA])
        assert not pom.contracts_to(pom.singleton(BETA), v)

    def test_actions_never_merge(self):
        assert not pom.contracts_to(pom.singleton(A), pom.chain([A, A]))


class TestClosure:
    def test_parallel_pair(self):
        closed = pom.close([pom.par(pom.singleton(A), pom.singleton(B))])
        assert len(closed) == 3
        assert pom.chain([A, B]) in closed
        assert pom.chain([B, A]) in closed

    def test_empty(self):
        closed = pom.close([pom.empty()])
        assert list(closed) == [pom.empty()]

    def test_equal_states_contract(self):
        closed = pom.close([pom.chain([BETA, BETA])])
        assert pom.singleton(BETA) in closed
        assert pom.chain([BETA, BETA]) in closed

    def test_node_budget(self):
        with pytest.raises(ResourceBudgetError) as exc:
            pom.close([pom.chain([A, B, A])], node_budget=2)
        assert exc.value.observed == 3

    def test_closure_budget(self):
        wide = pom.par(pom.par(pom.singleton(A), pom.singleton(B)), pom.singleton(ALPHA))
        with pytest.raises(ResourceBudgetError):
            pom.close([wide], closure_budget=3)

    def test_project_state(self):
        packets = PacketSet()
        assert pom.project_state(pom.chain([packets, packets])).size == 0
        u = pom.chain([ALPHA, packets, A])
        assert pom.iso(pom.project_state(u), pom.chain([ALPHA, A]))
        plain = pom.chain([ALPHA, A])
        assert pom.iso(pom.project_state(plain), plain)


class TestCover:
    def test_agrees_with_closure_membership(self):
        members = population([A, ALPHA, BETA], 3)
        for v in members:
            closed = pom.close([v])
            for u in members:
                assert (pom.find_cover(v, u) is not None) == (u in closed), (u, v)

    def test_choice_node_covers_its_states(self):
        choice = StateChoice(frozenset({BETA, GAMMA}))
        pattern = pom.chain([choice, A])
        assert pom.find_cover(pattern, pom.chain([BETA, A])) is not None
        assert pom.find_cover(pattern, pom.chain([ALPHA, A])) is None

    def test_optional_nodes_may_vanish(self):
        pattern = Pomset((ALPHA, A), frozenset({(0, 1)}), frozenset({0}))
        assert pom.find_cover(pattern, pom.singleton(A)) is not None
        assert pom.find_cover(pattern, pom.chain([ALPHA, A])) is not None

    def test_instances(self):
        choice = StateChoice(frozenset({BETA, GAMMA}))
        pattern = Pomset((choice, A), frozenset({(0, 1)}), frozenset({0}))
        found = PomsetLanguage(pom.instances(pattern))
        assert len(found) == 3
        assert pom.singleton(A) in found


LABELS = [A, B, ALPHA, BETA, GAMMA]


def _check_closure_laws(members: list[Pomset]) -> None:
    closures = {id(u): pom.close([u]) for u in members}
    for u in members:
        closed = closures[id(u)]
        assert pom.close(closed) == closed
        assert u in closed
    for u, v in zip(members, reversed(members)):
        both = pom.close([u, v])
        assert both == closures[id(u)].union(closures[id(v)])
        assert closures[id(u)].issubset(both)


def _check_factorization(members: list[Pomset]) -> None:
    for v in members:
        closed = pom.close([v])
        between = orders_below(v, members)
        for u in members:
            if u.size > v.size:
                continue
            factored = any(pom.contracts_to(u, w) for w in between)
            assert factored == (u in closed), (u, v)


def test_closure_laws():
    _check_closure_laws(population(LABELS, 3))


def test_factorization():
    _check_factorization(population([A, ALPHA, BETA], 3))


@pytest.mark.slow
def test_closure_laws_exhaustive():
    _check_closure_laws(population(LABELS, 4))


@pytest.mark.slow
def test_factorization_exhaustive():
    _check_factorization(population(LABELS, 4))
