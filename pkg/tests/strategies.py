"""Hypothesis strategies for universes, predicates, observations and programs."""
import itertools
from collections.abc import Iterator

from hypothesis import strategies as st

from cnetkat.domain.ast import (
    Abort,
    Complete,
    Dup,
    FieldAssign,
    FieldTest,
    OAnd,
    OBot,
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
from cnetkat.domain.models import CompleteAtom, PiExpr, Universe
from cnetkat.services.pomset import Pomset, PomsetLanguage, make

# Two fields with two values each and one variable.
SMALL = Universe.from_mapping({"sw": [1, 2], "type": ["heart", "spade"]}, {"v": [0, 1]})

# One field and one variable: few enough packet sets for normal-form matrices to stay tiny.
TINY = Universe.from_mapping({"sw": [1, 2]}, {"v": [0, 1]})

# Two variables, for copies and merges.
STORE = Universe.from_mapping({"sw": [1, 2]}, {"v": [0, 1], "w": [0, 1]})


def packets(u: Universe):
    return st.sampled_from(u.packets)


def packet_sets(u: Universe, min_size: int = 0):
    return st.sampled_from([a for a in u.packet_sets if len(a) >= min_size])


def _field_tests(u: Universe):
    return st.sampled_from([FieldTest(f, n) for f, values in u.fields for n in values])


def predicates(u: Universe, max_leaves: int = 3):
    leaves = st.one_of(_field_tests(u), st.just(PTrue()), st.just(PFalse()))
    return st.recursive(
        leaves,
        lambda inner: st.one_of(
            st.builds(PAnd, inner, inner),
            st.builds(POr, inner, inner),
            st.builds(PNot, inner),
        ),
        max_leaves=max_leaves,
    )


def observations(u: Universe, max_leaves: int = 3):
    tests = st.sampled_from([VarTest(v, n) for v, values in u.vars for n in values])
    leaves = st.one_of(tests, st.just(OTop()), st.just(OBot()))
    return st.recursive(
        leaves,
        lambda inner: st.one_of(
            st.builds(OAnd, inner, inner),
            st.builds(OOr, inner, inner),
            st.builds(ONot, inner),
        ),
        max_leaves=max_leaves,
    )


def field_assigns(u: Universe):
    return st.sampled_from([FieldAssign(f, n) for f, values in u.fields for n in values])


def var_assigns(u: Universe):
    return st.sampled_from([VarAssign(v, n) for v, values in u.vars for n in values])


def var_copies(u: Universe):
    return st.sampled_from([VarCopy(v, w) for v in u.var_names for w in u.var_names])


def complete_atoms(u: Universe):
    return st.builds(
        lambda pk, flavor: Complete(CompleteAtom(pk, flavor)),
        packets(u),
        st.sampled_from(list(AtomFlavor)),
    )


def pis(u: Universe):
    return st.builds(lambda a: Pi(PiExpr.of_set(a)), packet_sets(u))


def netkat_terms(u: Universe, max_leaves: int = 4):
    """Parallel-free packet programs."""
    leaves = st.one_of(st.builds(Test, predicates(u, 2)), field_assigns(u))
    return st.recursive(
        leaves,
        lambda inner: st.one_of(
            st.builds(Union, inner, inner),
            st.builds(Seq, inner, inner),
            st.builds(Star, inner),
        ),
        max_leaves=max_leaves,
    )


def _combine(leaves, max_leaves: int, star: bool, par: bool = True):
    def extend(inner):
        options = [st.builds(Union, inner, inner), st.builds(Seq, inner, inner)]
        if par:
            options.append(st.builds(Par, inner, inner))
        if star:
            options.append(st.builds(Star, inner))
        return st.one_of(*options)

    return st.recursive(leaves, extend, max_leaves=max_leaves)


def packet_programs(u: Universe, max_leaves: int = 3, star: bool = True):
    leaves = st.one_of(st.builds(Test, predicates(u, 2)), field_assigns(u), complete_atoms(u), pis(u))
    return _combine(leaves, max_leaves, star)


def det_packet_programs(u: Universe, max_leaves: int = 3):
    leaves = st.one_of(st.builds(Test, predicates(u, 2)), field_assigns(u), complete_atoms(u), pis(u))
    return st.recursive(
        leaves,
        lambda inner: st.one_of(st.builds(Seq, inner, inner), st.builds(Par, inner, inner)),
        max_leaves=max_leaves,
    )


def state_programs(u: Universe, max_leaves: int = 3, star: bool = True, dup: bool = False, copies: bool = False):
    """Programs over observations, store actions and packet-set literals; they never change packets."""
    options = [
        st.builds(Observe, observations(u, 2)),
        var_assigns(u),
        st.just(Skip()),
        st.just(Abort()),
        st.builds(PacketLiteral, packet_sets(u, min_size=1)),
    ]
    if copies:
        options.append(var_copies(u))
    if dup:
        options.append(st.just(Dup()))
    return _combine(st.one_of(*options), max_leaves, star)


def programs(u: Universe, max_leaves: int = 3, star: bool = True):
    leaves = st.one_of(
        st.builds(Test, predicates(u, 2)),
        st.builds(Observe, observations(u, 2)),
        field_assigns(u),
        var_assigns(u),
        st.just(Skip()),
        st.just(Abort()),
        st.just(Dup()),
        st.builds(PacketLiteral, packet_sets(u, min_size=1)),
        complete_atoms(u),
        pis(u),
    )
    return _combine(leaves, max_leaves, star)


def starred_programs(u: Universe, max_leaves: int = 2):
    """Programs with exactly one star, outermost or after a star-free prefix."""
    body = programs(u, max_leaves, star=False)
    return st.one_of(st.builds(Star, body), st.builds(lambda p, q: Seq(p, Star(q)), body, body))


def _transitive(less: frozenset, n: int) -> bool:
    return all((i, k) in less for i, j, k in itertools.permutations(range(n), 3) if (i, j) in less and (j, k) in less)


def population(labels, max_nodes: int) -> list[Pomset]:
    """Every pomset with at most ``max_nodes`` nodes over ``labels``, up to isomorphism."""
    language = PomsetLanguage()
    for n in range(max_nodes + 1):
        pairs = list(itertools.combinations(range(n), 2))
        for k in range(len(pairs) + 1):
            for order in itertools.combinations(pairs, k):
                less = frozenset(order)
                if not _transitive(less, n):
                    continue
                for combo in itertools.product(labels, repeat=n):
                    language.add(Pomset(tuple(combo), less))
    return list(language)


def _frame(n: int) -> frozenset[tuple[int, int]]:
    return frozenset({(0, j) for j in range(1, n)} | {(i, n - 1) for i in range(1, n - 1)})


def framed_population(ends, inner, n: int) -> Iterator[Pomset]:
    """Every pomset on ``n`` nodes whose least and greatest nodes are labelled from ``ends``.

    Not deduplicated; node 0 lies below and node ``n-1`` above every other node.
    """
    pairs = list(itertools.combinations(range(1, n - 1), 2))
    for k in range(len(pairs) + 1):
        for order in itertools.combinations(pairs, k):
            less = frozenset(order)
            if not _transitive(less, n):
                continue
            for low, high in itertools.product(ends, repeat=2):
                for middle in itertools.product(inner, repeat=n - 2):
                    yield Pomset((low, *middle, high), less | _frame(n))


@st.composite
def framed_pomsets(draw, ends, inner, n: int) -> Pomset:
    pairs = draw(st.sets(st.sampled_from(list(itertools.combinations(range(1, n - 1), 2)))))
    middle = draw(st.lists(st.sampled_from(inner), min_size=n - 2, max_size=n - 2))
    low, high = draw(st.sampled_from(ends)), draw(st.sampled_from(ends))
    return make((low, *middle, high), pairs | _frame(n))
