import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from wcsp import FunctionTable, Instance, RelationTable, ResourceError
from wcsp.dichotomy import (
    NoAutomorphism,
    NoMaltsev,
    check_automorphism,
    classify,
    find_automorphism,
    find_maltsev,
    find_unbalanced_witness,
    hom_value,
    is_polymorphism,
    iter_maltsev,
    minority,
    mon_value,
    multiplicity_sequence,
    polymorphism_counterexample,
    power_instance,
    power_language,
    products_unique,
    quadruples,
    special_elements,
)
from wcsp.fixtures import EQW, NOMALTSEV, ONE2, language, random_instance, random_language, random_tractable_language
from wcsp.oracle import marginal_matrix

EQ = RelationTable(2, 2, {(1, 1), (2, 2)})
VEE = RelationTable(2, 2, {(1, 1), (1, 2), (2, 1)})


def test_polymorphism_examples():
    m = minority(2)
    assert m.is_maltsev()
    assert is_polymorphism(m, EQ)
    assert polymorphism_counterexample(m, VEE) == ((1, 1), (1, 2), (2, 1))
    assert not is_polymorphism(m, VEE)
    assert is_polymorphism(m, RelationTable.full(2, 3))


def test_find_maltsev():
    ops = list(iter_maltsev([EQ], 2))
    assert len(ops) == 4 and minority(2) in ops
    assert find_maltsev([EQ]) == ops[0]
    assert find_maltsev([VEE]) is None
    assert find_maltsev([RelationTable.full(2, 2)]) == ops[0]


def test_maltsev_d3_by_enumeration():
    # every operation the pruned search yields is a genuine certificate
    theta = RelationTable(3, 2, {(1, 1), (2, 2), (3, 3), (1, 2), (2, 1)})
    fast = list(iter_maltsev([theta], 3))
    assert fast and all(m.is_maltsev() and is_polymorphism(m, theta) for m in fast)


def test_special_elements():
    a, b, c = special_elements(1, 2, 1, 2)
    assert a == (1, 1, 1, 2, 2, 2)
    assert b == (1, 1, 2, 2, 2, 1)
    assert c == (2, 2, 1, 1, 1, 2)
    assert len(quadruples(2)) == 4 and len(quadruples(3)) == 36


def test_power_values():
    P = power_language(language(EQW))
    a, b, c = special_elements(1, 2, 1, 2)
    assert P.g("EQW", a, a) == 216
    Q = power_language(language(ONE2))
    assert Q.g("ONE2", a, b) == 4
    assert Q.g("ONE2", a, c) == 2


def test_power_table_against_definition():
    f = FunctionTable.from_nested("H", [[Fraction(1, 2), 3], [0, 2]])
    P = power_language(language(f))
    rng = random.Random(0)
    for _ in range(50):
        e1 = tuple(rng.randint(1, 2) for _ in range(6))
        e2 = tuple(rng.randint(1, 2) for _ in range(6))
        expect = Fraction(1)
        for x, y in zip(e1, e2):
            expect *= f(x, y)
        assert P.g("H", e1, e2) == expect


def test_automorphisms_eqw():
    P = power_language(language(EQW))
    for quad in quadruples(2):
        pi = find_automorphism(P, quad)
        assert pi is not None and check_automorphism(P, quad, pi)


def test_no_automorphism_one2():
    assert find_automorphism(power_language(language(ONE2)), (1, 2, 1, 2)) is None


def test_constant_language_automorphism():
    ones = FunctionTable("O", 2, 2, (1, 1, 1, 1))
    P = power_language(language(ones))
    assert check_automorphism(P, (1, 2, 1, 2), find_automorphism(P, (1, 2, 1, 2)))


def test_check_automorphism_rejects_identity():
    P = power_language(language(EQW))
    assert not check_automorphism(P, (1, 2, 1, 2), tuple(range(P.size)))


def test_automorphism_bound():
    lang = random_tractable_language(random.Random(0), 3)
    with pytest.raises(ResourceError):
        find_automorphism(power_language(lang), (1, 2, 1, 2), max_d=2)


def test_classify_fixtures():
    v = classify(language(EQW))
    assert v.outcome == "TRACTABLE" and len(v.automorphisms) == 4
    v = classify(language(ONE2))
    assert v.outcome == "SHARP_P_HARD" and v.reason == NoAutomorphism((1, 2, 1, 2))
    assert str(v.reason) == "NoAutomorphism(1,2,1,2)"
    assert v.unbalanced.verdict.split == (1, 2)
    v = classify(language(NOMALTSEV))
    assert v.outcome == "SHARP_P_HARD" and isinstance(v.reason, NoMaltsev)
    assert len(v.reason.refutations) == 4


def test_hom_mon_examples():
    P = power_language(language(ONE2))
    G = P.as_language()
    J = Instance(G, 2, (("ONE2", (1, 2)),))
    a, b, c = (P.index(e) + 1 for e in special_elements(1, 2, 1, 2))
    assert hom_value(J, a, b) == 4 and hom_value(J, a, c) == 2
    assert mon_value(J, a, b) == 4
    assert mon_value(J, a, a) == 0


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6))
def test_hom_matches_marginals(seed):
    rng = random.Random(seed)
    lang = random_language(rng, 2, arities=(1, 2))
    I = random_instance(rng, lang, 3, rng.randint(1, 3))
    P = power_language(lang)
    J = power_instance(I, P.as_language())
    M = marginal_matrix(I, 1, 2)
    for al, be, ka, la in quadruples(2):
        a, b, _ = special_elements(al, be, ka, la)
        expect = (M[al - 1, ka - 1] ** 2 * M[be - 1, la - 1] ** 2
                  * M[al - 1, la - 1] * M[be - 1, ka - 1])
        assert hom_value(J, P.index(a) + 1, P.index(b) + 1) == expect


def test_multiplicity_examples():
    assert multiplicity_sequence({2, 3}, 2) == (1, 2)
    assert multiplicity_sequence({5}, 3) == (1, 1, 1)
    assert multiplicity_sequence({2, 4}, 2) == (1, 2)
    assert products_unique({2, 4}, (1, 2))
    assert not products_unique({2, 4}, (1, 1))


@given(st.sets(st.fractions(min_value=Fraction(1, 4), max_value=6, max_denominator=4)
               .filter(lambda q: q > 0), min_size=1, max_size=3), st.integers(1, 3))
def test_multiplicity_property(Q, k):
    seq = multiplicity_sequence(Q, k)
    assert len(seq) == k and all(N >= 1 for N in seq)
    assert products_unique(Q, seq)


def test_unbalanced_witness():
    inst, verdict = find_unbalanced_witness(language(ONE2))
    assert inst.m == 1 and verdict.split == (1, 2)
    assert find_unbalanced_witness(language(EQW), 3, 3) is None
    zero = FunctionTable("Z", 2, 2, (0, 0, 0, 0))
    assert find_unbalanced_witness(language(zero), 3, 2) is None


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 10**6))
def test_random_tractable_d2_classified_tractable(seed):
    lang = random_tractable_language(random.Random(seed), 2)
    v = classify(lang)
    assert v.tractable
    P = power_language(lang)
    assert all(check_automorphism(P, q, pi) for q, pi in v.automorphisms.items())


def test_hard_verdicts_have_unbalanced_witness():
    rng = random.Random(11)
    seen = 0
    for _ in range(30):
        lang = random_language(rng, 2, arities=(2,))
        v = classify(lang)
        if isinstance(v.reason, NoAutomorphism):
            seen += 1
            assert v.unbalanced is not None
            assert v.unbalanced.verdict.witness.holds_for(v.unbalanced.verdict.matrix)
    assert seen > 0
