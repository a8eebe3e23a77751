import random

import pytest
from hypothesis import given, settings, strategies as st

from wcsp import FunctionTable, Instance, Language, ValidationError
from wcsp.exactmat import RationalMatrix, is_block_rank_1
from wcsp.fixtures import EQW, ONE2, eqw_chain, language, random_instance, random_language, random_tractable_language
from wcsp.model import domain_tuples, evaluate, support_function
from wcsp.oracle import existential_matrix, marginal_matrix, partition_function, relation_of
from wcsp.reductions import (
    Graph,
    count_support,
    gadget_matrix,
    graph_partition_function,
    hardness_gadget,
    prefix_doubling,
    replicate,
    shared_prefix_power,
    value_set,
)

SINGLE_ONE2 = Instance(language(ONE2), 2, (("ONE2", (1, 2)),))
EDGE = Graph(2, ((1, 2),))
TRIANGLE = Graph(3, ((1, 2), (2, 3), (3, 1)))


def test_replicate_examples():
    assert partition_function(replicate(SINGLE_ONE2, 2)) == 7
    assert replicate(eqw_chain(), 1) == eqw_chain()
    assert partition_function(replicate(eqw_chain(), 2)) == 97
    with pytest.raises(ValidationError):
        replicate(eqw_chain(), 0)


def test_count_support_examples():
    single = Instance(language(EQW), 2, (("EQW", (1, 2)),))
    assert value_set(single).values == (2, 3)
    assert count_support(single) == 2
    const = FunctionTable("C", 2, 2, (3, 0, 3, 3))
    I = Instance(language(const), 2, (("C", (1, 2)),))
    assert count_support(I) == partition_function(I) / 3 == 3
    zero = FunctionTable("Z", 2, 1, (0, 0))
    assert count_support(Instance(language(EQW, zero), 2, (("Z", (1,)),))) == 0


def test_count_support_uses_only_the_oracle():
    calls = []

    def oracle(J):
        calls.append(J.m)
        return partition_function(J)

    assert count_support(eqw_chain(), oracle) == 2
    assert calls == [2, 4, 6]  # |Value_2| = |{4, 6, 9}| queries


def test_graph_partition_function_examples():
    A = RationalMatrix.from_rows([[2, 3], [3, 5]])
    assert graph_partition_function(A, EDGE) == 13
    assert graph_partition_function(A, Graph(3)) == 8
    assert graph_partition_function(RationalMatrix.from_rows([[1, 0], [0, 1]]), TRIANGLE) == 2
    with pytest.raises(ValidationError):
        graph_partition_function(RationalMatrix.from_rows([[1, 2], [3, 4]]), EDGE)


def test_gadget_examples():
    A = gadget_matrix(SINGLE_ONE2, 1, 2)
    assert A.tolist() == [[2, 3], [3, 5]]
    assert partition_function(hardness_gadget(SINGLE_ONE2, 1, 2, EDGE)) == 13
    assert partition_function(hardness_gadget(SINGLE_ONE2, 1, 2, Graph(2))) == 4
    loop = Graph(1, ((1, 1),))
    assert partition_function(hardness_gadget(SINGLE_ONE2, 1, 2, loop)) == 7


def test_gadget_variable_layout():
    I = Instance(language(EQW), 4, (("EQW", (1, 2)), ("EQW", (3, 4))))
    IG = hardness_gadget(I, 1, 2, EDGE)
    # 1 variable per vertex, then y (1) + z (2) + z' (2) for the edge
    assert IG.n == 2 + 5
    assert IG.applications == (
        ("EQW", (1, 3)), ("EQW", (4, 5)),
        ("EQW", (2, 3)), ("EQW", (6, 7)),
    )


def test_graph_validation():
    with pytest.raises(ValidationError):
        Graph(2, ((1, 3),))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_gadget_identity(seed):
    rng = random.Random(seed)
    lang = random_language(rng, 2, arities=(1, 2))
    I = random_instance(rng, lang, rng.randint(2, 3), rng.randint(1, 3))
    a = rng.randint(1, I.n - 1)
    b = rng.randint(a + 1, I.n)
    V = rng.randint(1, 3)
    G = Graph(V, tuple((rng.randint(1, V), rng.randint(1, V)) for _ in range(rng.randint(0, 3))))
    assert partition_function(hardness_gadget(I, a, b, G)) == graph_partition_function(gadget_matrix(I, a, b), G)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_replicate_power_law(seed, k):
    rng = random.Random(seed)
    lang = random_language(rng, 2, arities=(1, 2))
    I = random_instance(rng, lang, 3, rng.randint(0, 3))
    Ik = replicate(I, k)
    for x in domain_tuples(2, 3):
        assert evaluate(Ik, x) == evaluate(I, x) ** k


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_count_support_random(seed):
    rng = random.Random(seed)
    lang = random_language(rng, 2, arities=(1, 2))
    I = random_instance(rng, lang, rng.randint(1, 4), rng.randint(0, 3))
    assert count_support(I) == len(relation_of(I))


def test_shared_prefix_power_examples():
    R = relation_of(shared_prefix_power(eqw_chain(), 2, 2))
    assert R.members == {(1, 1, 1, 1), (2, 2, 2, 2)}
    assert shared_prefix_power(eqw_chain(), 1, 1) == eqw_chain()
    I3 = shared_prefix_power(eqw_chain(), 3, 2)
    assert I3.n == 3 and I3.applications == eqw_chain().applications * 2


def test_prefix_doubling_examples():
    assert marginal_matrix(prefix_doubling(eqw_chain(), 1), 1, 2).tolist() == [[16, 0], [0, 81]]
    assert marginal_matrix(prefix_doubling(SINGLE_ONE2, 1), 1, 2).tolist() == [[2, 3], [3, 5]]
    zero = FunctionTable("Z", 2, 2, (0, 0, 0, 0))
    I = Instance(language(zero), 2, (("Z", (1, 2)),))
    assert marginal_matrix(prefix_doubling(I, 1), 1, 2).tolist() == [[0, 0], [0, 0]]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_prefix_doubling_identity(seed):
    rng = random.Random(seed)
    lang = random_language(rng, 2, arities=(1, 2))
    I = random_instance(rng, lang, rng.randint(2, 3), rng.randint(1, 3))
    a = rng.randint(1, I.n - 1)
    M = marginal_matrix(I, a, a + 1)
    MtM = M.transpose() @ M
    assert marginal_matrix(prefix_doubling(I, a), 1, 2).entries == MtM.entries


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_shared_prefix_power_stays_strongly_balanced(seed):
    rng = random.Random(seed)
    lang = random_tractable_language(rng, 2)
    I = random_instance(rng, lang, 3, rng.randint(1, 3))
    c = rng.randint(1, 2)
    Ik = shared_prefix_power(I, c, 2)
    for a in range(1, Ik.n):
        for b in range(a + 1, Ik.n + 1):
            for cc in range(b, Ik.n + 1):
                assert is_block_rank_1(existential_matrix(Ik, a, b, cc))


def _indicator_instance(I):
    lang = Language(I.d, tuple(support_function(f).indicator(f.name) for f in I.language.functions))
    return Instance(lang, I.n, I.applications)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_shared_prefix_mechanism(seed):
    # M^[k](u, v) counts extensions of (u, v) in R_k and equals
    # sum_w |Y_{u,v,w}|^k; across k the support is fixed and, within each
    # block, |W_{u1,v1}| |W_{u2,v2}| = |W_{u1,v2}| |W_{u2,v1}|.
    rng = random.Random(seed)
    lang = random_tractable_language(rng, 2)
    I = _indicator_instance(random_instance(rng, lang, 4, rng.randint(1, 4)))
    a, b = sorted(rng.sample(range(1, 5), 2))
    c = rng.randint(b, 4)
    R = relation_of(I)
    Y: dict = {}
    for t in R:
        Y.setdefault((t[:a], t[a:b], t[b:c]), set()).add(t[c:])
    patterns = set()
    for k in (1, 2, 3):
        Mk = marginal_matrix(shared_prefix_power(I, c, k), a, b)
        assert is_block_rank_1(Mk)
        for i, u in enumerate(Mk.rows):
            for j, v in enumerate(Mk.cols):
                expect = sum(len(ys) ** k for (uu, vv, _), ys in Y.items() if (uu, vv) == (u, v))
                assert Mk[i, j] == expect
        patterns.add(tuple(tuple(x > 0 for x in r) for r in Mk.entries))
    assert len(patterns) == 1
    W = existential_matrix(I, a, b, c)
    assert is_block_rank_1(W)
