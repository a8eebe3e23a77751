"""Named fixture languages and random generators for test corpora."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from wcsp.model import FunctionTable, Instance, Language

EQW = FunctionTable.from_nested("EQW", [[2, 0], [0, 3]])
ONE2 = FunctionTable.from_nested("ONE2", [[1, 1], [1, 2]])
RANK1 = FunctionTable.from_nested("R1", [[1, 2], [2, 4]])
# support {(1,1),(1,2),(2,1)}: closed under no Mal'tsev operation
NOMALTSEV = FunctionTable.from_nested("NM", [[1, 1], [1, 0]])


def language(*functions: FunctionTable) -> Language:
    return Language(functions[0].d, tuple(functions))


def eqw_chain() -> Instance:
    return Instance(language(EQW), 3, (("EQW", (1, 2)), ("EQW", (2, 3))))


def random_weight(rng: random.Random, zero_prob: float = 0.0) -> Fraction:
    if rng.random() < zero_prob:
        return Fraction(0)
    return Fraction(rng.randint(1, 6), rng.randint(1, 3))


def random_partition(rng: random.Random, d: int) -> list:
    labels = [rng.randrange(d) for _ in range(d)]
    return labels


def block_table(rng: random.Random, name: str, d: int, arity: int, labels: list, twist=None) -> FunctionTable:
    """``f(x) = prod_j s_j(x_j)`` on tuples whose entries share a block label
    (after ``twist`` on the last coordinate), zero elsewhere.

    Every such table is block-diagonal with rank-1 blocks in each
    coordinate, and a language built from one fixed labelling (plus unary
    weights) is balanced.
    """
    twist = twist or {}
    s = [[random_weight(rng, 0.15) for _ in range(d)] for _ in range(arity)]

    def value(*x):
        lab = [labels[a - 1] for a in x]
        lab[-1] = twist.get(lab[-1], lab[-1])
        if len(set(lab)) > 1:
            return 0
        out = Fraction(1)
        for j, a in enumerate(x):
            out *= s[j][a - 1]
        return out

    return FunctionTable.from_callable(name, d, arity, value)


def random_tractable_language(rng: random.Random, d: int, arities=(1, 2), twist: bool = True) -> Language:
    """A random language of block-structured product tables sharing one
    domain labelling.  Binary tables may permute block labels between
    their two coordinates."""
    labels = random_partition(rng, d)
    funcs = []
    for k, r in enumerate(arities):
        tw = None
        if twist and r == 2 and rng.random() < 0.5:
            present = sorted(set(labels))
            perm = present[:]
            rng.shuffle(perm)
            tw = dict(zip(present, perm))
        funcs.append(block_table(rng, f"f{k}", d, r, labels, tw))
    return Language(d, tuple(funcs))


def random_language(rng: random.Random, d: int, arities=(2,), zero_prob: float = 0.3) -> Language:
    funcs = [
        FunctionTable(f"g{k}", d, r, tuple(random_weight(rng, zero_prob) for _ in range(d**r)))
        for k, r in enumerate(arities)
    ]
    return Language(d, tuple(funcs))


def random_instance(rng: random.Random, lang: Language, n: int, m: int) -> Instance:
    apps = []
    for _ in range(m):
        f = rng.choice(lang.functions)
        apps.append((f.name, tuple(rng.randint(1, n) for _ in range(f.arity))))
    return Instance(lang, n, tuple(apps))


def all_instances(lang: Language, max_n: int, max_m: int):
    """Every instance with ``1 <= n <= max_n`` and ``0 <= m <= max_m``
    (applications as multisets)."""
    for n in range(1, max_n + 1):
        apps = [
            (f.name, idx)
            for f in lang.functions
            for idx in itertools.product(range(1, n + 1), repeat=f.arity)
        ]
        for m in range(max_m + 1):
            for combo in itertools.combinations_with_replacement(apps, m):
                yield Instance(lang, n, combo)
