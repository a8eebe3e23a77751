"""Vector representations: unary weights ``s_1..s_r`` with
``f(x) = s_1(x_1) ... s_r(x_r)`` wherever ``f(x) > 0``.

Where ``f(x) = 0`` the product may be positive ("holes" are allowed).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from wcsp.errors import NotApplicable
from wcsp.exactmat import BlockDecomposition, RationalMatrix, block_decompose, find_rank_violation
from wcsp.model import FunctionTable, Instance, Language, domain_tuples, marginalize
from wcsp.oracle import function_table


@dataclass(frozen=True)
class VectorRepresentation:
    """``factors[j][a - 1]`` is ``s_{j+1}(a)``."""

    factors: tuple

    @property
    def arity(self) -> int:
        return len(self.factors)

    def s(self, j: int, a: int) -> Fraction:
        """``s_j(a)`` with 1-based ``j`` and ``a``."""
        return self.factors[j - 1][a - 1]

    def __call__(self, x: Sequence[int]) -> Fraction:
        value = Fraction(1)
        for s, a in zip(self.factors, x):
            value *= s[a - 1]
        return value


@dataclass(frozen=True)
class NotBlockRank1:
    """``f^[level]`` viewed as a ``d^(level-1) x d`` matrix is not block-rank-1."""

    level: int
    witness: object = None

    def __bool__(self) -> bool:
        return False


def _level_matrix(g: FunctionTable) -> RationalMatrix:
    d, r = g.d, g.arity
    rows = tuple(domain_tuples(d, r - 1))
    entries = tuple(g.values[k * d:(k + 1) * d] for k in range(d ** (r - 1)))
    return RationalMatrix(rows, tuple((a,) for a in range(1, d + 1)), entries)


def least_row(rows: tuple) -> int:
    return rows[0]


def function_vecrep(
    f: FunctionTable, pick: Callable[[tuple], int] = least_row
) -> VectorRepresentation | NotBlockRank1:
    """Build ``s`` level by level from the marginals ``f^[1], ..., f^[r]``.

    ``pick`` chooses the reference row of each block (any row works; the
    default is the lexicographically least).
    """
    d = f.d
    factors = [marginalize(f, 1).values]
    for ell in range(2, f.arity + 1):
        M = _level_matrix(marginalize(f, ell))
        bad = find_rank_violation(M)
        if bad is not None:
            return NotBlockRank1(ell, bad)
        dec = block_decompose(M)
        assert isinstance(dec, BlockDecomposition)
        s = [Fraction(0)] * d
        for rows, cols in dec.blocks:
            u = pick(rows)
            row = M.entries[u]
            total = sum((row[v] for v in cols), Fraction(0))
            for v in cols:
                s[v] = Fraction(row[v]) / total
        factors.append(tuple(s))
    return VectorRepresentation(tuple(tuple(s) for s in factors))


@lru_cache(maxsize=128)
def language_vecreps(language: Language) -> dict:
    """Per-function representations (or :class:`NotBlockRank1`), computed once."""
    return {f.name: function_vecrep(f) for f in language.functions}


def instance_vecrep(instance: Instance, reps: dict | None = None) -> VectorRepresentation:
    """Multiply per-position factors of every application into ``s_1..s_n``."""
    reps = language_vecreps(instance.language) if reps is None else reps
    d = instance.d
    s = [[Fraction(1)] * d for _ in range(instance.n)]
    for name, idx in instance.applications:
        rep = reps[name]
        if not isinstance(rep, VectorRepresentation):
            raise NotApplicable(f"function {name} has no vector representation (level {rep.level})")
        for j, i in enumerate(idx):
            target = s[i - 1]
            factor = rep.factors[j]
            for a in range(d):
                target[a] *= factor[a]
    return VectorRepresentation(tuple(tuple(x) for x in s))


def verify_vecrep(target: FunctionTable | Instance, s: VectorRepresentation, bound: int | None = None) -> bool:
    """True iff ``s`` reproduces ``target`` at every point of its support."""
    if isinstance(target, FunctionTable):
        points = target.items()
    else:
        points = zip(domain_tuples(target.d, target.n), function_table(target, bound))
    return all(s(x) == v for x, v in points if v > 0)
