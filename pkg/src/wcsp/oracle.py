"""Brute-force ground truth by explicit enumeration of ``D^n``.

Everything here is exponential in ``n`` and guarded by an enumeration
bound (``d**n <= bound``).  The module doubles as the witness engine for
the structured counter: projections, the prefix-sharing classes ``~_i`` and
their witness tuples are computed from the enumerated relation.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from wcsp.errors import NotEquivalenceError, ResourceError, ValidationError
from wcsp.exactmat import RationalMatrix, find_rank_violation
from wcsp.model import Instance, RelationTable, _evaluate_unchecked, domain_tuples

DEFAULT_BOUND = 10**7


def check_bound(d: int, n: int, bound: int | None) -> None:
    bound = DEFAULT_BOUND if bound is None else bound
    if d**n > bound:
        raise ResourceError(f"enumeration of {d}^{n} assignments exceeds bound {bound}")


@lru_cache(maxsize=512)
def _table(instance: Instance) -> tuple:
    return tuple(_evaluate_unchecked(instance, x) for x in domain_tuples(instance.d, instance.n))


def function_table(instance: Instance, bound: int | None = None) -> tuple:
    """``F_I`` at every assignment, row-major (last variable fastest)."""
    check_bound(instance.d, instance.n, bound)
    return _table(instance)


def _partial_sum(args) -> Fraction:
    instance, first = args
    total = Fraction(0)
    for rest in domain_tuples(instance.d, instance.n - 1):
        total += _evaluate_unchecked(instance, (first,) + rest)
    return total


def partition_function(instance: Instance, bound: int | None = None, workers: int = 1) -> Fraction:
    """``Z(I)``, the sum of ``F_I`` over all ``d^n`` assignments."""
    check_bound(instance.d, instance.n, bound)
    if workers > 1 and instance.n >= 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_partial_sum, [(instance, a) for a in range(1, instance.d + 1)])
            return sum(parts, Fraction(0))
    return sum(_table(instance), Fraction(0))


def relation_of(instance: Instance, bound: int | None = None) -> RelationTable:
    table = function_table(instance, bound)
    members = frozenset(
        x for x, v in zip(domain_tuples(instance.d, instance.n), table) if v > 0
    )
    return RelationTable(instance.d, instance.n, members)


def _check_split(n: int, a: int, b: int, c: int | None = None) -> None:
    if c is None:
        ok = 1 <= a < b <= n
    else:
        ok = 1 <= a < b <= c <= n
    if not ok:
        raise ValidationError(f"invalid split a={a}, b={b}, c={c} for n={n}")


def marginal_matrix(instance: Instance, a: int, b: int, bound: int | None = None) -> RationalMatrix:
    """``M(u, v) = sum_w F(u, v, w)`` with ``u in D^a``, ``v in D^(b-a)``."""
    n, d = instance.n, instance.d
    _check_split(n, a, b)
    table = function_table(instance, bound)
    tail = d ** (n - b)
    ncols = d ** (b - a)
    entries = []
    for u in range(d**a):
        base = u * ncols * tail
        entries.append(tuple(
            sum(table[base + v * tail: base + (v + 1) * tail], Fraction(0)) for v in range(ncols)
        ))
    return RationalMatrix(
        tuple(domain_tuples(d, a)), tuple(domain_tuples(d, b - a)), tuple(entries)
    )


def existential_matrix(instance: Instance, a: int, b: int, c: int, bound: int | None = None) -> RationalMatrix:
    """``M(u, v) = |{w in D^(c-b) : exists z, (u, v, w, z) in R}|``."""
    n, d = instance.n, instance.d
    _check_split(n, a, b, c)
    R = relation_of(instance, bound)
    seen = {(x[:a], x[a:b], x[b:c]) for x in R.members}
    counts: dict = {}
    for u, v, _ in seen:
        counts[u, v] = counts.get((u, v), 0) + 1
    rows = tuple(domain_tuples(d, a))
    cols = tuple(domain_tuples(d, b - a))
    entries = tuple(tuple(counts.get((u, v), 0) for v in cols) for u in rows)
    return RationalMatrix(rows, cols, entries)


def projection(R: RelationTable, i: int) -> dict:
    """``pr_i R`` as a sorted dict ``a -> lexicographically least member with x_i = a``."""
    if not 1 <= i <= R.arity:
        raise ValidationError(f"coordinate {i} outside [1, {R.arity}]")
    out: dict = {}
    for t in sorted(R.members):
        out.setdefault(t[i - 1], t)
    return dict(sorted(out.items()))


def _prefix_groups(R: RelationTable, i: int) -> dict:
    groups: dict = {}
    for t in R.members:
        groups.setdefault(t[: i - 1], set()).add(t[i - 1])
    return groups


@dataclass(frozen=True)
class NotEquivalence:
    """``a ~_i b`` and ``b ~_i c`` but not ``a ~_i c``."""

    coordinate: int
    a: int
    b: int
    c: int


def equivalence_classes(R: RelationTable, i: int) -> list[tuple] | NotEquivalence:
    """Classes of ``~_i`` on ``pr_i R`` (a ~ b iff some prefix extends to both),
    sorted by smallest element."""
    if not 1 <= i <= R.arity:
        raise ValidationError(f"coordinate {i} outside [1, {R.arity}]")
    groups = _prefix_groups(R, i)
    related = {(a, b) for s in groups.values() for a in s for b in s}
    neighbours: dict = {}
    for a, b in related:
        neighbours.setdefault(a, set()).add(b)
    for b in sorted(neighbours):
        nb = sorted(neighbours[b])
        for a in nb:
            for c in nb:
                if (a, c) not in related:
                    return NotEquivalence(i, a, b, c)
    classes = {frozenset(neighbours[a]) for a in neighbours}
    return sorted((tuple(sorted(c)) for c in classes), key=lambda c: c[0])


@dataclass(frozen=True)
class ClassWitness:
    elements: tuple
    prefix: tuple
    suffixes: dict  # element -> suffix tuple in D^(n-i)


@dataclass(frozen=True)
class WitnessBundle:
    coordinate: int
    classes: tuple

    def class_of(self, a: int) -> ClassWitness | None:
        for cw in self.classes:
            if a in cw.elements:
                return cw
        return None


def witnesses(R: RelationTable, i: int) -> WitnessBundle:
    """For each class of ``~_i``: the least prefix ``u`` extending to every
    element of the class, and the least suffix for each element."""
    classes = equivalence_classes(R, i)
    if isinstance(classes, NotEquivalence):
        raise NotEquivalenceError(i, (classes.a, classes.b, classes.c))
    groups = _prefix_groups(R, i)
    suffix: dict = {}
    for t in sorted(R.members):
        suffix.setdefault((t[: i - 1], t[i - 1]), t[i:])
    out = []
    for cls in classes:
        members = set(cls)
        prefix = next((p for p in sorted(groups) if groups[p] == members), None)
        if prefix is None:
            raise NotEquivalenceError(
                i, None, f"class {cls} of ~_{i} has no prefix extending to all its elements"
            )
        out.append(ClassWitness(cls, prefix, {a: suffix[prefix, a] for a in cls}))
    return WitnessBundle(i, tuple(out))


@dataclass(frozen=True)
class BalanceVerdict:
    balanced: bool
    mode: str
    split: tuple | None = None
    matrix: RationalMatrix | None = None
    witness: object = None

    def __bool__(self) -> bool:
        return self.balanced


def _scan(mode, splits, build):
    for split in splits:
        M = build(*split)
        w = find_rank_violation(M)
        if w is not None:
            return BalanceVerdict(False, mode, split, M, w)
    return BalanceVerdict(True, mode)


def test_balance(instance: Instance, bound: int | None = None) -> BalanceVerdict:
    n = instance.n
    splits = [(a, b) for a in range(1, n) for b in range(a + 1, n + 1)]
    return _scan("balance", splits,
                 lambda a, b: marginal_matrix(instance, a, b, bound))


def test_weak_balance(instance: Instance, bound: int | None = None) -> BalanceVerdict:
    splits = [(a, a + 1) for a in range(1, instance.n)]
    return _scan("weak", splits,
                 lambda a, b: marginal_matrix(instance, a, b, bound))


def test_primitive_balance(instance: Instance, bound: int | None = None) -> BalanceVerdict:
    splits = [(1, 2)] if instance.n >= 2 else []
    return _scan("primitive", splits,
                 lambda a, b: marginal_matrix(instance, a, b, bound))


def test_strong_balance(instance: Instance, bound: int | None = None) -> BalanceVerdict:
    n = instance.n
    splits = [(a, b, c) for a in range(1, n) for b in range(a + 1, n + 1) for c in range(b, n + 1)]
    return _scan("strong", splits,
                 lambda a, b, c: existential_matrix(instance, a, b, c, bound))


# keep pytest from collecting the balance tests when imported into test modules
for _f in (test_balance, test_weak_balance, test_primitive_balance, test_strong_balance):
    _f.__test__ = False
del _f

BALANCE_TESTS = {
    "balance": test_balance,
    "weak": test_weak_balance,
    "primitive": test_primitive_balance,
    "strong": test_strong_balance,
}


def conditional_sum(instance: Instance, prefix: tuple, bound: int | None = None) -> Fraction:
    """``sum over x_{i+1..n} of F(prefix, x_{i+1..n})`` with ``i = len(prefix)``."""
    d, n = instance.d, instance.n
    table = function_table(instance, bound)
    i = len(prefix)
    span = d ** (n - i)
    start = 0
    for a in prefix:
        start = start * d + (a - 1)
    start *= span
    return sum(table[start:start + span], Fraction(0))
