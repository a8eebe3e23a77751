"""Tractability classifier for weighted languages.

A language is tractable exactly when (1) its support language has a
Mal'tsev polymorphism and (2) for every choice of rows ``alpha != beta`` and
columns ``kappa != lambda`` the sixth power of the language has an
automorphism fixing ``a`` and sending ``b`` to ``c``, where::

    a = (alpha, alpha, alpha, beta, beta, beta)
    b = (kappa, kappa, lambda, lambda, lambda, kappa)
    c = (lambda, lambda, kappa, kappa, kappa, lambda)

Both searches are exhaustive within configurable bounds, and every verdict
carries a certificate (the operation and the automorphisms) or a
counterexample.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator

import numpy as np

from wcsp.errors import ResourceError, ValidationError
from wcsp.model import FunctionTable, Instance, Language, RelationTable, domain_tuples, support_language
from wcsp.oracle import BalanceVerdict, check_bound, test_balance

MALTSEV_MAX_D = 3
AUTOMORPHISM_MAX_D = 3
AUTOMORPHISM_MAX_TABLE = 2_000_000
AUTOMORPHISM_MAX_NODES = 20_000


# ---------------------------------------------------------------------------
# Mal'tsev polymorphisms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TernaryOperation:
    """``m: D^3 -> D`` stored row-major; ``m(a, b, c)`` is 1-based."""

    d: int
    table: tuple

    def __call__(self, a: int, b: int, c: int) -> int:
        d = self.d
        return self.table[((a - 1) * d + (b - 1)) * d + (c - 1)]

    @classmethod
    def from_callable(cls, d: int, fn) -> "TernaryOperation":
        return cls(d, tuple(fn(*t) for t in domain_tuples(d, 3)))

    def is_maltsev(self) -> bool:
        D = range(1, self.d + 1)
        return all(self(a, b, b) == a and self(b, b, a) == a for a in D for b in D)

    def apply(self, t1: tuple, t2: tuple, t3: tuple) -> tuple:
        return tuple(self(x, y, z) for x, y, z in zip(t1, t2, t3))


def minority(d: int = 2) -> TernaryOperation:
    """``x - y + z`` modulo ``d`` on ``{1..d}``; the minority operation for d=2."""
    return TernaryOperation.from_callable(d, lambda a, b, c: (a - b + c - 1) % d + 1)


def polymorphism_counterexample(m: TernaryOperation, theta: RelationTable):
    """A triple of members whose coordinatewise image leaves ``theta``, or None."""
    members = sorted(theta.members)
    for t1, t2, t3 in itertools.product(members, repeat=3):
        if m.apply(t1, t2, t3) not in theta.members:
            return t1, t2, t3
    return None


def is_polymorphism(m: TernaryOperation, theta: RelationTable) -> bool:
    return polymorphism_counterexample(m, theta) is None


def _free_triples(d: int) -> list:
    # triples not pinned by m(x,y,y) = m(y,y,x) = x
    return [t for t in domain_tuples(d, 3) if t[0] != t[1] and t[1] != t[2]]


def iter_maltsev(relations: Iterable[RelationTable], d: int) -> Iterator[TernaryOperation]:
    """All Mal'tsev polymorphisms of ``relations`` in lexicographic order of
    their values on the free triples."""
    relations = list(relations)
    free = _free_triples(d)
    position = {t: k for k, t in enumerate(free)}
    value: dict = {}
    for x in range(1, d + 1):
        for y in range(1, d + 1):
            value[x, y, y] = x
            value[y, y, x] = x

    # each closure constraint becomes checkable once its last free triple is set
    checks: list = [[] for _ in range(len(free) + 1)]
    for theta in relations:
        members = sorted(theta.members)
        seen = set()
        for t1, t2, t3 in itertools.product(members, repeat=3):
            coords = tuple(zip(t1, t2, t3))
            if coords in seen:
                continue
            seen.add(coords)
            last = max((position[c] + 1 for c in coords if c in position), default=0)
            checks[last].append((coords, theta.members))

    def holds(level: int) -> bool:
        return all(tuple(value[c] for c in coords) in mem for coords, mem in checks[level])

    if not holds(0):
        return

    def extend(k: int):
        if k == len(free):
            yield TernaryOperation(d, tuple(value[t] for t in domain_tuples(d, 3)))
            return
        for v in range(1, d + 1):
            value[free[k]] = v
            if holds(k + 1):
                yield from extend(k + 1)
        del value[free[k]]

    yield from extend(0)


def find_maltsev(relations: Iterable[RelationTable], d: int | None = None, max_d: int = MALTSEV_MAX_D):
    """The lexicographically first Mal'tsev polymorphism, or None."""
    relations = list(relations)
    if d is None:
        d = relations[0].d
    if d > max_d:
        raise ResourceError(f"Mal'tsev search over d={d} exceeds bound {max_d}")
    return next(iter_maltsev(relations, d), None)


# ---------------------------------------------------------------------------
# Sixth power
# ---------------------------------------------------------------------------

POWER = 6


def special_elements(alpha: int, beta: int, kappa: int, lam: int) -> tuple:
    if alpha == beta or kappa == lam:
        raise ValidationError("need alpha != beta and kappa != lambda")
    a = (alpha, alpha, alpha, beta, beta, beta)
    b = (kappa, kappa, lam, lam, lam, kappa)
    c = (lam, lam, kappa, kappa, kappa, lam)
    return a, b, c


def quadruples(d: int) -> list:
    D = range(1, d + 1)
    return [(al, be, ka, la) for al in D for be in D for ka in D for la in D if al != be and ka != la]


@dataclass
class PowerLanguage:
    """The sixth power of a language.

    Power elements are 6-tuples over ``D``; element ``e`` has index
    ``tuple_index(e)`` (lexicographic order).  ``tables[name]`` holds
    ``g(e_1..e_r) * scale[name]`` as exact Python ints in an object array of
    shape ``(d^6,) * r``.
    """

    base: Language
    tables: dict
    scale: dict

    @property
    def d(self) -> int:
        return self.base.d

    @property
    def size(self) -> int:
        return self.base.d**POWER

    def index(self, element: tuple) -> int:
        idx = 0
        for a in element:
            idx = idx * self.d + (a - 1)
        return idx

    def element(self, index: int) -> tuple:
        out = []
        for _ in range(POWER):
            index, rem = divmod(index, self.d)
            out.append(rem + 1)
        return tuple(reversed(out))

    def g(self, name: str, *elements: tuple) -> Fraction:
        idx = tuple(self.index(e) for e in elements)
        return Fraction(int(self.tables[name][idx]), self.scale[name])

    def as_language(self) -> Language:
        """The power language as an ordinary language over ``d^6`` elements."""
        funcs = []
        for f in self.base.functions:
            flat = self.tables[f.name].reshape(-1)
            s = self.scale[f.name]
            funcs.append(FunctionTable(f.name, self.size, f.arity, tuple(Fraction(int(v), s) for v in flat)))
        return Language(self.size, tuple(funcs))


def power_language(language: Language) -> PowerLanguage:
    """``g(e_1..e_r) = prod_j f(e_1[j], ..., e_r[j])`` over the six coordinates."""
    d = language.d
    tables, scale = {}, {}
    for f in language.functions:
        den = math.lcm(*(v.denominator for v in f.values))
        base = np.empty((d,) * f.arity, dtype=object)
        for x, v in f.items():
            base[tuple(a - 1 for a in x)] = int(v * den)
        t = base
        for _ in range(POWER - 1):
            t = np.multiply.outer(t, base)
        # axes are (coordinate j, argument k); regroup to (k, j) then flatten each argument
        r = f.arity
        order = [j * r + k for k in range(r) for j in range(POWER)]
        t = t.transpose(order).reshape((d**POWER,) * r)
        tables[f.name] = t
        scale[f.name] = den**POWER
    return PowerLanguage(language, tables, scale)


def power_instance(instance: Instance, power: Language) -> Instance:
    """The same applications, over the power language."""
    return Instance(power, instance.n, instance.applications)


# ---------------------------------------------------------------------------
# Automorphism search by colour refinement and individualisation
# ---------------------------------------------------------------------------

def _code_tables(P: PowerLanguage) -> list:
    out = []
    for name, t in P.tables.items():
        _, inv = np.unique(t.reshape(-1), return_inverse=True)
        out.append(inv.astype(np.int64).reshape(t.shape))
    return out


class _Refiner:
    def __init__(self, codes: list, n: int):
        self.codes = codes
        self.n = n
        self._proj = None

    def digest(self, sig: np.ndarray) -> np.ndarray:
        # two random linear hashes per row (int64 wrap-around).  Equal rows get
        # equal digests on both sides, so the partition stays invariant; a
        # collision can only merge colours, never lose an automorphism.
        if self._proj is None or self._proj.shape[0] != sig.shape[1]:
            rng = np.random.default_rng(0x5EED)
            self._proj = rng.integers(1, 2**62, size=(sig.shape[1], 2), dtype=np.int64)
        with np.errstate(over="ignore"):
            return sig @ self._proj

    def signatures(self, colors: np.ndarray, ncolors: int) -> np.ndarray:
        n = self.n
        parts = [colors[:, None]]
        for code in self.codes:
            r = code.ndim
            if r == 1:
                parts.append(code[:, None])
                continue
            for p in range(r):
                moved = np.moveaxis(code, p, 0).reshape(n, -1)
                key = np.zeros((n,) * (r - 1), dtype=np.int64)
                for q in range(r - 1):
                    shape = [1] * (r - 1)
                    shape[q] = n
                    key = key * ncolors + colors.reshape(shape)
                combined = moved * (ncolors ** (r - 1)) + key.reshape(1, -1)
                combined.sort(axis=1)
                parts.append(combined)
        return np.hstack(parts)

    def refine(self, left: np.ndarray, right: np.ndarray):
        n = self.n
        _, inv = np.unique(np.concatenate([left, right]), return_inverse=True)
        inv = inv.reshape(-1).astype(np.int64)
        left, right = inv[:n], inv[n:]
        ncolors = int(inv.max()) + 1
        while True:
            sig = np.vstack([self.signatures(left, ncolors), self.signatures(right, ncolors)])
            _, inv = np.unique(self.digest(sig), axis=0, return_inverse=True)
            inv = inv.reshape(-1).astype(np.int64)
            left, right = inv[:n], inv[n:]
            new = int(inv.max()) + 1
            if new == ncolors:
                return left, right
            ncolors = new


def _preserves(codes: list, perm: np.ndarray) -> bool:
    for code in codes:
        idx = np.ix_(*([perm] * code.ndim))
        if not np.array_equal(code[idx], code):
            return False
    return True


def _cellwise_guess(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    n = left.size
    perm = np.full(n, -1, dtype=np.int64)
    same = left == right
    perm[same] = np.flatnonzero(same)
    free_l = np.flatnonzero(~same)
    free_r = np.flatnonzero(~same)
    perm[free_l[np.argsort(left[free_l], kind="stable")]] = free_r[np.argsort(right[free_r], kind="stable")]
    return perm


def find_automorphism(
    P: PowerLanguage,
    quad: tuple,
    max_d: int = AUTOMORPHISM_MAX_D,
    max_nodes: int = AUTOMORPHISM_MAX_NODES,
    codes: list | None = None,
) -> tuple | None:
    """A bijection ``pi`` of the power domain (as a tuple of indices) with
    ``pi(a) = a``, ``pi(b) = c`` and ``g(pi(y)) = g(y)`` for every ``g``.

    The search is complete: it backtracks over individualisations of a
    colour-refined partition, so None means no such bijection exists.
    """
    if P.d > max_d:
        raise ResourceError(f"automorphism search over d={P.d} exceeds bound {max_d}")
    n = P.size
    for f in P.base.functions:
        if n**f.arity > AUTOMORPHISM_MAX_TABLE:
            raise ResourceError(f"power table of {f.name} has {n ** f.arity} entries")
    codes = _code_tables(P) if codes is None else codes
    a, b, c = (P.index(e) for e in special_elements(*quad))
    refiner = _Refiner(codes, n)
    left = np.zeros(n, dtype=np.int64)
    right = np.zeros(n, dtype=np.int64)
    left[a], right[a] = 1, 1
    left[b], right[c] = 2, 2
    nodes = 0

    def search(left, right):
        nonlocal nodes
        nodes += 1
        if nodes > max_nodes:
            raise ResourceError(f"automorphism search exceeded {max_nodes} nodes")
        left, right = refiner.refine(left, right)
        hl = np.bincount(left, minlength=2 * n)
        hr = np.bincount(right, minlength=2 * n)
        if not np.array_equal(hl, hr):
            return None
        # guess within each cell: fix vertices coloured alike on both sides and
        # pair the rest in index order.  Exact once the partition is discrete,
        # and usually already an automorphism when cells consist of twins.
        perm = _cellwise_guess(left, right)
        if _preserves(codes, perm):
            return perm
        if hl.max() == 1:
            return None
        sizes = np.where(hl > 1, hl, n + 1)
        target = int(np.argmin(sizes))
        v = int(np.flatnonzero(left == target)[0])
        fresh = int(max(left.max(), right.max())) + 1
        for w in np.flatnonzero(right == target):
            l2, r2 = left.copy(), right.copy()
            l2[v], r2[int(w)] = fresh, fresh
            found = search(l2, r2)
            if found is not None:
                return found
        return None

    perm = search(left, right)
    if perm is None:
        return None
    assert perm[a] == a and perm[b] == c
    return tuple(int(x) for x in perm)


def check_automorphism(P: PowerLanguage, quad: tuple, perm: tuple) -> bool:
    """Exhaustive re-check of a claimed automorphism against exact ``g`` values."""
    a, b, c = (P.index(e) for e in special_elements(*quad))
    if sorted(perm) != list(range(P.size)) or perm[a] != a or perm[b] != c:
        return False
    p = np.array(perm)
    for t in P.tables.values():
        moved = t[np.ix_(*([p] * t.ndim))]
        if not all(x == y for x, y in zip(moved.reshape(-1), t.reshape(-1))):
            return False
    return True


# ---------------------------------------------------------------------------
# hom / mon sums over power instances
# ---------------------------------------------------------------------------

def _pinned_sum(J: Instance, a: int, s: int, injective: bool, bound: int | None) -> Fraction:
    from wcsp.model import _evaluate_unchecked

    if J.n < 2:
        raise ValidationError("power instance needs at least two variables")
    check_bound(J.d, J.n - 2, bound)
    total = Fraction(0)
    for rest in domain_tuples(J.d, J.n - 2):
        y = (a, s) + rest
        if injective and len(set(y)) != len(y):
            continue
        total += _evaluate_unchecked(J, y)
    return total


def hom_value(J: Instance, a: int, s: int, bound: int | None = None) -> Fraction:
    """``sum_{y_3..y_n} G(a, s, y_3, ..., y_n)``; elements are 1-based power-domain values."""
    return _pinned_sum(J, a, s, False, bound)


def mon_value(J: Instance, a: int, s: int, bound: int | None = None) -> Fraction:
    """As :func:`hom_value` but only over injective tuples."""
    return _pinned_sum(J, a, s, True, bound)


# ---------------------------------------------------------------------------
# Distinct-product exponents
# ---------------------------------------------------------------------------

def products_unique(Q: Iterable, exponents: tuple) -> bool:
    """Brute force: distinct tuples over ``Q`` give distinct weighted products."""
    Q = sorted(set(Fraction(q) for q in Q))
    seen = set()
    for qs in itertools.product(Q, repeat=len(exponents)):
        p = Fraction(1)
        for q, e in zip(qs, exponents):
            p *= q**e
        if p in seen:
            return False
        seen.add(p)
    return True


def multiplicity_sequence(Q: Iterable, k: int) -> tuple:
    """Positive integers ``N_1..N_k`` such that ``prod q_i^N_i`` determines
    ``(q_1..q_k)`` over ``Q``.

    ``N_{i+1}`` is the least integer with ``cmin^N > cmax^(N_1+...+N_i)``,
    where ``cmin``/``cmax`` are the least/greatest ratios ``q/q'`` with
    ``q > q'``.  Each prefix is then brute-force checked and bumped on a
    collision (which the inequality rules out, so the check is a
    certificate rather than a search).
    """
    Q = sorted(set(Fraction(q) for q in Q))
    if not Q or Q[0] <= 0:
        raise ValidationError("Q must be a nonempty set of positive numbers")
    if k < 1:
        raise ValidationError("k must be positive")
    if len(Q) == 1:
        return (1,) * k
    cmin = min(q2 / q1 for q1, q2 in zip(Q, Q[1:]))
    cmax = Q[-1] / Q[0]
    seq = [1]
    check_limit = 200_000
    while len(seq) < k:
        target = cmax ** sum(seq)
        N = 1
        while cmin**N <= target:
            N += 1
        seq.append(N)
        if len(Q) ** len(seq) <= check_limit:
            while not products_unique(Q, tuple(seq)):
                seq[-1] += 1
    return tuple(seq)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoMaltsev:
    """The support language has no Mal'tsev polymorphism.

    ``refutations`` lists, for every candidate operation (when there are few
    enough to list), a relation name and a member triple it fails to close.
    """

    refutations: tuple = ()

    def __str__(self) -> str:
        return "NoMaltsev"


@dataclass(frozen=True)
class NoAutomorphism:
    quad: tuple

    def __str__(self) -> str:
        return "NoAutomorphism({},{},{},{})".format(*self.quad)


@dataclass(frozen=True)
class UnbalancedInstance:
    instance: Instance
    verdict: BalanceVerdict

    def __str__(self) -> str:
        return f"UnbalancedInstance(split={self.verdict.split})"


@dataclass(frozen=True)
class Verdict:
    tractable: bool
    reason: object = None
    maltsev: TernaryOperation | None = None
    automorphisms: dict = field(default_factory=dict)
    unbalanced: UnbalancedInstance | None = None

    @property
    def outcome(self) -> str:
        return "TRACTABLE" if self.tractable else "SHARP_P_HARD"


def _refute_all(relations: dict, d: int, limit: int = 64) -> tuple:
    free = _free_triples(d)
    if d ** len(free) > limit:
        return ()
    out = []
    for values in itertools.product(range(1, d + 1), repeat=len(free)):
        assigned = dict(zip(free, values))

        def fn(a, b, c):
            if (a, b, c) in assigned:
                return assigned[a, b, c]
            return a if b == c else c

        m = TernaryOperation.from_callable(d, fn)
        for name, theta in relations.items():
            bad = polymorphism_counterexample(m, theta)
            if bad is not None:
                out.append((m, name, bad))
                break
    return tuple(out)


def classify(
    language: Language,
    maltsev_max_d: int = MALTSEV_MAX_D,
    automorphism_max_d: int = AUTOMORPHISM_MAX_D,
    witness_bounds: tuple = (2, 2),
) -> Verdict:
    """Decide tractable vs #P-hard, with certificate or counterexample.

    On a missing automorphism, a small exhaustive search for an unbalanced
    instance (``witness_bounds = (max_n, max_m)``) is attached when it
    succeeds.
    """
    return _classify_cached(language, maltsev_max_d, automorphism_max_d, witness_bounds)


@lru_cache(maxsize=64)
def _classify_cached(language, maltsev_max_d, automorphism_max_d, witness_bounds) -> Verdict:
    d = language.d
    gamma = support_language(language)
    m = find_maltsev(gamma.values(), d, maltsev_max_d)
    if m is None:
        return Verdict(False, NoMaltsev(_refute_all(gamma, d)))
    if d == 1:
        return Verdict(True, None, m, {})
    if d > automorphism_max_d:
        raise ResourceError(f"automorphism search over d={d} exceeds bound {automorphism_max_d}")
    P = power_language(language)
    codes = _code_tables(P)
    autos = {}
    for quad in quadruples(d):
        pi = find_automorphism(P, quad, automorphism_max_d, codes=codes)
        if pi is None:
            found = find_unbalanced_witness(language, *witness_bounds)
            unbalanced = UnbalancedInstance(*found) if found else None
            return Verdict(False, NoAutomorphism(quad), m, autos, unbalanced)
        autos[quad] = pi
    return Verdict(True, None, m, autos)


def candidate_applications(language: Language, n: int) -> list:
    return [
        (f.name, idx)
        for f in language.functions
        for idx in itertools.product(range(1, n + 1), repeat=f.arity)
    ]


def iter_instances(language: Language, max_n: int, max_m: int, min_n: int = 1, min_m: int = 0):
    """Every instance up to the bounds, as multisets of applications, by
    increasing ``n`` then ``m``."""
    for n in range(min_n, max_n + 1):
        apps = candidate_applications(language, n)
        for m in range(min_m, max_m + 1):
            for combo in itertools.combinations_with_replacement(apps, m):
                yield Instance(language, n, combo)


def find_unbalanced_witness(language: Language, max_n: int = 3, max_m: int = 3, bound: int | None = None):
    """First instance (by size) with a marginal matrix that is not
    block-rank-1, as ``(instance, BalanceVerdict)``; None within the bounds
    is inconclusive."""
    for inst in iter_instances(language, max_n, max_m, min_n=2, min_m=1):
        verdict = test_balance(inst, bound)
        if not verdict:
            return inst, verdict
    return None
