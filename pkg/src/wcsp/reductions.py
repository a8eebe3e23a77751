"""Instance constructions used by the reductions.

* ``replicate`` and ``count_support``: counting the support of an instance
  with a partition-function oracle (replicate every application ``k`` times,
  then solve a Vandermonde system in the multiplicities of each value).
* ``hardness_gadget``: from an instance whose split matrix ``M`` is not
  block-rank-1 and a graph ``G``, an instance with ``Z(I_G) = Z_A(G)`` for
  ``A = M M^T``.
* ``shared_prefix_power`` and ``prefix_doubling``: the copy-and-glue
  constructions that relate balance, weak balance and strong balance.

Variable orderings follow the constructions literally so that split
indices carry over unchanged.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from wcsp.errors import ContractError, ValidationError
from wcsp.exactmat import RationalMatrix, solve_exact
from wcsp.model import Instance
from wcsp.oracle import check_bound, marginal_matrix, partition_function


@dataclass(frozen=True)
class Graph:
    """Undirected multigraph on vertices ``1..n_vertices``; loops allowed."""

    n_vertices: int
    edges: tuple = ()

    def __post_init__(self):
        if self.n_vertices < 0:
            raise ValidationError("vertex count must be non-negative")
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        for u, v in edges:
            if not (1 <= u <= self.n_vertices and 1 <= v <= self.n_vertices):
                raise ValidationError(f"edge ({u}, {v}) has an endpoint outside [1, {self.n_vertices}]")
        object.__setattr__(self, "edges", edges)


# ---------------------------------------------------------------------------
# support counting
# ---------------------------------------------------------------------------

def replicate(instance: Instance, k: int) -> Instance:
    """Every application repeated ``k`` times, so ``F_k = F^k`` pointwise."""
    if k < 1:
        raise ValidationError("k must be at least 1")
    apps = tuple(app for app in instance.applications for _ in range(k))
    return Instance(instance.language, instance.n, apps)


@dataclass(frozen=True)
class ValueSet:
    m: int
    values: tuple  # sorted distinct positive products

    def __len__(self) -> int:
        return len(self.values)

    def __contains__(self, w) -> bool:
        return Fraction(w) in set(self.values)


def value_set(instance: Instance) -> ValueSet:
    """Every positive value ``F(x)`` can take: products choosing one positive
    value of each applied function.  Built one application at a time over the
    set of distinct partial products."""
    reachable = {Fraction(1)}
    for name, _ in instance.applications:
        positive = {v for v in instance.language[name].values if v > 0}
        reachable = {p * v for p in reachable for v in positive}
        if not reachable:
            break
    return ValueSet(instance.m, tuple(sorted(reachable)))


def count_support(
    instance: Instance,
    z_oracle: Callable[[Instance], Fraction] = partition_function,
) -> int:
    """``|R|`` for the support ``R`` of ``F_I``, using only ``Z`` values of
    the replicated instances ``I_1..I_N`` with ``N = |Value_m|``.

    Writing ``N_c`` for the number of assignments with ``F(x) = c``, each
    query gives ``Z(I_k) = sum_c N_c c^k``; the system is Vandermonde in the
    distinct values ``c`` and so has a unique solution.
    """
    values = value_set(instance).values
    if not values:
        return 0
    zs = [Fraction(z_oracle(replicate(instance, k))) for k in range(1, len(values) + 1)]
    if not any(zs):
        return 0
    A = [[c**k for c in values] for k in range(1, len(values) + 1)]
    counts = solve_exact(A, zs)
    for c, N in zip(values, counts):
        if N < 0 or N.denominator != 1:
            raise ContractError(f"multiplicity of value {c} solved to {N}, not a non-negative integer")
    return int(sum(counts))


# ---------------------------------------------------------------------------
# graph homomorphism gadget
# ---------------------------------------------------------------------------

def graph_partition_function(A: RationalMatrix, G: Graph, bound: int | None = None) -> Fraction:
    """``Z_A(G) = sum over maps xi: V -> rows of prod_{uv in E} A(xi(u), xi(v))``."""
    q = A.shape[0]
    if A.shape != (q, q):
        raise ValidationError("A must be square")
    if any(A[i, j] != A[j, i] for i in range(q) for j in range(i)):
        raise ValidationError("A must be symmetric")
    check_bound(q, G.n_vertices, bound)
    total = Fraction(0)
    for xi in itertools.product(range(q), repeat=G.n_vertices):
        w = Fraction(1)
        for u, v in G.edges:
            w *= A[xi[u - 1], xi[v - 1]]
            if not w:
                break
        total += w
    return total


def gadget_matrix(instance: Instance, a: int, b: int, bound: int | None = None) -> RationalMatrix:
    """``A = M M^T`` for the split matrix ``M`` at ``(a, b)``."""
    M = marginal_matrix(instance, a, b, bound)
    return M @ M.transpose()


def _copy(instance: Instance, mapping: list) -> tuple:
    # applications of ``instance`` with variable j renamed to mapping[j - 1]
    return tuple((name, tuple(mapping[i - 1] for i in idx)) for name, idx in instance.applications)


def hardness_gadget(instance: Instance, a: int, b: int, G: Graph) -> Instance:
    """``I_G``: ``a`` variables per vertex, then per edge ``e = vv'`` the
    variables ``y_{e,a+1..b}``, ``z_{e,b+1..n}``, ``z'_{e,b+1..n}``, with one
    copy of ``I`` on ``(x_v, y_e, z_e)`` and one on ``(x_v', y_e, z'_e)``."""
    n = instance.n
    if not 1 <= a < b <= n:
        raise ValidationError(f"need 1 <= a < b <= n, got a={a}, b={b}, n={n}")
    per_edge = (b - a) + 2 * (n - b)
    total = G.n_vertices * a + len(G.edges) * per_edge
    apps: tuple = ()
    for e, (v, w) in enumerate(G.edges):
        base = G.n_vertices * a + e * per_edge
        y = [base + k for k in range(1, b - a + 1)]
        z = [base + (b - a) + k for k in range(1, n - b + 1)]
        z2 = [base + (b - a) + (n - b) + k for k in range(1, n - b + 1)]
        xv = [(v - 1) * a + k for k in range(1, a + 1)]
        xw = [(w - 1) * a + k for k in range(1, a + 1)]
        apps += _copy(instance, xv + y + z) + _copy(instance, xw + y + z2)
    return Instance(instance.language, total, apps)


# ---------------------------------------------------------------------------
# copy-and-glue transformers
# ---------------------------------------------------------------------------

def shared_prefix_power(instance: Instance, c: int, k: int) -> Instance:
    """``I_k`` on ``x_1..x_c, y_{1,c+1..n}, ..., y_{k,c+1..n}``: ``k`` copies
    of ``I`` sharing the first ``c`` variables."""
    n = instance.n
    if not 1 <= c <= n:
        raise ValidationError(f"need 1 <= c <= n, got c={c}, n={n}")
    if k < 1:
        raise ValidationError("k must be at least 1")
    apps: tuple = ()
    for i in range(k):
        mapping = list(range(1, c + 1)) + [c + i * (n - c) + j for j in range(1, n - c + 1)]
        apps += _copy(instance, mapping)
    return Instance(instance.language, c + k * (n - c), apps)


def prefix_doubling(instance: Instance, a: int) -> Instance:
    """``I'`` on ``x_1, x_2, y_1..y_a, z_1..z_{n-a-1}, w_1..w_{n-a-1}``: copies
    of ``I`` on ``(y, x_1, z)`` and ``(y, x_2, w)``, so the ``(1, 2)`` split
    matrix of ``I'`` is ``M^T M`` for the ``(a, a+1)`` split matrix ``M``."""
    n = instance.n
    if not 1 <= a < n:
        raise ValidationError(f"need 1 <= a < n, got a={a}, n={n}")
    tail = n - a - 1
    y = [2 + j for j in range(1, a + 1)]
    z = [2 + a + j for j in range(1, tail + 1)]
    w = [2 + a + tail + j for j in range(1, tail + 1)]
    apps = _copy(instance, y + [1] + z) + _copy(instance, y + [2] + w)
    return Instance(instance.language, 2 * n - a, apps)
