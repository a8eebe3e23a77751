"""Exact analysis of non-negative matrices: rectangularity and block-rank-1.

A matrix is *rectangular* when its positive entries form disjoint blocks
``A_k x B_k`` after permuting rows and columns separately, and
*block-rank-1* when in addition every block has rank one.  All tests use
exact cross-multiplication; nothing here ever divides.

Matrix positions are 0-based Python indices.  Row and column labels (tuples
over the domain) are carried along for reporting only.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence

from wcsp.errors import ContractError, ValidationError


@dataclass(frozen=True)
class RationalMatrix:
    """Dense non-negative matrix with tuple-labelled rows and columns.

    Entries are exact rationals (``int`` or ``Fraction``).
    """

    rows: tuple
    cols: tuple
    entries: tuple

    def __post_init__(self):
        entries = tuple(tuple(r) for r in self.entries)
        if len(entries) != len(self.rows):
            raise ValidationError("row count does not match row labels")
        for r in entries:
            if len(r) != len(self.cols):
                raise ValidationError("column count does not match column labels")
            for v in r:
                if not isinstance(v, Rational) or v < 0:
                    raise ValidationError(f"entries must be non-negative rationals, got {v!r}")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "cols", tuple(self.cols))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "RationalMatrix":
        """Unlabelled matrix; labels default to ``(1,), (2,), ...``."""
        rows = [list(r) for r in rows]
        ncols = len(rows[0]) if rows else 0
        return cls(
            tuple((i + 1,) for i in range(len(rows))),
            tuple((j + 1,) for j in range(ncols)),
            tuple(tuple(r) for r in rows),
        )

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.cols)

    def __getitem__(self, ij) -> Rational:
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other) -> bool:
        if isinstance(other, RationalMatrix):
            return self.entries == other.entries and self.rows == other.rows and self.cols == other.cols
        return NotImplemented

    __hash__ = object.__hash__

    def tolist(self) -> list:
        return [list(r) for r in self.entries]

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix(self.cols, self.rows, tuple(zip(*self.entries)) if self.rows else ())

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if len(self.cols) != len(other.rows):
            raise ValidationError("inner dimensions differ")
        ocols = list(zip(*other.entries)) if other.rows else [() for _ in other.cols]
        out = tuple(
            tuple(sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in ocols)
            for row in self.entries
        )
        return RationalMatrix(self.rows, other.cols, out)

    def total(self) -> Fraction:
        return sum((v for r in self.entries for v in r), Fraction(0))


@dataclass(frozen=True)
class BlockDecomposition:
    """Blocks ``(A_k, B_k)`` of row and column indices, ordered by smallest row."""

    blocks: tuple
    zero_rows: tuple
    zero_cols: tuple

    def __len__(self) -> int:
        return len(self.blocks)


@dataclass(frozen=True)
class NotRectangular:
    """``M[i, j], M[i, j2], M[i2, j] > 0`` but ``M[i2, j2] == 0``."""

    i: int
    j: int
    i2: int
    j2: int

    def holds_for(self, M: RationalMatrix) -> bool:
        return M[self.i, self.j] > 0 and M[self.i, self.j2] > 0 and M[self.i2, self.j] > 0 and M[self.i2, self.j2] == 0


@dataclass(frozen=True)
class RankViolation:
    """A positive 2x2 minor inside one block: ``M[i,j] M[i2,j2] != M[i,j2] M[i2,j]``."""

    i: int
    j: int
    i2: int
    j2: int

    def holds_for(self, M: RationalMatrix) -> bool:
        vals = (M[self.i, self.j], M[self.i, self.j2], M[self.i2, self.j], M[self.i2, self.j2])
        return all(v > 0 for v in vals) and vals[0] * vals[3] != vals[1] * vals[2]


class _DisjointSet:
    def __init__(self, size: int):
        self.parent = list(range(size))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            if rx < ry:
                self.parent[ry] = rx
            else:
                self.parent[rx] = ry


_pattern_cache: dict = {}


def _decompose_pattern(shape: tuple, pattern: tuple):
    """Block structure of a 0/1 support pattern (flattened row-major)."""
    key = (shape, pattern)
    hit = _pattern_cache.get(key)
    if hit is not None:
        return hit
    m, n = shape
    adj_r = [[j for j in range(n) if pattern[i * n + j]] for i in range(m)]
    ds = _DisjointSet(m + n)
    for i in range(m):
        for j in adj_r[i]:
            ds.union(i, m + j)
    comps: dict = {}
    for i in range(m):
        if adj_r[i]:
            comps.setdefault(ds.find(i), ([], []))[0].append(i)
    for j in range(n):
        r = ds.find(m + j)
        if r in comps:
            comps[r][1].append(j)
    blocks = []
    result = None
    for rows, cols in sorted(comps.values()):
        colset = set(cols)
        for i in rows:
            if len(adj_r[i]) != len(colset):
                result = _rect_witness(rows, adj_r, pattern, n)
                break
        if result is not None:
            break
        blocks.append((tuple(rows), tuple(cols)))
    if result is None:
        zr = tuple(i for i in range(m) if not adj_r[i])
        used = {j for _, cols in blocks for j in cols}
        zc = tuple(j for j in range(n) if j not in used)
        result = BlockDecomposition(tuple(blocks), zr, zc)
    if len(_pattern_cache) > 100_000:
        _pattern_cache.clear()
    _pattern_cache[key] = result
    return result


def _rect_witness(rows, adj_r, pattern, n) -> NotRectangular:
    # a connected non-complete bipartite component has a zero at distance 3
    adj_c: dict = {}
    for i in rows:
        for j in adj_r[i]:
            adj_c.setdefault(j, []).append(i)
    for i2 in rows:
        for j in adj_r[i2]:
            for i in adj_c[j]:
                for j2 in adj_r[i]:
                    if not pattern[i2 * n + j2]:
                        return NotRectangular(i, j, i2, j2)
    raise AssertionError("component is complete bipartite")


def block_decompose(M: RationalMatrix) -> BlockDecomposition | NotRectangular:
    """Connected components of the bipartite support graph of ``M``.

    Returns a :class:`NotRectangular` witness when some component is not a
    complete bipartite graph.
    """
    pattern = tuple(v > 0 for r in M.entries for v in r)
    return _decompose_pattern(M.shape, pattern)


def find_rank_violation(M: RationalMatrix) -> NotRectangular | RankViolation | None:
    """None when ``M`` is block-rank-1, else a reproducible witness."""
    dec = block_decompose(M)
    if isinstance(dec, NotRectangular):
        return dec
    E = M.entries
    for rows, cols in dec.blocks:
        i0, j0 = rows[0], cols[0]
        p = E[i0][j0]
        row0 = E[i0]
        for i in rows[1:]:
            ri = E[i]
            q = ri[j0]
            for j in cols[1:]:
                # all entries in a block are positive; compare with the pivot minor
                if p * ri[j] != row0[j] * q:
                    return RankViolation(i0, j0, i, j)
    return None


def is_block_rank_1(M: RationalMatrix) -> bool:
    return find_rank_violation(M) is None


def rank1_condition(M: RationalMatrix) -> bool:
    """The six-factor identity that characterises block-rank-1 for a
    rectangular square matrix::

        M(a,k)^2 M(b,l)^2 M(a,l) M(b,k) == M(a,l)^2 M(b,k)^2 M(a,k) M(b,l)

    for all rows ``a != b`` and columns ``k != l``.
    """
    m, n = M.shape
    if m != n:
        raise ContractError(f"rank1_condition needs a square matrix, got {m}x{n}")
    if isinstance(block_decompose(M), NotRectangular):
        raise ContractError("rank1_condition requires a rectangular matrix")
    E = M.entries
    # swapping a<->b maps the identity onto itself with k<->l, so unordered pairs suffice
    for a in range(m):
        for b in range(a + 1, m):
            ra, rb = E[a], E[b]
            for k in range(n):
                for l in range(k + 1, n):
                    ak, bl, al, bk = ra[k], rb[l], ra[l], rb[k]
                    if ak * ak * bl * bl * al * bk != al * al * bk * bk * ak * bl:
                        return False
    return True


def find_bad_row_pair(M: RationalMatrix) -> tuple[int, int] | None:
    """Two rows with positive inner product that are not proportional.

    Such a pair exists exactly when ``M`` is not block-rank-1.
    """
    E = M.entries
    n = len(M.cols)
    for i in range(len(E)):
        for k in range(i + 1, len(E)):
            u, v = E[i], E[k]
            if sum(a * b for a, b in zip(u, v)) <= 0:
                continue
            for j in range(n):
                if any(u[j] * v[l] != u[l] * v[j] for l in range(j + 1, n)):
                    return i, k
    return None


def solve_exact(A: Sequence[Sequence], b: Sequence) -> list[Fraction]:
    """Solve the square system ``A x = b`` over the rationals by Gaussian
    elimination with exact arithmetic.  Raises on a singular matrix."""
    n = len(A)
    rows = [[Fraction(v) for v in A[i]] + [Fraction(b[i])] for i in range(n)]
    for c in range(n):
        piv = next((r for r in range(c, n) if rows[r][c] != 0), None)
        if piv is None:
            raise ValidationError("singular system")
        rows[c], rows[piv] = rows[piv], rows[c]
        pr = rows[c]
        inv = 1 / pr[c]
        for k in range(c, n + 1):
            pr[k] *= inv
        for r in range(n):
            if r != c and rows[r][c] != 0:
                f = rows[r][c]
                rr = rows[r]
                for k in range(c, n + 1):
                    rr[k] -= f * pr[k]
    return [rows[i][n] for i in range(n)]
