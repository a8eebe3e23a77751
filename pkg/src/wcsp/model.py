"""Shared data model: domains, weighted languages, instances and relations.

Domain elements and variable indices are 1-based throughout, so that
``(1, 2, 1)`` is an assignment over ``D = {1, 2}`` and an application
``("f", (1, 3))`` applies ``f`` to variables ``x_1`` and ``x_3``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from wcsp.errors import ValidationError

Weight = Fraction
Assignment = tuple  # tuple[int, ...] with entries in 1..d


def as_weight(value) -> Fraction:
    w = Fraction(value)
    if w < 0:
        raise ValidationError(f"weights must be non-negative, got {value!r}")
    return w


def domain_tuples(d: int, length: int) -> Iterator[tuple]:
    """All tuples over ``{1..d}`` of the given length in lexicographic order."""
    return itertools.product(range(1, d + 1), repeat=length)


def tuple_index(x: Sequence[int], d: int) -> int:
    """Row-major position of ``x`` (last coordinate fastest)."""
    idx = 0
    for a in x:
        idx = idx * d + (a - 1)
    return idx


@dataclass(frozen=True)
class FunctionTable:
    """A named function ``f: D^r -> Q>=0`` stored densely in row-major order."""

    name: str
    d: int
    arity: int
    values: tuple

    def __post_init__(self):
        if self.d < 1:
            raise ValidationError("domain size must be positive")
        if self.arity < 1:
            raise ValidationError(f"function {self.name}: arity must be >= 1")
        vals = tuple(as_weight(v) for v in self.values)
        if len(vals) != self.d**self.arity:
            raise ValidationError(
                f"function {self.name}: expected {self.d ** self.arity} values, got {len(vals)}"
            )
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_nested(cls, name: str, rows) -> "FunctionTable":
        """Build from a nested list such as ``[[2, 0], [0, 3]]``."""
        flat = []
        depth = 0
        probe = rows
        while isinstance(probe, (list, tuple)):
            depth += 1
            probe = probe[0]

        def walk(node):
            if isinstance(node, (list, tuple)):
                for child in node:
                    walk(child)
            else:
                flat.append(node)

        walk(rows)
        return cls(name, len(rows), depth, tuple(flat))

    @classmethod
    def from_callable(cls, name: str, d: int, arity: int, fn) -> "FunctionTable":
        return cls(name, d, arity, tuple(fn(*x) for x in domain_tuples(d, arity)))

    def __call__(self, *x: int) -> Fraction:
        return self.values[tuple_index(x, self.d)]

    def items(self) -> Iterator[tuple[tuple, Fraction]]:
        return zip(domain_tuples(self.d, self.arity), self.values)

    @cached_property
    def lookup(self) -> dict:
        """Map from argument tuple to value; used in hot evaluation loops."""
        return dict(self.items())


@dataclass(frozen=True)
class RelationTable:
    """An ``r``-ary relation over ``{1..d}``."""

    d: int
    arity: int
    members: frozenset

    def __post_init__(self):
        members = frozenset(tuple(t) for t in self.members)
        for t in members:
            if len(t) != self.arity or any(not 1 <= a <= self.d for a in t):
                raise ValidationError(f"tuple {t} is not in D^{self.arity} for d={self.d}")
        object.__setattr__(self, "members", members)

    def __contains__(self, t) -> bool:
        return tuple(t) in self.members

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(sorted(self.members))

    @classmethod
    def full(cls, d: int, arity: int) -> "RelationTable":
        return cls(d, arity, frozenset(domain_tuples(d, arity)))

    def indicator(self, name: str) -> FunctionTable:
        return FunctionTable.from_callable(
            name, self.d, self.arity, lambda *x: 1 if x in self.members else 0
        )


@dataclass(frozen=True)
class Language:
    """A finite weighted constraint language over ``D = {1..d}``."""

    d: int
    functions: tuple

    def __post_init__(self):
        funcs = tuple(self.functions)
        if not funcs:
            raise ValidationError("a language needs at least one function")
        names = [f.name for f in funcs]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate function names in {names}")
        for f in funcs:
            if f.d != self.d:
                raise ValidationError(f"function {f.name} is over d={f.d}, language has d={self.d}")
        object.__setattr__(self, "functions", funcs)

    @cached_property
    def by_name(self) -> dict:
        return {f.name: f for f in self.functions}

    def __getitem__(self, name: str) -> FunctionTable:
        try:
            return self.by_name[name]
        except KeyError:
            raise ValidationError(f"unknown function {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self.by_name


@dataclass(frozen=True)
class Instance:
    """``n`` variables and a sequence of applications ``(name, (i_1..i_r))``.

    Duplicate applications are kept; they multiply the function value.
    """

    language: Language
    n: int
    applications: tuple = field(default=())

    def __post_init__(self):
        if self.n < 0:
            raise ValidationError("variable count must be non-negative")
        apps = tuple((name, tuple(idx)) for name, idx in self.applications)
        for name, idx in apps:
            f = self.language[name]
            if len(idx) != f.arity:
                raise ValidationError(
                    f"application of {name} has {len(idx)} indices, arity is {f.arity}"
                )
            for i in idx:
                if not 1 <= i <= self.n:
                    raise ValidationError(f"variable index {i} out of range [1, {self.n}]")
        object.__setattr__(self, "applications", apps)

    @property
    def m(self) -> int:
        return len(self.applications)

    @property
    def size(self) -> int:
        return self.n + self.m

    @property
    def d(self) -> int:
        return self.language.d

    def extend(self, applications: Iterable) -> "Instance":
        return Instance(self.language, self.n, self.applications + tuple(applications))

    @cached_property
    def _bound(self) -> tuple:
        # (lookup dict, index tuple) pairs for fast evaluation
        return tuple((self.language[name].lookup, idx) for name, idx in self.applications)


def evaluate(instance: Instance, x: Sequence[int]) -> Fraction:
    """``F_I(x)``: the product of all applied function values at ``x``."""
    if len(x) != instance.n:
        raise ValidationError(f"assignment has length {len(x)}, instance has n={instance.n}")
    d = instance.d
    for a in x:
        if not 1 <= a <= d:
            raise ValidationError(f"assignment entry {a} outside domain [1, {d}]")
    return _evaluate_unchecked(instance, tuple(x))


def _evaluate_unchecked(instance: Instance, x: tuple) -> Fraction:
    value = Fraction(1)
    for lookup, idx in instance._bound:
        v = lookup[tuple(x[i - 1] for i in idx)]
        if not v:
            return Fraction(0)
        value *= v
    return value


def support_function(f: FunctionTable) -> RelationTable:
    return RelationTable(f.d, f.arity, frozenset(x for x, v in f.items() if v > 0))


def support_language(language: Language) -> dict:
    """The unweighted language Gamma: function name -> its support relation."""
    return {f.name: support_function(f) for f in language.functions}


def marginalize(f: FunctionTable, ell: int) -> FunctionTable:
    """``f^[ell]``: sum out the trailing ``r - ell`` coordinates."""
    if not 1 <= ell <= f.arity:
        raise ValidationError(f"marginal level {ell} outside [1, {f.arity}]")
    if ell == f.arity:
        return f
    block = f.d ** (f.arity - ell)
    vals = tuple(sum(f.values[k * block:(k + 1) * block], Fraction(0)) for k in range(f.d**ell))
    return FunctionTable(f.name, f.d, ell, vals)
