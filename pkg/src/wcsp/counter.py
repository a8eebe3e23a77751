"""Structured counting for balanced languages.

Given the instance vector representation ``s`` and the witness functions
``t_2..t_n``, every conditional sum of ``F`` has the closed form::

    sum_{x_{i+1..n}} F(u_1..u_i, x_{i+1..n})
        = s_1(u_1)...s_i(u_i) * prod_{j>i} s_j(u_j) / t_j(u_j)

for any ``u`` in the support ``R``, and ``Z(I)`` follows by summing the
``i = 1`` case over ``pr_1 R``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from wcsp.errors import NotApplicable
from wcsp.model import Instance
from wcsp.oracle import projection, relation_of, witnesses
from wcsp.vecrep import VectorRepresentation, instance_vecrep


@dataclass(frozen=True)
class TFunctions:
    """``values[j][a - 1]`` is ``t_j(a)`` for ``j`` in ``2..n``."""

    values: dict

    def t(self, j: int, a: int) -> Fraction:
        return self.values[j][a - 1]

    def __len__(self) -> int:
        return len(self.values)


def _tail_factor(s: VectorRepresentation, t: dict, start: int, tail: tuple) -> Fraction:
    # prod_{j >= start} s_j(w_j) / t_j(w_j) along a member tuple's tail
    value = Fraction(1)
    for offset, a in enumerate(tail):
        j = start + offset
        value *= s.s(j, a) / t[j][a - 1]
    return value


def t_functions(instance: Instance, s: VectorRepresentation | None = None, R=None) -> TFunctions:
    """Build ``t_n, t_{n-1}, ..., t_2`` from the witness tuples of ``~_i``.

    Each ``t_i`` restricted to a class of ``~_i`` is the normalised
    marginal weight of the class's common prefix, where the marginal is
    read off the closed form along the witness tuples (no summation).
    """
    s = instance_vecrep(instance) if s is None else s
    R = relation_of(instance) if R is None else R
    d, n = instance.d, instance.n
    t: dict = {}
    for i in range(n, 1, -1):
        bundle = witnesses(R, i)
        ti = [Fraction(0)] * d
        for cw in bundle.classes:
            head = Fraction(1)
            for j, a in enumerate(cw.prefix, start=1):
                head *= s.s(j, a)
            weight = {
                a: head * s.s(i, a) * _tail_factor(s, t, i + 1, cw.suffixes[a]) for a in cw.elements
            }
            total = sum(weight.values(), Fraction(0))
            for a, w in weight.items():
                ti[a - 1] = w / total
        t[i] = tuple(ti)
    return TFunctions(dict(sorted(t.items())))


def closed_form(s: VectorRepresentation, t: TFunctions, u: tuple, i: int) -> Fraction:
    """Right-hand side of the conditional-sum identity for ``u in R`` at level ``i``."""
    value = Fraction(1)
    for j in range(1, i + 1):
        value *= s.s(j, u[j - 1])
    return value * _tail_factor(s, t.values, i + 1, tuple(u[i:]))


def structured_count(instance: Instance, *, certified: bool | None = None, bound: int | None = None) -> Fraction:
    """``Z(I)`` via the vector representation and witness functions.

    Unless ``certified`` is given, the language is classified first (cached
    per language) and a non-tractable verdict raises :class:`NotApplicable`.
    Pass ``certified=True`` to skip classification when the caller has
    certified the language by other means.
    """
    if certified is None:
        from wcsp.dichotomy import classify

        verdict = classify(instance.language)
        certified = verdict.tractable
        if not certified:
            raise NotApplicable(f"language is not certified balanced: {verdict.reason}")
    elif not certified:
        raise NotApplicable("language is not certified balanced")
    s = instance_vecrep(instance)
    R = relation_of(instance, bound)
    if instance.n == 0:
        return Fraction(1)
    t = t_functions(instance, s, R)
    total = Fraction(0)
    for a, u in projection(R, 1).items():
        total += closed_form(s, t, u, 1)
    return total
