"""Sparse exact linear algebra over Q on truncated monomial spaces.

Vectors are dicts ``column -> mpq``.  A column encodes a monomial as
``degree << 24 | packed_exponents`` so that integer order on columns is a
degree-compatible (local) order: pivots are always the lowest-degree entry.
"""
from __future__ import annotations

import heapq
from itertools import product
from typing import Iterable, Sequence

from gmpy2 import mpq

from .series import Series, _deg, _pack, _unpack

_DEG_SHIFT = 24
_COL_MASK = (1 << _DEG_SHIFT) - 1


def column(i: int, j: int, k: int) -> int:
    return ((i + j + k) << _DEG_SHIFT) | _pack(i, j, k)


def column_degree(col: int) -> int:
    return col >> _DEG_SHIFT


def column_monomial(col: int) -> tuple[int, int, int]:
    return _unpack(col & _COL_MASK)


def monomials_upto(d: int) -> list[tuple[int, int, int]]:
    """All exponent triples of total degree <= d, in graded order."""
    out = []
    for deg in range(d + 1):
        for i in range(deg, -1, -1):
            for j in range(deg - i, -1, -1):
                out.append((i, j, deg - i - j))
    return out


def vector(s: Series, bound: int) -> dict[int, mpq]:
    """Coefficients of ``s`` in degrees ``<= bound``."""
    out = {}
    for (i, j, k), c in s.as_dict().items():
        if i + j + k <= bound:
            out[column(i, j, k)] = c
    return out


def to_series(vec: dict[int, mpq], order: int) -> Series:
    return Series({column_monomial(c): v for c, v in vec.items()}, order)


class Span:
    """Incrementally maintained row-echelon basis of a subspace."""

    def __init__(self):
        self.rows: dict[int, dict[int, mpq]] = {}

    def __len__(self) -> int:
        return len(self.rows)

    def reduce(self, vec: dict[int, mpq]) -> dict[int, mpq]:
        vec = {c: v for c, v in vec.items() if v}
        heap = list(vec)
        heapq.heapify(heap)
        rows = self.rows
        while heap:
            c = heapq.heappop(heap)
            v = vec.get(c)
            if not v:
                continue
            row = rows.get(c)
            if row is None:
                continue
            for col, rv in row.items():
                old = vec.get(col)
                if old is None:
                    vec[col] = -v * rv
                    heapq.heappush(heap, col)
                else:
                    new = old - v * rv
                    if new:
                        vec[col] = new
                    else:
                        del vec[col]
        return vec

    def add(self, vec: dict[int, mpq]) -> bool:
        """Insert ``vec``; return whether the rank grew."""
        r = self.reduce(vec)
        if not r:
            return False
        lead = min(r)
        inv = 1 / r[lead]
        self.rows[lead] = {c: v * inv for c, v in r.items()}
        return True

    def extend(self, vecs: Iterable[dict[int, mpq]]) -> "Span":
        for v in vecs:
            self.add(v)
        return self

    def contains(self, vec: dict[int, mpq]) -> bool:
        return not self.reduce(vec)

    def basis(self) -> list[dict[int, mpq]]:
        return [dict(r) for _, r in sorted(self.rows.items())]

    def pivot_degrees(self) -> list[int]:
        return sorted(column_degree(c) for c in self.rows)

    def equals(self, other: "Span") -> bool:
        return len(self) == len(other) and all(other.contains(r) for r in self.rows.values())

    def within(self, other: "Span") -> bool:
        return all(other.contains(r) for r in self.rows.values())


def ideal_span(gens: Sequence[Series], bound: int) -> Span:
    """Span of ``monomial * g`` in ``Q[[x,y,z]] / m^(bound+1)``."""
    span = Span()
    for g in gens:
        og = g.ord()
        if og == float("inf") or og > bound:
            continue
        if g.order <= bound:
            raise ValueError(f"generator known only below degree {g.order}; need {bound + 1}")
        gt = g.truncate(bound + 1)
        for (i, j, k) in monomials_upto(bound - int(og)):
            span.add(vector(gt.exponent_shift(i, j, k), bound))
    return span


def quotient_dimensions(gens: Sequence[Series], bound: int) -> list[int]:
    """``dim Q[[x,y,z]] / (I + m^(d+1))`` for ``d = 0 .. bound``."""
    span = ideal_span(gens, bound)
    pivots = span.pivot_degrees()
    dims = []
    total = 0
    for d in range(bound + 1):
        total += (d + 1) * (d + 2) // 2
        dims.append(total - sum(1 for p in pivots if p <= d))
    return dims


def intersect_spans(a: Span, b: Span) -> Span:
    """Zassenhaus intersection of two subspaces."""
    shift = 1 << 60
    big = Span()
    for r in a.rows.values():
        row = dict(r)
        row.update({c + shift: v for c, v in r.items()})
        big.add(row)
    for r in b.rows.values():
        big.add(dict(r))
    out = Span()
    for lead, row in big.rows.items():
        if lead >= shift:
            out.add({c - shift: v for c, v in row.items()})
    return out


def rank(vectors: Iterable[dict[int, mpq]]) -> int:
    return len(Span().extend(vectors))


def solve_rational_3x3(m: Sequence[Sequence[mpq]]) -> list[list[mpq]] | None:
    """Inverse of a 3x3 rational matrix, or None if singular."""
    a = [[mpq(x) for x in row] + [mpq(int(i == j)) for j in range(3)] for i, row in enumerate(m)]
    for col in range(3):
        piv = next((r for r in range(col, 3) if a[r][col]), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(3):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    return [row[3:] for row in a]


def small_vectors(bound: int, dim: int = 3):
    """Nonzero integer vectors with entries in ``[-bound, bound]``, small first."""
    seen = set()
    for b in range(1, bound + 1):
        for v in product(range(-b, b + 1), repeat=dim):
            if any(v) and v not in seen and max(map(abs, v)) == b:
                seen.add(v)
                yield v
