"""Ideals of ``Q[[x,y,z]]`` compared through truncated linear algebra.

The intersection rule ``(a,b) meet (c,d) = (ac, bc, d)`` holds when ``a, c, d`` is
a regular sequence and ``d`` lies in ``(a, b)``.  In a three-dimensional
regular local ring three elements form a regular sequence exactly when they
generate an ``m``-primary ideal, which is what :func:`is_regular_sequence`
tests: the truncated quotient dimension has to stop growing (Nakayama).
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from .linalg import Span, ideal_span, intersect_spans, monomials_upto, quotient_dimensions, vector
from .series import DEFAULT_ORDER, Series, SeriesError


class HypothesisViolated(SeriesError):
    def __init__(self, hypothesis: str, detail: str = ""):
        super().__init__(f"hypothesis violated: {hypothesis}" + (f" ({detail})" if detail else ""))
        self.hypothesis = hypothesis


@dataclass
class LocalIdeal:
    gens: list[Series]
    label: str = ""

    def __post_init__(self):
        if not self.gens:
            raise SeriesError("an ideal needs at least one generator")
        if any(g.is_zero() for g in self.gens):
            raise SeriesError("zero generator")
        orders = {g.order for g in self.gens}
        if len(orders) != 1:
            raise SeriesError("generators must share a truncation order")

    @property
    def order(self) -> int:
        return self.gens[0].order

    def span(self, bound: int) -> Span:
        return ideal_span(self.gens, bound)

    def __str__(self) -> str:
        return "(" + ", ".join(str(g) for g in self.gens) + ")"


def membership(f: Series, ideal: LocalIdeal, bound: int) -> bool:
    """Whether ``f`` lies in ``I + m^(bound+1)``."""
    return ideal.span(bound).contains(vector(f, bound))


def default_bound(gens: Sequence[Series]) -> int:
    return 2 * max(int(g.ord()) for g in gens) + 4


def is_regular_sequence(gens: Sequence[Series], bound: int) -> bool:
    """Three elements of ``m`` form a regular sequence iff they generate an ``m``-primary ideal.

    Returns True once ``m^d`` is contained in ``(gens) + m^(d+1)`` for some
    ``d <= bound``; False when no such ``d`` is found within the bound.
    """
    if len(gens) != 3 or any(g.is_zero() or g.constant_term() for g in gens):
        return False
    dims = quotient_dimensions([g.truncate(bound + 1) for g in gens], bound)
    return any(dims[d] == dims[d - 1] for d in range(1, bound + 1))


def intersect_cm(a: Series, b: Series, c: Series, d: Series, bound: int | None = None) -> LocalIdeal:
    """``(a, b) meet (c, d) = (ac, bc, d)`` after checking both hypotheses."""
    if bound is None:
        bound = default_bound([a, b, c, d])
    if not membership(d, LocalIdeal([a, b]), bound):
        raise HypothesisViolated("d in (a, b)", f"checked to degree {bound}")
    if not is_regular_sequence([a, c, d], bound):
        raise HypothesisViolated("a, c, d regular sequence",
                                 f"(a, c, d) is not m-primary up to degree {bound}")
    return LocalIdeal([a * c, b * c, d])


def intersect_bruteforce(i: LocalIdeal, j: LocalIdeal, bound: int, slack: int | None = None) -> Span:
    """Degree ``<= bound`` part of ``I meet J`` by linear algebra.

    The spans are intersected modulo ``m^(bound+slack+1)`` and then cut down to
    degree ``bound``; the slack absorbs the Artin-Rees gap between
    ``(I + m^e) meet (J + m^e)`` and ``I meet J + m^e``.
    """
    if slack is None:
        slack = bound
    e = bound + slack
    meet = intersect_spans(i.span(e), j.span(e))
    out = Span()
    for row in meet.rows.values():
        cut = {c: v for c, v in row.items() if (c >> 24) <= bound}
        out.add(cut)
    return out


def spans_equal(ideal: LocalIdeal, span: Span, bound: int) -> bool:
    return ideal.span(bound).equals(span)


def missing_from(ideal: LocalIdeal, span: Span, bound: int) -> list[dict]:
    """Basis vectors of ``span`` outside the truncated span of ``ideal``."""
    mine = ideal.span(bound)
    return [r for r in span.basis() if not mine.contains(r)]


# ----------------------------------------------------------------------
# base-locus ideals
# ----------------------------------------------------------------------

FAMILIES = ("NoTangency", "MixedTangency", "Spine", "ThickSpineA", "ThickSpineB")


@dataclass(frozen=True)
class ScenarioIdealParams:
    """Local shape of the base locus at a point of embedding dimension three.

    ``q = None`` in MixedTangency stands for infinite tangency (curve inside the
    surface).  ``w = None`` in ThickSpineB stands for ``f = 0``.
    """

    family: str
    m: int
    n: int | None = None
    q: int | None = None
    w: int | None = None
    u: int = 1  # constant value of the unit u in the ThickSpine ideals

    def __post_init__(self):
        fam, m, n, q, w = self.family, self.m, self.n, self.q, self.w
        if fam not in FAMILIES:
            raise ValueError(f"unknown family {fam!r}")
        if m is None or m < 1:
            raise ValueError("m must be a positive integer")
        if fam == "NoTangency":
            if n is None or not m <= n:
                raise ValueError("NoTangency needs 1 <= m <= n")
        elif fam == "MixedTangency":
            if n is None or n < 1:
                raise ValueError("MixedTangency needs n >= 1")
            if q is not None and q <= 1:
                raise ValueError("MixedTangency needs q > 1")
        elif fam == "Spine":
            # m = 2 would put y - x z^q in the ideal: embedding dimension two
            if m < 3 or q is None or q < 1:
                raise ValueError("Spine needs m >= 3 and q > 0")
        elif fam == "ThickSpineA":
            # for m = 3 the (m-1)-structure (x^2, xy, x z^q - y) is already planar
            if m < 4 or q is None or q < 1 or w is None or w < 0:
                raise ValueError("ThickSpineA needs m >= 4, q > 0, w >= 0")
        elif fam == "ThickSpineB":
            if m < 4 or q is None or q < 1 or (w is not None and w <= 0):
                raise ValueError("ThickSpineB needs m >= 4, q > 0 and w > 0 (or f = 0)")
        if not self.u:
            raise ValueError("u must be a unit")

    @property
    def mixed_case(self) -> str | None:
        if self.family != "MixedTangency":
            return None
        m, n, q = self.m, self.n, self.q
        if q is None or m <= q:
            return "a"
        if m < q * n:
            return "b"
        return "c"

    def to_json(self) -> dict:
        return {"family": self.family, "m": self.m, "n": self.n, "q": self.q, "w": self.w,
                "f_zero": self.family == "ThickSpineB" and self.w is None}

    @classmethod
    def from_json(cls, d: dict) -> "ScenarioIdealParams":
        w = d.get("w")
        if d.get("f_zero"):
            w = None
        return cls(d["family"], int(d["m"]), d.get("n"), d.get("q"), w, int(d.get("u", 1)))


@dataclass
class BaseLocus:
    ideal: LocalIdeal
    components: list[LocalIdeal] = field(default_factory=list)  # constituent ideals when intersected
    curves: dict[str, list[Series]] = field(default_factory=dict)  # reduced curves through p
    lemma_ideal: LocalIdeal | None = None  # output of intersect_cm, when the family uses it
    lemma_inputs: tuple | None = None  # (a, b, c, d)


def base_locus_ideal(p: ScenarioIdealParams, order: int = DEFAULT_ORDER, check: bool = True) -> BaseLocus:
    """Local ideal of the base locus, with its constituents and reduced curves."""
    x, y, z = (Series.var(v, order) for v in "xyz")
    m, n, q, w = p.m, p.n, p.q, p.w
    if p.family == "NoTangency":
        a, b, c, d = x, z ** m, y, z ** n
        ideal = _cm(a, b, c, d, check)
        return BaseLocus(ideal, [LocalIdeal([a, b]), LocalIdeal([c, d])],
                         {"C1": [x, z], "C2": [y, z]}, ideal, (a, b, c, d))
    if p.family == "MixedTangency":
        case = p.mixed_case
        c = y
        if case == "a":
            # (z^m, x) meet (y, x^n): with a = z^m the triple a, c, d = z^m, y, x^n is regular
            a, b, d = z ** m, x, x ** n
        elif case == "b":
            a, b, d = x - z ** q, z ** m, x ** n
        else:
            a, b, d = x - z ** q, z ** m, x ** n * z ** (m - q * n)
        lemma = _cm(a, b, c, d, check)
        gens = list(lemma.gens)
        if case == "c" and m > q * n:
            # (c, d) = (y, x^n z^(m-qn)) is smaller than (y, x^n); x^n (x - z^q) lies in
            # both constituents but not in the lemma's output
            gens.append(x ** n * (x - z ** q))
        first = LocalIdeal([x - z ** q, z ** m]) if q is not None else LocalIdeal([x, z ** m])
        return BaseLocus(LocalIdeal(gens), [first, LocalIdeal([y, x ** n])],
                         {"C1": [x, z], "C2": [x, y]}, lemma, (a, b, c, d))
    u = Series.const(p.u, order)
    if p.family == "Spine":
        gens = [x * x, x * y, x * z ** q - y ** (m - 1)]
    elif p.family == "ThickSpineA":
        gens = [x * x, x * y * y, x * y * z ** q - y ** (m - 1),
                x * y - u * z ** w * (z ** q * x - y ** (m - 2))]
    else:
        f = Series.zero(order) if w is None else u * z ** w
        gens = [x * x, x * y * y, f * x * y - (z ** q * x - y ** (m - 2))]
        gens = [g for g in gens if not g.is_zero()]
    return BaseLocus(LocalIdeal(gens), [], {"C": [x, y]})


def _cm(a, b, c, d, check: bool) -> LocalIdeal:
    if check:
        return intersect_cm(a, b, c, d)
    return LocalIdeal([a * c, b * c, d])


def random_unit(rng: random.Random, order: int, tail_degree: int = 2) -> Series:
    """Nonzero constant in ``[-9, 9]`` plus a random tail of degree ``<= tail_degree``."""
    terms = {(0, 0, 0): rng.choice([c for c in range(-9, 10) if c])}
    for mono in monomials_upto(tail_degree)[1:]:
        if rng.random() < 0.5:
            terms[mono] = rng.randint(-9, 9)
    return Series(terms, order)


def generic_surface_equation(ideal: LocalIdeal, seed: int | None = 0,
                             units: Sequence[Series] | None = None) -> Series:
    """``sum u_i g_i`` with seeded random units (or the given ones)."""
    order = ideal.order
    if units is None:
        rng = random.Random(seed)
        units = [random_unit(rng, order) for _ in ideal.gens]
    if len(units) != len(ideal.gens):
        raise SeriesError("one unit per generator")
    total = Series.zero(order)
    for u, g in zip(units, ideal.gens):
        if not u.is_unit():
            raise SeriesError("coefficients must be units")
        total = total + u * g
    return total
