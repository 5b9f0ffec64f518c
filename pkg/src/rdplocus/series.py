"""Truncated power series in ``x, y, z`` over the rationals.

Every :class:`Series` lives in ``Q[[x, y, z]] / m^N`` where ``N`` is its
truncation order; all equalities below are equalities modulo ``m^N``.
Coefficients are ``gmpy2.mpq`` values and the representation is sparse.

Monomials are packed into a single int (8 bits per exponent) so that
multiplying two monomials is an integer addition.  The packing is an
implementation detail; the public API speaks in ``(i, j, k)`` tuples.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import islice
from typing import Iterable, Iterator, Mapping

import gmpy2
from gmpy2 import mpq, mpz

__all__ = [
    "DEFAULT_ORDER",
    "VARIABLES",
    "SeriesError",
    "ZeroConstantTerm",
    "NoRationalRoot",
    "InvalidChange",
    "Series",
    "CoordChange",
    "rational",
    "invert_unit",
    "nth_root_unit",
    "factor_xy",
    "substitute",
    "compose",
]

DEFAULT_ORDER = 32
MAX_ORDER = 255
VARIABLES = ("x", "y", "z")

_SHIFT = 8
_MASK = (1 << _SHIFT) - 1


class SeriesError(ValueError):
    """Base class for precondition failures in series arithmetic."""


class ZeroConstantTerm(SeriesError):
    pass


class NoRationalRoot(SeriesError):
    pass


class InvalidChange(SeriesError):
    pass


def rational(value) -> mpq:
    """Coerce ints, Fractions, mpq and ``"p/q"`` strings to ``mpq``."""
    if isinstance(value, str):
        return mpq(Fraction(value.strip()))
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    return mpq(value)


def _pack(i: int, j: int, k: int) -> int:
    return (i << (2 * _SHIFT)) | (j << _SHIFT) | k


def _unpack(key: int) -> tuple[int, int, int]:
    return key >> (2 * _SHIFT), (key >> _SHIFT) & _MASK, key & _MASK


def _integral(t: dict[int, mpq]) -> tuple[dict[int, mpz], mpz]:
    den = mpz(1)
    for c in t.values():
        if c.denominator != 1:
            den = gmpy2.lcm(den, c.denominator)
    if den == 1:
        return {k: c.numerator for k, c in t.items()}, den
    return {k: c.numerator * (den // c.denominator) for k, c in t.items()}, den


def _check_order(order: int) -> None:
    # exponents are packed in 8 bits, so no monomial may reach degree 256
    if not 1 <= order <= MAX_ORDER:
        raise SeriesError(f"truncation order must lie in [1, {MAX_ORDER}], got {order}")


def _deg(key: int) -> int:
    return (key >> (2 * _SHIFT)) + ((key >> _SHIFT) & _MASK) + (key & _MASK)


_X = _pack(1, 0, 0)
_Y = _pack(0, 1, 0)
_Z = _pack(0, 0, 1)
_VAR_KEYS = {"x": _X, "y": _Y, "z": _Z}


class Series:
    """An element of ``Q[[x,y,z]]`` known modulo ``m^order``.

    Instances are treated as immutable values.
    """

    __slots__ = ("_t", "order")

    def __init__(self, terms: Mapping[tuple[int, int, int], object] | None = None,
                 order: int = DEFAULT_ORDER):
        _check_order(order)
        self.order = order
        t: dict[int, mpq] = {}
        if terms:
            for (i, j, k), c in terms.items():
                if min(i, j, k) < 0:
                    raise SeriesError("negative exponent")
                if i + j + k >= order:
                    continue
                c = rational(c)
                if c:
                    key = _pack(i, j, k)
                    t[key] = t.get(key, 0) + c
                    if not t[key]:
                        del t[key]
        self._t = t

    @classmethod
    def _raw(cls, t: dict[int, mpq], order: int) -> "Series":
        s = object.__new__(cls)
        s._t = t
        s.order = order
        return s

    # ---- constructors -------------------------------------------------
    @classmethod
    def zero(cls, order: int = DEFAULT_ORDER) -> "Series":
        _check_order(order)
        return cls._raw({}, order)

    @classmethod
    def const(cls, c, order: int = DEFAULT_ORDER) -> "Series":
        _check_order(order)
        c = rational(c)
        return cls._raw({0: c} if c else {}, order)

    @classmethod
    def var(cls, name: str, order: int = DEFAULT_ORDER) -> "Series":
        _check_order(order)
        if order == 1:
            return cls._raw({}, order)
        return cls._raw({_VAR_KEYS[name]: mpq(1)}, order)

    @classmethod
    def monomial(cls, i: int, j: int, k: int, c=1, order: int = DEFAULT_ORDER) -> "Series":
        return cls({(i, j, k): c}, order)

    # ---- inspection ---------------------------------------------------
    def terms(self) -> Iterator[tuple[tuple[int, int, int], mpq]]:
        """Yield ``((i, j, k), coefficient)`` in graded order."""
        for key in sorted(self._t, key=lambda q: (_deg(q), -q)):
            yield _unpack(key), self._t[key]

    def as_dict(self) -> dict[tuple[int, int, int], mpq]:
        return {_unpack(k): c for k, c in self._t.items()}

    def coeff(self, i: int, j: int = 0, k: int = 0) -> mpq:
        return self._t.get(_pack(i, j, k), mpq(0))

    def __len__(self) -> int:
        return len(self._t)

    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self) -> bool:
        return bool(self._t)

    def ord(self) -> float | int:
        """Least total degree carrying a nonzero coefficient; ``inf`` for 0."""
        if not self._t:
            return float("inf")
        return min(_deg(k) for k in self._t)

    def constant_term(self) -> mpq:
        return self._t.get(0, mpq(0))

    def is_unit(self) -> bool:
        return bool(self.constant_term())

    def variables(self) -> set[str]:
        used = set()
        for key in self._t:
            i, j, k = _unpack(key)
            if i:
                used.add("x")
            if j:
                used.add("y")
            if k:
                used.add("z")
        return used

    def homogeneous_part(self, d: int) -> "Series":
        return Series._raw({k: c for k, c in self._t.items() if _deg(k) == d}, self.order)

    def truncate(self, order: int) -> "Series":
        """Reduce modulo ``m^order``; the order can only go down."""
        order = min(order, self.order)
        return Series._raw({k: c for k, c in self._t.items() if _deg(k) < order}, order)

    def with_order(self, order: int) -> "Series":
        """Reinterpret at another truncation order (raising it pads with zeros)."""
        if order >= self.order:
            return Series._raw(dict(self._t), order)
        return self.truncate(order)

    def select(self, pred) -> "Series":
        """Keep the terms whose exponent triple satisfies ``pred(i, j, k)``."""
        return Series._raw({k: c for k, c in self._t.items() if pred(*_unpack(k))}, self.order)

    def exponent_shift(self, i: int, j: int, k: int, sign: int = 1) -> "Series":
        """Multiply (sign=1) or exactly divide (sign=-1) by ``x^i y^j z^k``."""
        key = _pack(i, j, k)
        out = {}
        if sign > 0:
            for q, c in self._t.items():
                nq = q + key
                if _deg(nq) < self.order:
                    out[nq] = c
            return Series._raw(out, self.order)
        for q, c in self._t.items():
            a, b, e = _unpack(q)
            if a < i or b < j or e < k:
                raise SeriesError("monomial division is not exact")
            out[q - key] = c
        return Series._raw(out, self.order)

    def derivative(self, var: str) -> "Series":
        """Partial derivative; the result is only known modulo ``m^(order-1)``."""
        idx = VARIABLES.index(var)
        step = _VAR_KEYS[var]
        out = {}
        for key, c in self._t.items():
            e = _unpack(key)[idx]
            if e:
                out[key - step] = c * e
        return Series._raw(out, self.order).truncate(max(self.order - 1, 1))

    def z_coefficients(self) -> dict[tuple[int, int], "Series"]:
        """Group as ``sum x^i y^j * P_ij(z)`` and return ``{(i, j): P_ij}``."""
        groups: dict[tuple[int, int], dict[int, mpq]] = {}
        for key, c in self._t.items():
            i, j, k = _unpack(key)
            groups.setdefault((i, j), {})[k] = c
        return {ij: Series._raw(d, self.order) for ij, d in groups.items()}

    def z_series(self) -> list[mpq]:
        """Coefficient list of a series in ``z`` alone (length ``order``)."""
        out = [mpq(0)] * self.order
        for key, c in self._t.items():
            i, j, k = _unpack(key)
            if i or j:
                raise SeriesError("series involves x or y")
            out[k] = c
        return out

    # ---- arithmetic ---------------------------------------------------
    def _coerce(self, other) -> "Series":
        if isinstance(other, Series):
            if other.order != self.order:
                raise SeriesError(
                    f"truncation orders differ ({self.order} vs {other.order})")
            return other
        return Series.const(other, self.order)

    def __add__(self, other) -> "Series":
        other = self._coerce(other)
        t = dict(self._t)
        for k, c in other._t.items():
            v = t.get(k)
            if v is None:
                t[k] = c
            else:
                v = v + c
                if v:
                    t[k] = v
                else:
                    del t[k]
        return Series._raw(t, self.order)

    __radd__ = __add__

    def __neg__(self) -> "Series":
        return Series._raw({k: -c for k, c in self._t.items()}, self.order)

    def __sub__(self, other) -> "Series":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Series":
        return self._coerce(other) - self

    def scale(self, c) -> "Series":
        c = rational(c)
        if not c:
            return Series.zero(self.order)
        return Series._raw({k: v * c for k, v in self._t.items()}, self.order)

    def __mul__(self, other) -> "Series":
        if not isinstance(other, Series):
            return self.scale(other)
        other = self._coerce(other)
        n = self.order
        a, b = self._t, other._t
        if len(a) > len(b):
            a, b = b, a
        if not a or not b:
            return Series.zero(n)
        # integer numerators over a common denominator: mpz arithmetic skips
        # the gcd normalisation that every mpq operation pays
        a, da = _integral(a)
        b, db = _integral(b)
        bl = sorted(b.items(), key=lambda kc: _deg(kc[0]))
        # cut[r] = number of terms of b with degree < r
        cut = [0] * (n + 1)
        for kb, _ in bl:
            d = _deg(kb)
            if d < n:
                cut[d + 1] += 1
        for r in range(1, n + 1):
            cut[r] += cut[r - 1]
        out: dict[int, mpz] = {}
        get = out.get
        for ka, ca in a.items():
            room = n - _deg(ka)
            if room <= 0:
                continue
            for kb, cb in islice(bl, cut[room]):
                key = ka + kb
                out[key] = get(key, 0) + ca * cb
        den = da * db
        return Series._raw({k: mpq(c, den) for k, c in out.items() if c}, n)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "Series":
        if e < 0:
            return invert_unit(self) ** (-e)
        result = Series.const(1, self.order)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __truediv__(self, other) -> "Series":
        if isinstance(other, Series):
            return self * invert_unit(other)
        c = rational(other)
        if not c:
            raise ZeroDivisionError("division by zero")
        return self.scale(1 / c)

    def __eq__(self, other) -> bool:
        if isinstance(other, Series):
            return self.order == other.order and self._t == other._t
        if isinstance(other, (int, Fraction)) or type(other) is type(mpq(0)):
            return self._t == ({0: rational(other)} if other else {})
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.order, frozenset(self._t.items())))

    def __repr__(self) -> str:
        from .expr import format_series
        return f"Series({format_series(self)!r}, order={self.order})"

    def __str__(self) -> str:
        from .expr import format_series
        return format_series(self)


def invert_unit(u: Series) -> Series:
    """Multiplicative inverse of a unit, as a Neumann series."""
    c0 = u.constant_term()
    if not c0:
        raise ZeroConstantTerm("constant term is zero; the series is not a unit")
    # Newton iteration v <- v (2 - u v), doubling the known precision each round
    v = Series.const(1 / c0, u.order)
    prec = 1
    while prec < u.order:
        prec = min(2 * prec, u.order)
        ut, vt = u.truncate(prec), v.with_order(prec)
        v = vt * (2 - ut * vt)
    return v.with_order(u.order)


def _rational_root(c: mpq, n: int) -> mpq | None:
    if c < 0 and n % 2 == 0:
        return None
    sign = -1 if c < 0 else 1
    num, den = abs(c.numerator), c.denominator
    rn, ex_n = gmpy2.iroot(num, n)
    rd, ex_d = gmpy2.iroot(den, n)
    if not (ex_n and ex_d):
        return None
    return mpq(sign * int(rn), int(rd))


def nth_root_unit(u: Series, n: int, root0=None) -> Series:
    """A series ``a`` with ``a**n == u`` and prescribed constant term.

    Newton's iteration ``a <- a - (a^n - u) / (n a^(n-1))`` doubles the
    number of correct degrees per step.
    """
    if n < 1:
        raise SeriesError("root index must be positive")
    c0 = u.constant_term()
    if not c0:
        raise ZeroConstantTerm("constant term is zero; the series is not a unit")
    if root0 is None:
        root0 = _rational_root(c0, n)
        if root0 is None:
            raise NoRationalRoot(f"{c0} has no rational {n}-th root")
    else:
        root0 = rational(root0)
        if root0 ** n != c0:
            raise SeriesError(f"{root0} is not an {n}-th root of {c0}")
    a = Series.const(root0, u.order)
    correct = 1
    while correct < u.order:
        correct *= 2
        a = a - (a ** n - u) * invert_unit((a ** (n - 1)).scale(n))
    return a


def factor_xy(f: Series) -> tuple[Series, Series]:
    """Split ``x*y + f`` as ``X*Y`` for ``f`` in ``(x, y)^3`` without ``z``.

    Terms divisible by ``x`` feed the correction of ``Y``; the remaining
    terms are divisible by ``y`` and feed ``X``.  The result satisfies
    ``X = x`` and ``Y = y`` modulo ``m^2``.
    """
    if "z" in f.variables():
        raise SeriesError("factor_xy expects a series in x and y only")
    if f.ord() < 3:
        raise SeriesError("factor_xy expects f in m^3")
    n = f.order
    x, y = Series.var("x", n), Series.var("y", n)
    target = x * y + f
    big_x, big_y = x, y
    for _ in range(n + 1):
        rest = target - big_x * big_y
        if rest.is_zero():
            return big_x, big_y
        a = rest.select(lambda i, j, k: i > 0).exponent_shift(1, 0, 0, -1)
        b = rest.select(lambda i, j, k: i == 0).exponent_shift(0, 1, 0, -1)
        big_x = big_x + b
        big_y = big_y + a
    raise AssertionError("factor_xy did not converge")  # pragma: no cover


class CoordChange:
    """Substitution ``x -> sx, y -> sy, z -> sz`` with invertible linear part.

    ``substitute(F, a.then(b)) == substitute(substitute(F, a), b)``.
    """

    __slots__ = ("images", "log", "order")

    def __init__(self, sx: Series, sy: Series, sz: Series, log: Iterable[str] = ()):
        order = sx.order
        if not (sx.order == sy.order == sz.order):
            raise SeriesError("images must share a truncation order")
        for s in (sx, sy, sz):
            if s.constant_term():
                raise InvalidChange("images must lie in the maximal ideal")
        self.images = (sx, sy, sz)
        self.order = order
        self.log = tuple(log)
        if order > 1 and self.linear_determinant() == 0:
            raise InvalidChange("linear part is singular")

    @classmethod
    def identity(cls, order: int = DEFAULT_ORDER) -> "CoordChange":
        return cls(*(Series.var(v, order) for v in VARIABLES))

    @classmethod
    def elementary(cls, var: str, image: Series, note: str | None = None) -> "CoordChange":
        """Change a single variable, fixing the other two."""
        order = image.order
        imgs = [Series.var(v, order) for v in VARIABLES]
        imgs[VARIABLES.index(var)] = image
        return cls(*imgs, log=[note or f"{var} -> {image}"])

    @classmethod
    def linear(cls, matrix, order: int = DEFAULT_ORDER, note: str | None = None) -> "CoordChange":
        """Row ``r`` of ``matrix`` gives the image of variable ``r``."""
        imgs = []
        for row in matrix:
            imgs.append(Series({(1, 0, 0): row[0], (0, 1, 0): row[1], (0, 0, 1): row[2]}, order))
        return cls(*imgs, log=[note or f"linear {[[str(rational(c)) for c in r] for r in matrix]}"])

    def linear_matrix(self) -> list[list[mpq]]:
        return [[s.coeff(1, 0, 0), s.coeff(0, 1, 0), s.coeff(0, 0, 1)] for s in self.images]

    def linear_determinant(self) -> mpq:
        (a, b, c), (d, e, f), (g, h, i) = self.linear_matrix()
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)

    def is_identity(self) -> bool:
        return all(s == Series.var(v, self.order) for s, v in zip(self.images, VARIABLES))

    def then(self, other: "CoordChange") -> "CoordChange":
        """Apply ``self`` first, then ``other``."""
        if other.order != self.order:
            raise SeriesError("truncation orders differ")
        imgs = [substitute(s, other) for s in self.images]
        return CoordChange(*imgs, log=self.log + other.log)

    def with_order(self, order: int) -> "CoordChange":
        return CoordChange(*(s.with_order(order) for s in self.images), log=self.log)

    def __eq__(self, other) -> bool:
        return isinstance(other, CoordChange) and self.images == other.images

    def __repr__(self) -> str:
        return "CoordChange(" + ", ".join(f"{v} -> {s}" for v, s in zip(VARIABLES, self.images)) + ")"


def _horner(coeffs: dict[int, Series], image: Series, shift) -> Series:
    """``sum_e coeffs[e] * image^e``; ``shift`` is used when ``image`` is a bare variable."""
    if shift is not None:
        out = None
        for e, c in coeffs.items():
            term = c.exponent_shift(*[e if v == shift else 0 for v in VARIABLES])
            out = term if out is None else out + term
        return out
    top = max(coeffs)
    out = coeffs.get(top)
    for e in range(top - 1, -1, -1):
        out = out * image
        c = coeffs.get(e)
        if c is not None:
            out = out + c
    return out


def _collect(f: Series, var: str) -> dict[int, Series]:
    idx = VARIABLES.index(var)
    groups: dict[int, dict[int, mpq]] = {}
    step = _VAR_KEYS[var]
    for key, c in f._t.items():
        e = _unpack(key)[idx]
        groups.setdefault(e, {})[key - e * step] = c
    return {e: Series._raw(d, f.order) for e, d in groups.items()}


def substitute(f: Series, phi: CoordChange) -> Series:
    """``f`` composed with ``phi``, modulo ``m^N``.

    Nested Horner evaluation in ``z``, then ``y``, then ``x``; components of
    ``phi`` that are the identity cost nothing.
    """
    if f.order != phi.order:
        raise SeriesError("truncation orders differ")
    if phi.order > 1 and phi.linear_determinant() == 0:
        raise InvalidChange("linear part is singular")
    return compose(f, phi.images)


def _taylor_shift(f: Series, var: str, d: Series) -> Series:
    """``f`` with ``var -> var + d``, as ``sum_j (d/dvar)^j f * d^j / j!``.

    Only about ``N / ord(d)`` products are needed, and they shrink as the
    powers of ``d`` rise in order.
    """
    out = f
    term = f
    power = None
    j = 0
    while True:
        j += 1
        term = term.derivative(var).scale(mpq(1, j))
        if term.is_zero():
            return out
        power = d if power is None else power * d
        if power.is_zero():
            return out
        # term is known modulo m^(N-j) and power lies in m^j
        out = out + term.with_order(f.order) * power


def _permutation(images) -> list[int] | None:
    """``perm[i] = j`` when image ``i`` is the bare variable ``j``; None otherwise."""
    perm = []
    for s in images:
        if len(s._t) != 1:
            return None
        (key, c), = s._t.items()
        e = _unpack(key)
        if c != 1 or sum(e) != 1:
            return None
        perm.append(e.index(1))
    return perm if len(set(perm)) == 3 else None


def compose(f: Series, images) -> Series:
    """``f(sx, sy, sz)`` for images in ``m`` (no invertibility required)."""
    if f.is_zero():
        return f
    n = f.order
    sx, sy, sz = images
    if any(s.order != n for s in images):
        raise SeriesError("truncation orders differ")
    if any(s.constant_term() for s in images):
        raise SeriesError("images must lie in the maximal ideal")
    ident = [s == Series.var(v, n) for s, v in zip(images, VARIABLES)]
    if all(ident):
        return f
    perm = _permutation(images)
    if perm is not None:
        out = {}
        for key, c in f._t.items():
            e = _unpack(key)
            new = [0, 0, 0]
            for src, dst in enumerate(perm):
                new[dst] = e[src]
            out[_pack(*new)] = c
        return Series._raw(out, n)
    if sum(ident) == 2:
        var = VARIABLES[ident.index(False)]
        return _taylor_shift(f, var, images[ident.index(False)] - Series.var(var, n))
    out_x = {}
    for i, fx in _collect(f, "x").items():
        out_y = {}
        for j, fy in _collect(fx, "y").items():
            out_y[j] = fy if ident[2] else _horner(_collect(fy, "z"), sz, None)
        out_x[i] = _horner(out_y, sy, "y" if ident[1] else None)
    return _horner(out_x, sx, "x" if ident[0] else None)
