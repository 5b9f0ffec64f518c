"""Class groups of A_n germs and the classes of smooth curves on them.

For ``X*Y = w z^(n+1)`` the class group is ``Z/(n+1)``, generated by the
curve ``(X, z)``.  A smooth curve through the singular point is one of

* tangent to the ``Y``-axis, e.g. ``(X, z)``: class ``1``;
* tangent to the ``X``-axis, e.g. ``(Y, z)``: class ``-1 = n``;
* transverse to the plane ``z = 0``: then ``X = phi(z)``, ``Y = psi(z)``
  with ``ord phi + ord psi = n + 1``, and the class is ``ord psi``.

The first two shapes cover the parametrisations ``X = a(Y), z = b(Y)``
(resp. with ``X`` and ``Y`` exchanged) and not only the coordinate axes:
on the ``(n+1)``-fold cover ``X = u^(n+1), Y = v^(n+1), z = u v`` such a curve
is cut out by ``u - v^k * (unit)`` with ``k = -1 mod (n+1)``, whose weight
is that of ``u``.
"""
from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq

from .lattice import snf
from .recognizer import NeedsExtension, SingularityReport
from .series import VARIABLES, Series, SeriesError, compose, substitute


class PatternMismatch(SeriesError):
    """The curve is not a smooth curve through the origin in a usable shape."""


class NotOnSurface(SeriesError):
    pass


@dataclass(frozen=True)
class CyclicClass:
    modulus: int
    residue: int

    def __post_init__(self):
        object.__setattr__(self, "residue", self.residue % self.modulus)

    @property
    def signed(self) -> int:
        """Representative in ``(-modulus/2, modulus/2]``."""
        r = self.residue
        return r - self.modulus if 2 * r > self.modulus else r

    def __str__(self) -> str:
        if self.signed != self.residue:
            return f"{self.residue} (= {self.signed}) in Z/{self.modulus}"
        return f"{self.residue} in Z/{self.modulus}"

    def to_json(self) -> dict:
        return {"modulus": self.modulus, "residue": self.residue, "signed": self.signed}


@dataclass(frozen=True)
class ChainPresentation:
    """Relations ``-2u_1 + u_2, u_1 - 2u_2 + u_3, ..., u_(n-1) - 2u_n`` of an ``A_n`` chain."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("chain length must be positive")

    @property
    def relations(self) -> list[list[int]]:
        n = self.n
        return [[-2 if i == j else int(abs(i - j) == 1) for j in range(n)] for i in range(n)]


def chain_class_group(n: int) -> tuple[list[int], list[int]]:
    """Invariant factors of the chain cokernel and the images ``u_j -> j * u_1``.

    The second list gives, for ``j = 1..n``, the multiple of ``u_1`` equal to
    ``u_j``; it is checked against the relations.
    """
    pres = ChainPresentation(n)
    inv = [d for d in snf(pres.relations) if d != 1]
    order = n + 1
    images = list(range(1, n + 1))
    for row in pres.relations:
        assert sum(a * b for a, b in zip(row, images)) % order == 0
    return inv, images


# ----------------------------------------------------------------------
# smooth curves
# ----------------------------------------------------------------------

def _linear_part(g: Series) -> list[mpq]:
    return [g.coeff(1, 0, 0), g.coeff(0, 1, 0), g.coeff(0, 0, 1)]


@dataclass
class CurveParametrization:
    parameter: str  # the coordinate used as parameter
    images: tuple[Series, Series, Series]  # x, y, z as series in the parameter


def parametrize_curve(gens: list[Series]) -> CurveParametrization:
    """Solve a smooth curve ``(g_1, g_2)`` for two coordinates in terms of the third.

    The parameter is ``z`` when possible, else ``y``, else ``x``.
    """
    if len(gens) != 2:
        raise PatternMismatch("a curve ideal has exactly two generators")
    n = gens[0].order
    if gens[1].order != n:
        raise PatternMismatch("generators have different truncation orders")
    for g in gens:
        if g.constant_term():
            raise NotOnSurface("curve does not pass through the origin")
    lin = [_linear_part(g) for g in gens]
    choice = None
    for t in ("z", "y", "x"):
        a, b = [v for v in VARIABLES if v != t]
        ia, ib = VARIABLES.index(a), VARIABLES.index(b)
        det = lin[0][ia] * lin[1][ib] - lin[0][ib] * lin[1][ia]
        if det:
            choice = (t, a, b, ia, ib, det)
            break
    if choice is None:
        raise PatternMismatch("curve is singular at the origin (linear parts are dependent)")
    t, a, b, ia, ib, det = choice
    # inverse of [[l0a, l0b], [l1a, l1b]]
    inv = [[lin[1][ib] / det, -lin[0][ib] / det], [-lin[1][ia] / det, lin[0][ia] / det]]
    tv = Series.var(t, n)
    sa, sb = Series.zero(n), Series.zero(n)

    def images(sa, sb):
        im = {t: tv, a: sa, b: sb}
        return tuple(im[v] for v in VARIABLES)

    for _ in range(n + 1):
        r0, r1 = (compose(g, images(sa, sb)) for g in gens)
        if r0.is_zero() and r1.is_zero():
            return CurveParametrization(t, images(sa, sb))
        sa = sa - (r0.scale(inv[0][0]) + r1.scale(inv[0][1]))
        sb = sb - (r0.scale(inv[1][0]) + r1.scale(inv[1][1]))
    raise AssertionError("curve parametrization did not converge")  # pragma: no cover


def _classify(param: CurveParametrization, n: int) -> CyclicClass:
    mod = n + 1
    if param.parameter == "y":
        return CyclicClass(mod, 1)
    if param.parameter == "x":
        return CyclicClass(mod, n)
    phi, psi = param.images[0], param.images[1]
    r, s = psi.ord(), phi.ord()
    if r + s != n + 1:
        raise PatternMismatch(f"orders {s} + {r} of X and Y along the curve do not add up to {n + 1}")
    return CyclicClass(mod, int(r))


def curve_class(normal_form: Series, gens: list[Series]) -> CyclicClass:
    """Class of the curve ``(g_1, g_2)`` on ``X*Y + H(z) = 0`` with ``ord H = n + 1``."""
    n_ord = normal_form.order
    xy = Series.var("x", n_ord) * Series.var("y", n_ord)
    h = normal_form - xy
    if h.is_zero() or h.variables() - {"z"}:
        raise PatternMismatch("normal form must be X*Y + H(z) with H != 0")
    n = int(h.ord()) - 1
    gens = [g.truncate(n_ord) if g.order >= n_ord else g for g in gens]
    if any(g.order != n_ord for g in gens):
        raise PatternMismatch("curve generators are known to lower order than the normal form")
    param = parametrize_curve(gens)
    if not compose(normal_form, param.images).is_zero():
        raise NotOnSurface("curve does not lie on the surface")
    return _classify(param, n)


def track_curve(f: Series, gens: list[Series], report: SingularityReport) -> CyclicClass:
    """Class in ``Z/(n+1)`` of the curve ``(g_1, g_2)`` on ``{f = 0}``.

    ``report`` must be the ``A_n`` verdict for ``f``; its coordinate change is
    applied to the generators and the resulting curve is classified against
    the normal form.  Membership ``f in (g_1, g_2)`` is checked by restricting
    ``f`` to the curve, which is exact for a smooth curve germ.
    """
    if report.verdict != "A":
        raise PatternMismatch(f"curve classes are computed on A_n germs only, got {report.label}")
    if not report.split or report.normal_form is None:
        raise NeedsExtension("the normal form X*Y - w z^(n+1) needs a quadratic extension of Q")
    w = report.order or f.order
    if f.order < w or any(g.order < w for g in gens):
        raise PatternMismatch("inputs are known to lower order than the certificate")
    change = report.change.with_order(w)
    new_gens = [substitute(g.truncate(w), change) for g in gens]
    param = parametrize_curve(new_gens)
    back = tuple(compose(s, param.images) for s in change.images)
    if not compose(f.truncate(w), back).is_zero():
        raise NotOnSurface("f does not vanish on the curve")
    return _classify(param, report.n)
