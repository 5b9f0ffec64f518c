import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import changes
from rdplocus.divisors import (ChainPresentation, CyclicClass, NotOnSurface, PatternMismatch,
                               chain_class_group, curve_class, parametrize_curve, track_curve)
from rdplocus.expr import parse_series, parse_tuple
from rdplocus.lattice import snf
from rdplocus.recognizer import NeedsExtension, recognize
from rdplocus.series import Series, substitute


@pytest.mark.parametrize("n", range(1, 11))
def test_chain_class_group(n):
    inv, images = chain_class_group(n)
    assert inv == [n + 1]
    assert images == list(range(1, n + 1))
    assert snf(ChainPresentation(n).relations)[-1] == n + 1


def test_cyclic_class_signed():
    assert CyclicClass(5, 7).residue == 2
    assert CyclicClass(5, 4).signed == -1
    assert CyclicClass(4, 2).signed == 2
    assert str(CyclicClass(6, 5)) == "5 (= -1) in Z/6"


@pytest.mark.parametrize("n", [1, 2, 4, 7])
def test_normal_form_curves(n):
    nf = parse_series(f"x*y - z^{n + 1}")
    assert curve_class(nf, parse_tuple("(x, z)")).residue == 1
    assert curve_class(nf, parse_tuple("(y, z)")).residue == n
    for a in range(1, n + 1):
        gens = parse_tuple(f"(x - z^{a}, y - z^{n + 1 - a})")
        assert curve_class(nf, gens).residue == n + 1 - a


def test_parametrize_curve():
    p = parametrize_curve(parse_tuple("(x - z^2 - y*z, y + z^3)"))
    assert p.parameter == "z"
    x, y, z = p.images
    assert y == parse_series("-z^3") and x == parse_series("z^2 - z^4")
    assert parametrize_curve(parse_tuple("(x, z)")).parameter == "y"
    with pytest.raises(PatternMismatch):
        parametrize_curve(parse_tuple("(x^2, z)"))
    with pytest.raises(NotOnSurface):
        parametrize_curve(parse_tuple("(x - 1, z)"))
    with pytest.raises(PatternMismatch):
        parametrize_curve([parse_series("x")])


def test_curve_not_on_surface():
    f = parse_series("x*y - z^3")
    with pytest.raises(NotOnSurface):
        track_curve(f, parse_tuple("(x, y)"), recognize(f))
    with pytest.raises(NotOnSurface):
        curve_class(f, parse_tuple("(x, y)"))


def test_track_curve_needs_a_type():
    f = parse_series("x^2 + y^3 + z^4")
    with pytest.raises(PatternMismatch):
        track_curve(f, parse_tuple("(x, y)"), recognize(f))
    g = parse_series("x^2 + y^2 - z^4")
    with pytest.raises(NeedsExtension):
        track_curve(g, parse_tuple("(x - z^2, y)"), recognize(g))


def test_example_a_curves():
    # x*y + x*z^2 + y^2*z - z^6 contains (x, z) and its class is a generator of Z/5
    f = parse_series("x*y + x*z^2 + y^2*z - z^6")
    rep = recognize(f)
    c = track_curve(f, parse_tuple("(x, z)"), rep)
    assert c.modulus == 5 and c.residue in (1, 4)


ORDER = 16


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), changes(ORDER), st.integers(1, 6))
def test_track_curve_under_coordinate_change(n, phi, a):
    a = min(a, n)
    f = substitute(parse_series(f"x*y - z^{n + 1}", ORDER), phi)
    rep = recognize(f)
    assert rep.label == f"A_{n}"
    sx, sy, sz = phi.images
    c1 = track_curve(f, [sx, sz], rep).residue
    c2 = track_curve(f, [sy, sz], rep).residue
    assert c1 in (1, n) and (c1 + c2) % (n + 1) == 0
    z = Series.var("z", ORDER)
    c3 = track_curve(f, [sx - substitute(z ** a, phi), sy - substitute(z ** (n + 1 - a), phi)], rep)
    # same orientation as (x, z): class n + 1 - a when (x, z) maps to 1
    expected = (n + 1 - a) if c1 == 1 else a
    assert c3.residue == expected % (n + 1)
