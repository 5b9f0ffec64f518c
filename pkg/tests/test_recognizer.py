import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import changes, series, units
from rdplocus.expr import parse_series
from rdplocus.recognizer import (NOT_STABILIZED, NotDoublePoint, PreparedForm, corank2_classify,
                                 induct_step, normalize_quadratic, prepare, recognize, swap_roles,
                                 tjurina, tjurina_search)
from rdplocus.series import CoordChange, Series, SeriesError, substitute

EXAMPLE_A = "x*y + x*z^2 + y^2*z - z^6"
EXAMPLE_B = "x*y + x*z^4 + y^2*z^6 + y^3*z^2 + y^4*z^25 + x^2*z"

# expression, label, split over Q
KNOWN = [
    (EXAMPLE_A, "A_4", True),
    (EXAMPLE_B, "A_20", True),
    ("x*y - z^2", "A_1", True),
    ("x*y + z^7", "A_6", True),
    ("x^2 - y^2 + z^3", "A_2", True),
    ("x^2 + 4*y*z + z^5", "A_1", True),
    ("x^2 + y^2 + z^2", "A_1", False),
    ("x^2 + y^2 - z^4", "A_3", False),
    ("x^2 + 2*y^2 + z^5", "A_4", False),
    ("x^2 + y^3 + z^4", "E6", True),
    ("x^2 + y^3 + y*z^3", "Undetermined", True),
    ("x^2 + y^3 + z^6", "NotRDP", True),
    ("x^2 + y^4 + z^4", "NotRDP", True),
    ("x^2 + y^3 + z^3", "Undetermined", True),
]


def certificate_holds(f: Series, rep) -> bool:
    w = rep.order
    lhs = substitute(f.truncate(w), rep.change.with_order(w))
    return lhs == rep.unit.with_order(w) * rep.normal_form.with_order(w)


@pytest.mark.parametrize("text,label,split", KNOWN)
def test_known(text, label, split):
    f = parse_series(text)
    rep = recognize(f)
    assert rep.label == label
    if rep.verdict == "A":
        assert rep.split == split
        assert rep.mu == rep.n + 1
        if split:
            assert certificate_holds(f, rep)
            nf = rep.normal_form
            assert nf.coeff(1, 1, 0) == 1 and nf.ord() == 2
            assert (nf - Series.var("x", nf.order) * Series.var("y", nf.order)).ord() == rep.mu


def test_example_a_details():
    rep = recognize(parse_series(EXAMPLE_A))
    assert rep.delta_mu == 1 and rep.mu == 5


def test_full_order_certificate():
    f = parse_series(EXAMPLE_B)
    rep = recognize(f, adaptive=False)
    assert rep.label == "A_20" and rep.order == 32
    assert certificate_holds(f, rep)


def test_adaptive_and_full_agree():
    for text, _, _ in KNOWN[:6]:
        f = parse_series(text)
        assert recognize(f).label == recognize(f, adaptive=False).label


def test_truncation_limit():
    f = parse_series("x*y + z^40")
    rep = recognize(f)
    assert rep.verdict == "A_at_least" and rep.n == 31
    assert recognize(parse_series("x*y")).verdict == "A_at_least"


def test_not_double_point():
    for text in ("x", "x + y^2", "1 + x*y"):
        with pytest.raises(NotDoublePoint):
            recognize(parse_series(text))


def test_corank2_classify_direct():
    assert corank2_classify(parse_series("3*x^2 + y^3 + z^4")).verdict == "E6"
    assert corank2_classify(parse_series("x^2 + x*y^2 + y^3 + z^5")).verdict == "Undetermined"
    with pytest.raises(SeriesError):
        corank2_classify(parse_series("x*y + z^3"))


def test_normalize_quadratic_outcomes():
    assert normalize_quadratic(parse_series("x^2 + 4*y*z + z^5")).outcome == "XYForm"
    assert normalize_quadratic(parse_series("x^2 + y^2 + z^2")).outcome == "RankThree"
    assert normalize_quadratic(parse_series("x^2 + y^3 + z^4")).outcome == "Corank2"
    assert normalize_quadratic(parse_series("x^2 + y^2 + z^5")).outcome == "NeedsExtension"


# ---- coordinate-change and contact invariance ------------------------------

INVARIANCE_ORDER = 24
INVARIANT_SET = [parse_series(t, INVARIANCE_ORDER) for t, label, _ in KNOWN if label != "A_20"]
INVARIANT_SET.append(parse_series(EXAMPLE_B, INVARIANCE_ORDER))
LABELS = [recognize(f).label for f in INVARIANT_SET]


@settings(max_examples=110, deadline=None)
@given(st.integers(0, len(INVARIANT_SET) - 1), changes(INVARIANCE_ORDER), units(INVARIANCE_ORDER))
def test_recognize_invariant_under_contact_equivalence(i, phi, u):
    g = substitute(INVARIANT_SET[i], phi) * u
    rep = recognize(g)
    assert rep.label == LABELS[i]
    if rep.verdict == "A" and rep.split:
        assert certificate_holds(g, rep)


# ---- induct_step --------------------------------------------------------------

ORDER = 20
_x, _y, _z = (Series.var(v, ORDER) for v in "xyz")


def z_series(min_deg: int):
    return st.dictionaries(st.integers(min_deg, 8), st.integers(-4, 4), max_size=3).map(
        lambda t: Series({(0, 0, k): c for k, c in t.items()}, ORDER))


@st.composite
def prepared_forms(draw):
    """``x*y + h + sum x^i f_i + sum y^j g_j`` with 2-jet ``x*y + c*z^2``."""
    f1 = draw(z_series(2).filter(lambda s: not s.is_zero()))
    h = draw(z_series(2))
    g = [draw(z_series(1 if j == 2 else 0)) for j in range(2, 2 + draw(st.integers(1, 3)))]
    f = [draw(z_series(1 if i == 2 else 0)) for i in range(2, 2 + draw(st.integers(0, 2)))]
    total = _x * _y + h + _x * f1
    for j, gj in enumerate(g, start=2):
        total = total + gj * _y ** j
    for i, fi in enumerate(f, start=2):
        total = total + fi * _x ** i
    return total


@settings(max_examples=150, deadline=None)
@given(prepared_forms())
def test_induct_step_monotone(g):
    p = prepare(g)
    for _ in range(6):
        if not p.f1() and p.g1():
            p = swap_roles(p)
        r1 = p.f1().ord()
        if not 0 < r1 < ORDER:
            break
        m = p.m_value()
        new = induct_step(p)
        assert new.f1().is_zero()
        turned = swap_roles(new) if new.g1() else new
        big_m = turned.m_value()
        assert big_m > m or m == float("inf")
        if new.g1():
            assert m == float("inf") or new.g1().ord() >= m - r1
        # the prepared form still represents F after the change and unit
        assert substitute(g, new.accumulated) * new.unit == new.series()
        p = new


def test_induct_step_rejects():
    p = prepare(_x * _y + _z ** 5)
    with pytest.raises(SeriesError):
        induct_step(p)


# ---- Tjurina -----------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 5, 9])
def test_tjurina_of_normal_forms(n):
    f = parse_series(f"x*y - z^{n + 1}")
    assert tjurina(f, n + 2) == n
    value, bound = tjurina_search(f, 24)
    assert value == n and bound <= n + 1


def test_tjurina_not_stabilized():
    f = parse_series("x*y - z^12")
    assert tjurina(f, 5) == NOT_STABILIZED
    with pytest.raises(SeriesError):
        tjurina(parse_series("x*y", 8), 8)
