import pytest
from hypothesis import given, strategies as st

from qserre.ncpoly import (AlgebraMismatch, build_laurent, build_sl2, counit_sides, tensor,
                           verify_presentation)
from qserre.qfield import SYMBOLIC

from conftest import Q32

SL2 = build_sl2(Q32)
H = build_laurent(Q32)
GEN_WORDS = st.lists(st.integers(0, 3), max_size=4).map(tuple)


def element(alg, text):
    return alg.parse(text)


def test_relations_in_normal_form():
    a, b, c, d = (SL2.gen(x) for x in "abcd")
    q = Q32.q
    assert a * b == b * a * q
    assert a * c == c * a * q
    assert c * b == b * c
    assert b * d == d * b * q
    assert c * d == d * c * q
    assert a * d - d * a == b * c * (q - 1 / q)
    assert a * d - b * c * q == SL2.one()
    assert d * a - b * c * (1 / q) == SL2.one()


@pytest.mark.parametrize("L", range(6))
def test_pbw_basis_size(L):
    # the associated graded of the coordinate ring has (L+1)^2 monomials of degree L
    assert len(SL2.normal_words(L)) == (L + 1) ** 2


def test_pbw_words_are_the_expected_monomials():
    allowed = lambda w: list(w) == sorted(w) and not (0 in w and 3 in w)
    for L in range(5):
        assert all(allowed(w) for w in SL2.normal_words(L))


@given(GEN_WORDS, GEN_WORDS, GEN_WORDS)
def test_associativity(u, v, w):
    x, y, z = (SL2.normal_form(t) for t in (u, v, w))
    assert (x * y) * z == x * (y * z)


@given(GEN_WORDS, GEN_WORDS)
def test_coproduct_is_multiplicative(u, v):
    x, y = SL2.normal_form(u), SL2.normal_form(v)
    assert SL2.coproduct(x * y) == SL2.coproduct(x) * SL2.coproduct(y)


@given(GEN_WORDS)
def test_antipode_and_counit(u):
    x = SL2.normal_form(u)
    cop = SL2.coproduct(x)
    left, right = counit_sides(SL2, cop)
    assert left == x and right == x
    eps = SL2.scalar(SL2.counit(x))
    s_left = sum((SL2.antipode(SL2.word_element(w1)) * SL2.word_element(w2) * c
                  for (w1, w2), c in cop.terms.items()), SL2.element({}))
    assert s_left == eps
    assert SL2.antipode(SL2.antipode(x, inverse=True)) == x


@given(GEN_WORDS)
def test_zgrading_is_respected(u):
    x = SL2.normal_form(u)
    if x.terms:
        assert SL2.zdegree(x) == sum((1, -1, 1, -1)[g] for g in u)


def test_quantum_determinant_is_central_grouplike():
    det = element(SL2, "a*d - q*b*c")
    assert det == SL2.one()
    assert SL2.coproduct(det) == tensor(SL2.one(), SL2.one())


def test_laurent_inverse_and_hopf():
    z, zi = H.gen("z"), H.gen("zi")
    assert z * zi == H.one()
    assert z ** -2 == zi * zi
    assert H.coproduct(z ** 3) == tensor(z ** 3, z ** 3)
    assert H.antipode(z ** 2) == zi ** 2
    with pytest.raises(ValueError):
        (z + zi) ** -1


def test_non_units_cannot_be_inverted():
    with pytest.raises(ValueError):
        SL2.gen("a") ** -1


def test_mixing_algebras_is_refused():
    with pytest.raises(AlgebraMismatch):
        SL2.gen("a") + build_sl2(SYMBOLIC).gen("a")


@pytest.mark.parametrize("alg", [SL2, H], ids=["SLq2", "H"])
def test_verify_presentation_passes(alg):
    rep = verify_presentation(alg, 6)
    assert rep.ok, rep.failures[:2]
    assert rep.checked > 0


def test_confluence_counts_overlaps():
    rep = verify_presentation(SL2, 6)
    assert rep.details["overlaps"] == 86


def test_symbolic_presentation():
    assert verify_presentation(build_sl2(SYMBOLIC), 4).ok


def test_corrupted_coproduct_is_flagged():
    bad = build_sl2(Q32, coproduct_override={1: [(1, (1,), (0,)), (1, (1,), (3,))]})
    rep = verify_presentation(bad, 3)
    assert not rep.ok


def test_report_json_shape():
    rep = verify_presentation(H, 3)
    js = rep.to_json()
    assert js["status"] == "PASS"
    assert set(js) >= {"check", "status", "truncation", "scalar_mode"}
    rep.fail("made up", "x")
    assert rep.to_json()["witness"] == {"identity": "made up", "witness": "x"}
