import json
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from qserre.calculus import (DegreeOverflow, build_3d, build_4d, build_H3, build_H4, calculus_matches,
                             d_squared_check, dump_calculus, load_calculus, verify_calculus)
from qserre.cli import golden_documents
from qserre.homomorph import build_4d_full
from qserre.qfield import SYMBOLIC
from qserre.suites import RunConfig

from conftest import Q32

GOLDENS = Path(__file__).parent / "goldens"
X3 = build_3d(Q32)

# relation tables written out in the element grammar
REL_3D = {
    "d": {"a": "a*w1 - q*b*w2", "b": "a*w0 - q^2*b*w1", "c": "c*w1 - q*d*w2", "d": "c*w0 - q^2*d*w1"},
    "comm": {("w0", "a"): "q^-1*a*w0", ("w0", "b"): "q*b*w0", ("w1", "a"): "q^-2*a*w1",
             ("w1", "b"): "q^2*b*w1", ("w2", "a"): "q^-1*a*w2", ("w2", "b"): "q*b*w2",
             ("w0", "c"): "q^-1*c*w0", ("w0", "d"): "q*d*w0", ("w1", "c"): "q^-2*c*w1",
             ("w1", "d"): "q^2*d*w1", ("w2", "c"): "q^-1*c*w2", ("w2", "d"): "q*d*w2"},
    "mc": {"w0": "q^2*(q^2+1)*w0*w1", "w1": "q*w0*w2", "w2": "q^2*(q^2+1)*w1*w2"},
    "wedge": {("w0", "w0"): "0", ("w1", "w1"): "0", ("w2", "w2"): "0", ("w2", "w0"): "-q^2*w0*w2",
              ("w1", "w0"): "-q^4*w0*w1", ("w2", "w1"): "-q^4*w1*w2"},
}
REL_4D = {
    "d": {"a": "((q - q^-1 - q^-2)/(q+1))*a*w1 - q^-2*b*wp + (q^-1/(q+1))*a*w2",
          "b": "(q/(q+1))*b*w1 - q^-2*a*wm - (q^-2/(q+1))*b*w2",
          "c": "((q - q^-1 - q^-2)/(q+1))*c*w1 - q^-2*d*wp + (q^-1/(q+1))*c*w2",
          "d": "(q/(q+1))*d*w1 - q^-2*c*wm - (q^-2/(q+1))*d*w2"},
    "comm": {("w2", "a"): "q*a*w2 - (q - q^-1)*b*wp + q*(q - q^-1)^2*a*w1",
             ("w2", "b"): "q^-1*b*w2 - (q - q^-1)*a*wm",
             ("wm", "a"): "a*wm - (q^2 - 1)*b*w1", ("wm", "b"): "b*wm",
             ("wp", "a"): "a*wp", ("wp", "b"): "b*wp - (q^2 - 1)*a*w1",
             ("w1", "a"): "q^-1*a*w1", ("w1", "b"): "q*b*w1"},
}


@pytest.fixture(params=[Q32, SYMBOLIC], ids=["q=3/2", "symbolic"])
def X(request):
    return build_3d(request.param)


def test_3d_relations(X):
    for g, text in REL_3D["d"].items():
        assert X.d(X.gen(g)) == X.parse(text), g
    for (s, g), text in REL_3D["comm"].items():
        assert X.sym(s) * X.gen(g) == X.parse(text), (s, g)
    for s, text in REL_3D["mc"].items():
        assert X.d(X.sym(s)) == X.parse(text), s
    for (s, t), text in REL_3D["wedge"].items():
        assert X.sym(s) * X.sym(t) == X.parse(text), (s, t)


@pytest.mark.parametrize("field", [Q32, SYMBOLIC], ids=["q=3/2", "symbolic"])
def test_4d_relations(field):
    X = build_4d(field)
    for g, text in REL_4D["d"].items():
        assert X.d(X.gen(g)) == X.parse(text), g
    swap = str.maketrans("ab", "cd")
    for (s, g), text in REL_4D["comm"].items():
        assert X.sym(s) * X.gen(g) == X.parse(text), (s, g)
        assert X.sym(s) * X.gen(g.translate(swap)) == X.parse(text.translate(swap)), (s, g)


@pytest.mark.parametrize("calc", [build_3d(Q32), build_H3(Q32), build_H4(Q32), build_4d_full(Q32)[0]],
                         ids=["3D", "H3", "H4", "4D"])
def test_verify_calculus(calc):
    rep = verify_calculus(calc, min(calc.max_degree, 3))
    assert rep.ok, rep.failures[:2]


@pytest.mark.parametrize("calc", [build_3d(SYMBOLIC), build_H3(SYMBOLIC), build_H4(SYMBOLIC)], ids=["3D", "H3", "H4"])
def test_d_squared_symbolic(calc):
    rep = d_squared_check(calc, 3)
    assert rep.ok and rep.checked > 0


def test_h_calculi():
    for H, lam in ((build_H3(Q32), Q32.q ** -2), (build_H4(Q32), Q32.q)):
        z, zeta = H.gen("z"), H.sym(0)
        assert zeta * z == z * zeta * lam
        assert H.d(z) == z * zeta
        assert H.d(H.gen("zi")) == -(H.gen("zi") * H.d(z) * H.gen("zi"))


def _terms(deg):
    term = st.tuples(st.lists(st.integers(0, 3), max_size=2).map(tuple),
                     st.lists(st.integers(0, 2), min_size=deg, max_size=deg, unique=True).map(tuple),
                     st.integers(-2, 2))
    return st.lists(term, min_size=1, max_size=2)


forms = st.integers(0, 2).flatmap(_terms)


def _form(parts):
    out = X3.zero()
    for word, syms, c in parts:
        f = X3.lift(X3.algebra.normal_form(word))
        for s in syms:
            f = f * X3.sym(s)
        out = out + f * c
    return out


@given(forms, forms)
def test_leibniz_and_d_squared(u, v):
    a, b = _form(u), _form(v)
    deg = len(u[0][1])
    assert X3.d(X3.d(a)) == X3.zero()
    if deg + len(v[0][1]) + 1 > X3.max_degree:
        return
    ab = a * b
    assert X3.d(ab) == X3.d(a) * b + a * X3.d(b) * (-1) ** deg


def test_top_degree():
    top = X3.sym(0) * X3.sym(1) * X3.sym(2)
    assert not top.is_zero()
    with pytest.raises(DegreeOverflow):
        build_4d(Q32).sym(0) * build_4d(Q32).sym(1)


def test_dump_is_canonical_json():
    text = dump_calculus(X3)
    data = json.loads(text)
    assert data["schema"] == "qserre.calculus/1"
    assert text == json.dumps(data, indent=2, sort_keys=True)
    assert calculus_matches(X3, load_calculus(text, Q32)).ok


@pytest.mark.parametrize("calculus", ["3d", "4d"])
def test_golden_files_are_current(calculus):
    docs = golden_documents(["calculus"], RunConfig(calculus=calculus, scalar=SYMBOLIC))
    assert docs["calculus.json"] == (GOLDENS / calculus / "calculus.json").read_text()


@pytest.mark.parametrize("calculus", ["3d", "4d"])
def test_golden_presentations_round_trip(calculus):
    doc = json.loads((GOLDENS / calculus / "calculus.json").read_text())
    for name, pres in doc["presentations"].items():
        for field in (SYMBOLIC, Q32):
            loaded = load_calculus(json.dumps(pres), field)
            rep = calculus_matches(loaded["calculus"], loaded)
            assert rep.ok, (name, rep.failures[:1])


def test_golden_pins_literal_constants():
    pres = json.loads((GOLDENS / "3d" / "calculus.json").read_text())["presentations"]["3D"]
    X = build_3d(SYMBOLIC)
    for g, text in REL_3D["d"].items():
        assert X.parse(pres["d"][g]) == X.parse(text)


def test_corrupted_mc_fails_d_squared():
    q = Q32.q
    bad = build_3d(Q32, mc_override={1: [(q + 1, (), (0, 2))]})
    assert not d_squared_check(bad, 2).ok
    assert d_squared_check(X3, 2).ok
