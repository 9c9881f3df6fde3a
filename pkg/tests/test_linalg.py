from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qserre import linalg

vec = st.dictionaries(st.integers(0, 5), st.integers(-3, 3).map(Fraction), max_size=4).map(
    lambda v: {k: c for k, c in v.items() if c})
vecs = st.lists(vec, max_size=6)


@given(vecs)
def test_rank_nullity(vs):
    ker = linalg.kernel(vs)
    assert len(ker) + linalg.rank(vs) == len(vs)
    for k in ker:
        assert not {kk: c for kk, c in linalg.combine(vs, k).items() if c}


@given(vecs, vec)
def test_solve(vs, target):
    sol = linalg.solve(vs, target)
    if sol is None:
        assert linalg.rank(vs + [target]) == linalg.rank(vs) + 1
    else:
        got = {k: c for k, c in linalg.combine(vs, sol).items() if c}
        assert got == target


@given(vecs, vecs)
def test_intersection_dimension(U, W):
    cap = linalg.intersection(U, W)
    assert len(cap) == linalg.rank(U) + linalg.rank(W) - linalg.rank(U + W)
    eu, ew = linalg.span(U), linalg.span(W)
    assert all(eu.contains(v) and ew.contains(v) for v in cap)


@given(vecs, vecs)
def test_quotient(U, W):
    num = U + W
    q = linalg.Quotient(num, W)
    assert q.dim == linalg.rank(num) - linalg.rank(W)
    for w in W:
        assert q.is_zero(w)
    for i, lift in enumerate(q.lifts):
        assert q.coords(lift) == {i: 1}


def test_quotient_rejects_bad_denominator():
    with pytest.raises(ValueError):
        linalg.Quotient([{0: 1}], [{1: 1}])


def test_restrict_to():
    vs = [{0: 1, 1: 1}, {1: 1, 2: 1}]
    out = linalg.restrict_to(vs, lambda k: k != 1)
    assert len(out) == 1
    assert set(out[0]) == {0, 2}


def test_echelon_is_fully_reduced():
    e = linalg.span([{0: 2, 1: 4}, {0: 1, 2: 3}, {1: 1}])
    for p, (row, _) in e.rows.items():
        assert row[p] == 1
        for p2 in e.rows:
            if p2 != p:
                assert not row.get(p2)
