import pytest

from qserre import linalg
from qserre.calculus import FormElement, build_3d, build_H3
from qserre.qfield import SYMBOLIC
from qserre.spectral import (Fibration, FibrationError, fibre_connection, hopf_fibration, spectral_pages,
                             symbolic_recheck, theta_map, xi_component)

from conftest import Q32

N = 3


@pytest.fixture(scope="module")
def fib():
    return hopf_fibration(Q32, N)


@pytest.fixture(scope="module")
def ss(fib):
    return fib.spectral(N)


XI_TABLE = {(0, 0): ["1"], (0, 1): ["w1"], (1, 0): ["w0", "w2"], (1, 1): ["w0^w1", "w1^w2"],
            (2, 0): ["w0^w2"], (2, 1): ["w0^w1^w2"]}


def test_horizontal_symbols(fib):
    assert sorted(fib.horizontal) == [0, 2]
    assert fib.P == 2 and fib.top == 3


def test_xi_table(fib):
    table = fib.xi_table(N, mmax=3, nmax=2)
    for (m, n), row in table.items():
        assert row["generators"] == XI_TABLE.get((m, n), []), (m, n)
        assert row["free"]


def test_xi_component_blocks(fib):
    comp = xi_component(1, 1, N, fib)
    assert comp.generators == [(0, 1), (1, 2)]
    assert comp.dim == sum(comp.block_dims().values())
    # free over X on w0^w1 (Z-degree -2) and w1^w2 (Z-degree 2)
    X = fib.X
    coeff = {z: len(X.algebra.enumerate_basis(N, z)) for z in range(-N, N + 1)}
    for z, d in comp.block_dims().items():
        assert d == coeff.get(z + 2, 0) + coeff.get(z - 2, 0)


def test_theta_invertible_on_every_block(fib):
    for m in range(fib.P + 1):
        for n in range(fib.top - m + 1):
            th = theta_map(m, n, N, fib)
            for z in th.zdegrees():
                assert th.invertible(z), (m, n, z)


def test_fibration_and_filtration_reports(fib):
    assert fib.filtration_check().ok
    assert fib.fibration_test().ok
    assert fib.structural_check().ok
    assert fib.density_check().ok


@pytest.mark.parametrize("length", range(5))
def test_lemma_directly_from_the_calculus(length):
    # d x - [deg x; q^-2] x w1 has no w1 component, i.e. lies in X.w0 + X.w2
    X = build_3d(Q32)
    alg = X.algebra
    for w in alg.enumerate_basis(length):
        if alg.word_length(w) != length:
            continue
        x = X.basis_element((w, ()))
        rest = X.d(x) - x * X.sym("w1") * Q32.q_integer(alg.word_zdeg(w))
        assert all(f != (1,) for _, f in rest.terms), alg.render_word(w)


def test_lemma_report(fib):
    assert fib.lemma_check(4).ok
    assert not fib.lemma_check(3, base="q^2").ok


def test_fibre_cohomology(fib):
    B_dim = len(fib.X.algebra.enumerate_basis(N, 0))
    c0, c1 = fibre_connection(0, N, fib), fibre_connection(1, N, fib)
    assert c0.generators == [((), ())]
    assert c1.generators == [((), (1,))]
    assert c0.dims[0] == B_dim and c1.dims[0] == B_dim
    assert all(d == 0 for z, d in c0.dims.items() if z != 0)
    assert fibre_connection(2, N, fib).generators == []
    assert fib.fibre_check().ok


def test_connection_forms_vanish(fib):
    data = fib.product_data()
    assert all(f.is_zero() for f in data["conn"].values())
    assert data["prod"] == {(0, 0): 1, (0, 1): 1, (1, 0): 1}


E1 = {(0, 0): 4, (0, 1): 4, (1, 0): 6, (1, 1): 6, (2, 0): 4, (2, 1): 4}
E2 = {(0, 0): 1, (0, 1): 1, (2, 0): 1, (2, 1): 1}
E3 = {(0, 0): 1, (2, 1): 1}


def _nonzero(table):
    return {k: v for k, v in table.items() if v}


def test_pages(ss):
    assert _nonzero(ss.page(1).table()) == E1
    assert _nonzero(ss.page(2).table()) == E2
    assert _nonzero(ss.page(3).table()) == E3
    assert _nonzero(ss.page(4).table()) == E3
    assert all(z == 0 for (z, p, q), d in ss.page(1).dims.items() if d)


def test_d2_kills_the_off_corner(ss):
    pg = ss.page(2)
    maps = {k: linalg.rank(v) for k, v in pg.maps.items() if v and any(v)}
    assert maps == {(0, 0, 1): 1}
    assert ss.page(3).d_is_zero() and ss.page(4).d_is_zero()


def test_page_laws(ss, fib):
    for r in range(1, fib.P + 2):
        assert ss.page_check(r).ok


def test_e1_e2_reports(ss):
    assert ss.e1_check().ok
    rep = ss.e2_check()
    assert rep.ok
    base = rep.details["truncated_base_cohomology"]
    assert (base["0,0"], base["1,0"], base["2,0"]) == (1, 0, 1)
    assert ss.higher_check().ok


def _direct_total_cohomology(X, N, z):
    """dim C^k - rank d_k - rank d_(k-1) on the truncated coordinate complex."""
    dims, ranks = {}, {}
    for k in range(X.max_degree + 1):
        keys = X.truncate_component(k, N, z)
        dims[k] = len(keys)
        ranks[k] = linalg.rank([X.d_key(key) for key in keys])
    return {k: dims[k] - ranks[k] - ranks.get(k - 1, 0) for k in dims}


def test_convergence_against_direct_computation(ss, fib):
    assert ss.convergence_check().ok
    Einf = ss.page(fib.P + 2)
    for z in ss.blocks():
        direct = _direct_total_cohomology(fib.X, N, z)
        for k in range(5):
            e = sum(Einf.dims.get((z, p, k - p), 0) for p in range(fib.P + 1))
            assert e == direct.get(k, 0), (z, k)
    assert _direct_total_cohomology(fib.X, N, 0) == {0: 1, 1: 0, 2: 0, 3: 1, 4: 0}


def test_spectral_pages_wrapper(fib):
    pages = spectral_pages(N, 2, fib)
    assert [p.r for p in pages] == [1, 2]


def test_symbolic_recheck():
    rep = symbolic_recheck(N, Q32)
    assert rep.ok
    assert "seconds" not in rep.details


def test_symbolic_pages_agree():
    sym = hopf_fibration(SYMBOLIC, N).spectral(N)
    assert _nonzero(sym.page(2).table()) == E2
    assert _nonzero(sym.page(3).table()) == E3


def test_small_truncations():
    for n in (0, 1, 2):
        f = hopf_fibration(Q32, n)
        s = f.spectral(n)
        assert s.convergence_check().ok
        assert all(s.page_check(r).ok for r in (1, 2, 3))
    assert _nonzero(hopf_fibration(Q32, 0).spectral(0).page(1).table()) == E2


def _sigma_by_congruence(fib, g, eta, m, base_len):
    """eta' in Omega^m B with g ^ eta = (-1)^(nm) eta' ^ g modulo higher filtration."""
    X = fib.X
    n = len(g)
    gform = FormElement(X, {((), g): Q32.one})
    lhs = (gform * eta).terms
    cands = [k for k in X.truncate_component(m, base_len, 0) if fib.hdeg(k) == m]
    sign = -1 if (n * m) % 2 else 1
    rows = [(X.basis_element(k) * gform * sign).terms for k in cands]
    keep = lambda k: fib.hdeg(k) <= m
    lhs_low = {k: c for k, c in lhs.items() if keep(k)}
    rows_low = [{k: c for k, c in r.items() if keep(k)} for r in rows]
    sol = linalg.solve(rows_low, lhs_low)
    assert sol is not None
    return FormElement(X, linalg.combine([{k: Q32.one} for k in cands], sol))


def test_sigma_hat_independent(fib):
    X = fib.X
    for eta in fib.sample_base_forms(2):
        degs = {X.key_degree(k) for k in eta.terms}
        if len(degs) != 1:
            continue
        m = degs.pop()
        for g in ((), (1,)):
            want = _sigma_by_congruence(fib, g, eta, m, 2)
            assert fib.sigma_hat(g, eta) == want


def test_sigma_hat_closed_form(fib):
    X = fib.X
    # w1 x = q^(-2 deg x) x w1 cancels the wedge constants -q^(+-4)
    for x, s in ((X.parse("a*c"), "w0"), (X.parse("b*d"), "w2"), (X.parse("a*b*c*c"), "w0")):
        eta = x * X.sym(s)
        assert fib.sigma_hat((1,), eta) == eta
        assert fib.sigma_hat((), eta) == eta


def test_product_checks(fib):
    assert fib.braiding_condition_check(N).ok
    rep = fib.product_check(samples=50, seed=3)
    assert rep.ok and rep.checked >= 50


def test_corrupted_maurer_cartan_is_detected():
    q = Q32.q
    X = build_3d(Q32, mc_override={0: [(2 * q, (), (0, 1))]})
    f = Fibration(X, build_H3(Q32), N=2)
    assert not f.fibration_test().ok
    with pytest.raises(FibrationError):
        f.spectral(2).page(2)
