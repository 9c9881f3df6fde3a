"""The twelve acceptance criteria, one test each; a PASS/FAIL line per criterion is printed."""

import functools
import json
import time
from pathlib import Path

import pytest

from qserre import suites as S
from qserre.cli import golden_documents
from qserre.calculus import build_3d, build_4d, build_H3, build_H4, calculus_matches, d_squared_check, \
    dump_calculus, load_calculus
from qserre.homomorph import pi_star
from qserre.ncpoly import build_laurent, build_sl2, verify_presentation
from qserre.qfield import SYMBOLIC
from qserre.spectral import hopf_fibration, symbolic_recheck, theta_map

from conftest import Q32

GOLDENS = Path(__file__).parent / "goldens"
RESULTS: dict = {}
CFG = S.RunConfig(N=3)


def criterion(number, title):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*a, **k):
            try:
                fn(*a, **k)
            except BaseException:
                RESULTS[number] = (title, "FAIL")
                print(f"criterion {number:2d} FAIL  {title}")
                raise
            RESULTS[number] = (title, "PASS")
            print(f"criterion {number:2d} PASS  {title}")
        return run
    return wrap


def _ok(reps):
    bad = [(r.check, r.failures[:1]) for r in reps if not r.ok]
    assert not bad, bad
    assert all(r.checked for r in reps)


@criterion(1, "presentation: Hopf axioms, relations, confluence up to 6 letters")
def test_c01_presentation():
    t0 = time.perf_counter()
    reps = [verify_presentation(build_sl2(SYMBOLIC), 6), verify_presentation(build_laurent(SYMBOLIC), 6)]
    elapsed = time.perf_counter() - t0
    _ok(reps)
    assert reps[0].details["overlaps"] > 0
    assert elapsed < 5, elapsed


@criterion(2, "calculus: d^2 = 0 to length 3, relation constants round-trip through goldens")
def test_c02_calculus():
    for calc in (build_3d(SYMBOLIC), build_H3(SYMBOLIC), build_H4(SYMBOLIC)):
        rep = d_squared_check(calc, 3)
        _ok([rep])
    for calc in (build_3d(SYMBOLIC), build_4d(SYMBOLIC)):
        text = dump_calculus(calc)
        _ok([calculus_matches(calc, load_calculus(text, SYMBOLIC))])
        data = json.loads(text)
        assert data["d"] and data["commutation"]
    _ok(S.suite_calculus(S.RunConfig(scalar=SYMBOLIC)))
    for calc in ("3d", "4d"):
        text = (GOLDENS / calc / "calculus.json").read_text()
        assert golden_documents(["calculus"], S.RunConfig(calculus=calc, scalar=SYMBOLIC))["calculus.json"] == text
        for pres in json.loads(text)["presentations"].values():
            loaded = load_calculus(json.dumps(pres), SYMBOLIC)
            _ok([calculus_matches(loaded["calculus"], loaded)])


@criterion(3, "maps: pi_* and rho_* images, well-definedness")
def test_c03_maps():
    for calc in ("3d", "4d"):
        for field in (Q32, SYMBOLIC):
            _ok(S.map_reports(S.RunConfig(calculus=calc, N=2, scalar=field)))
    X, H = build_3d(SYMBOLIC), build_H3(SYMBOLIC)
    assert pi_star(X, H)(X.sym("w1")) == H.gen("zi") * H.d(H.gen("z"))
    X4, H4 = build_4d(SYMBOLIC), build_H4(SYMBOLIC)
    q = SYMBOLIC.q
    assert pi_star(X4, H4)(X4.sym("w2")) == H4.gen("zi") * H4.d(H4.gen("z")) * (q * (q + 1))


@criterion(4, "horizontal and base forms at N = 3")
def test_c04_base():
    for field in (Q32, SYMBOLIC):
        _ok(S.base_reports(S.RunConfig(N=3, scalar=field)))


@criterion(5, "fibration: Theta invertible per block, Xi table")
def test_c05_fibration():
    t0 = time.perf_counter()
    fib = hopf_fibration(Q32, 3)
    _ok([fib.fibration_test(), fib.filtration_check(), S.xi_table_report(fib, 3)])
    for m in range(fib.P + 1):
        for n in range(fib.top - m + 1):
            th = theta_map(m, n, 3, fib)
            assert all(th.invertible(z) for z in th.zdegrees())
    assert time.perf_counter() - t0 < 60
    t1 = time.perf_counter()
    _ok([symbolic_recheck(3, Q32)])
    assert time.perf_counter() - t1 < 600


@criterion(6, "lemma: d x = [deg x; q^-2] x w1 in Xi_0^1 up to length 4")
def test_c06_lemma():
    for field in (Q32, SYMBOLIC):
        _ok([hopf_fibration(field, 3).lemma_check(4)])


@criterion(7, "fibre cohomology: H^0 = B, H^1 = B.w1, flat zero connection")
def test_c07_fibre():
    fib = hopf_fibration(Q32, 3)
    _ok([fib.fibre_check()])
    B = len(fib.X.algebra.enumerate_basis(3, 0))
    c0, c1 = fib.fibre_connection(0), fib.fibre_connection(1)
    assert c0.dims == {z: (B if z == 0 else 0) for z in c0.dims}
    assert c1.dims == {z: (B if z == 0 else 0) for z in c1.dims}
    assert all(f.is_zero() for f in fib.product_data()["conn"].values())


@criterion(8, "spectral: E1, two-row E2, d_r = 0 for r >= 3, convergence")
def test_c08_spectral():
    reps = S.suite_spectral(CFG)
    _ok(reps)
    ss = hopf_fibration(Q32, 3).spectral(3)
    e2 = ss.page(2).table()
    assert all(not d for (p, q), d in e2.items() if q not in (0, 1))
    assert all(e2.get((p, 0), 0) == e2.get((p, 1), 0) for p in range(3))


@criterion(9, "connections: composite = curvature, gauge, H_dR action, six-term sequences")
def test_c09_connection():
    _ok(S.suite_connection(CFG, count=20))


@criterion(10, "product structure: braiding inclusion and axioms on >= 50 samples")
def test_c10_product():
    reps = S.suite_product(CFG, samples=50)
    _ok(reps)
    assert reps[1].details["samples"] >= 50


@criterion(11, "condition K: three closed forms and K inside dB.X at N = 4")
def test_c11_condition_k():
    for field in (Q32, SYMBOLIC):
        (rep,) = S.suite_condition_k(S.RunConfig(calculus="4d", scalar=field))
        _ok([rep])
        assert len([k for k in rep.details if k.startswith("closed_form")]) == 3
    q = SYMBOLIC.q
    (rep,) = S.suite_condition_k(S.RunConfig(calculus="4d", scalar=SYMBOLIC))
    assert rep.details["closed_form_ab"] == str(build_4d(SYMBOLIC).sym("wm") * (-q ** -1))


@criterion(12, "negative controls: every suite flags a corrupted constant")
def test_c12_controls():
    flagged = {name: S.run_control(name, CFG) for name in S.CONTROLS}
    assert all(flagged.values()), flagged
    assert set(S.SUITES) <= set(flagged)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
